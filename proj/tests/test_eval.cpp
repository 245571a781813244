#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pedgnn/eval.hpp"
#include "pedgnn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace pedgnn;

namespace {

PredictionEvent event(Label predicted, std::optional<Label> gt) {
    PredictionEvent e;
    e.predicted = predicted;
    e.ground_truth = gt;
    return e;
}

std::vector<PredictionEvent> events_for(int tp, int fp, int fn, int tn) {
    std::vector<PredictionEvent> events;
    for (int i = 0; i < tp; ++i) events.push_back(event(Label::Cross, Label::Cross));
    for (int i = 0; i < fp; ++i) events.push_back(event(Label::Cross, Label::NoCross));
    for (int i = 0; i < fn; ++i) events.push_back(event(Label::NoCross, Label::Cross));
    for (int i = 0; i < tn; ++i) events.push_back(event(Label::NoCross, Label::NoCross));
    return events;
}

ClipRecord tracked_clip(const std::string& id,
                        const std::vector<std::pair<int, int>>& observations,
                        Rng& rng) {
    // observations are (frame_index, pedestrian_id) pairs, one frame per entry
    ClipRecord clip;
    clip.clip_id = id;
    std::map<int, std::vector<int>> by_frame;
    for (auto [f, p] : observations) by_frame[f].push_back(p);
    for (const auto& [f, peds] : by_frame) {
        ClipFrame frame;
        frame.frame_index = f;
        for (int p : peds) {
            PedestrianObservation obs;
            obs.pedestrian_id = p;
            obs.label = Label::NoCross;
            for (auto& j : obs.joints) {
                j = {rng.uniform(0.0, 100.0), rng.uniform(0.0, 100.0), 1.0};
            }
            frame.pedestrians.push_back(obs);
        }
        clip.frames.push_back(frame);
    }
    return clip;
}

PedGnnParams seeded_params(int n_frames) {
    PedGnnConfig cfg;
    cfg.n_frames = n_frames;
    cfg.hidden_channels = 2;
    cfg.fc_dims = {4, 3, 2};
    PedGnnParams params = make_params(cfg);
    Rng rng(17);
    init_params(params, rng);
    return params;
}

} // namespace

TEST_CASE("worked confusion example: tp=3 fp=1 fn=1 tn=5") {
    const Metrics m = compute_metrics(events_for(3, 1, 1, 5));
    CHECK(m.accuracy == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(m.precision == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(m.recall == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(m.f1 == doctest::Approx(0.75).epsilon(1e-14));
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("degenerate counts produce zeros with the flag set") {
    // no predicted or actual positives: accuracy 1, everything else 0
    const Metrics m = compute_metrics(events_for(0, 0, 0, 5));
    CHECK(m.accuracy == 1.0);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.degenerate);

    // positives exist but none predicted: recall divisor fine, precision not
    const Metrics m2 = compute_metrics(events_for(0, 0, 3, 5));
    CHECK(m2.recall == 0.0);
    CHECK(m2.precision == 0.0);
    CHECK(m2.degenerate);
}

TEST_CASE("zero usable events throws") {
    CHECK_THROWS_AS(compute_metrics(std::vector<PredictionEvent>{}),
                    std::invalid_argument);
    // events whose ground truth is null do not count
    CHECK_THROWS_AS(compute_metrics({event(Label::Cross, std::nullopt)}),
                    std::invalid_argument);
}

TEST_CASE("metrics agree with a brute-force recount on random event lists") {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<PredictionEvent> events;
        const std::size_t n = 1 + rng.uniform_index(200);
        for (std::size_t i = 0; i < n; ++i) {
            const Label pred = rng.bernoulli(0.5) ? Label::Cross : Label::NoCross;
            std::optional<Label> gt;
            const auto roll = rng.uniform_index(3);
            if (roll == 0) gt = Label::Cross;
            else if (roll == 1) gt = Label::NoCross;
            events.push_back(event(pred, gt));
        }

        long long tp = 0, fp = 0, fn = 0, tn = 0, usable = 0;
        for (const auto& e : events) {
            if (!e.ground_truth) continue;
            ++usable;
            tp += e.predicted == Label::Cross && *e.ground_truth == Label::Cross;
            fp += e.predicted == Label::Cross && *e.ground_truth == Label::NoCross;
            fn += e.predicted == Label::NoCross && *e.ground_truth == Label::Cross;
            tn += e.predicted == Label::NoCross && *e.ground_truth == Label::NoCross;
        }
        const ConfusionCounts c = count_events(events);
        CHECK(c.tp == tp);
        CHECK(c.fp == fp);
        CHECK(c.fn == fn);
        CHECK(c.tn == tn);
        if (usable == 0) continue;

        const Metrics m = compute_metrics(c);
        CHECK(m.accuracy ==
              doctest::Approx(static_cast<double>(tp + tn) /
                              static_cast<double>(usable)).epsilon(1e-14));
        if (tp + fp > 0 && tp + fn > 0) {
            const double p = static_cast<double>(tp) / static_cast<double>(tp + fp);
            const double r = static_cast<double>(tp) / static_cast<double>(tp + fn);
            CHECK(m.precision == doctest::Approx(p).epsilon(1e-14));
            CHECK(m.recall == doctest::Approx(r).epsilon(1e-14));
            if (p + r > 0.0) {
                CHECK(m.f1 == doctest::Approx(2 * p * r / (p + r)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("a 20-frame track with N_F=8 emits 13 predictions at frames 7..19") {
    Rng rng(9);
    std::vector<std::pair<int, int>> obs;
    for (int f = 0; f < 20; ++f) obs.push_back({f, 0});
    const auto clip = tracked_clip("c", obs, rng);
    const auto params = seeded_params(8);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    const auto events = stream_predict(clip, params, basis);
    REQUIRE(events.size() == 13);
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(events[i].frame_index == 7 + static_cast<int>(i));
        CHECK(events[i].pedestrian_id == 0);
        CHECK(events[i].clip_id == "c");
    }
}

TEST_CASE("a frame gap resets the buffer and delays the next emission") {
    Rng rng(10);
    std::vector<std::pair<int, int>> obs;
    for (int f = 0; f < 20; ++f) {
        if (f == 10) continue; // missing frame
        obs.push_back({f, 0});
    }
    const auto clip = tracked_clip("c", obs, rng);
    const auto params = seeded_params(4);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    const auto events = stream_predict(clip, params, basis);
    std::set<int> frames;
    for (const auto& e : events) frames.insert(e.frame_index);
    // first segment 0..9 emits at 3..9; second segment 11..19 emits at 14..19
    CHECK(frames == std::set<int>{3, 4, 5, 6, 7, 8, 9, 14, 15, 16, 17, 18, 19});
}

TEST_CASE("pedestrians are tracked independently") {
    Rng rng(11);
    std::vector<std::pair<int, int>> obs;
    for (int f = 0; f < 12; ++f) obs.push_back({f, 1});
    for (int f = 5; f < 12; ++f) obs.push_back({f, 2});
    const auto clip = tracked_clip("c", obs, rng);
    const auto params = seeded_params(4);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    const auto events = stream_predict(clip, params, basis);
    int n1 = 0, n2 = 0;
    for (const auto& e : events) {
        if (e.pedestrian_id == 1) {
            ++n1;
            CHECK(e.frame_index >= 3);
        } else {
            ++n2;
            CHECK(e.frame_index >= 8); // joined at frame 5, fills at 8
        }
    }
    CHECK(n1 == 9);
    CHECK(n2 == 4);
}

TEST_CASE("emission count law: max(0, track_length - n_frames + 1) per track") {
    Rng rng(12);
    const auto params = seeded_params(6);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    for (int length : {1, 5, 6, 7, 30}) {
        std::vector<std::pair<int, int>> obs;
        for (int f = 0; f < length; ++f) obs.push_back({f, 0});
        const auto clip = tracked_clip("c", obs, rng);
        const auto events = stream_predict(clip, params, basis);
        CHECK(static_cast<int>(events.size()) == std::max(0, length - 6 + 1));
    }
}

TEST_CASE("stream predictions use a probability threshold of one half") {
    Rng rng(13);
    std::vector<std::pair<int, int>> obs;
    for (int f = 0; f < 30; ++f) obs.push_back({f, 0});
    const auto clip = tracked_clip("c", obs, rng);
    const auto params = seeded_params(8);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    for (const auto& e : stream_predict(clip, params, basis)) {
        CHECK(e.predicted == (e.p_cross >= 0.5 ? Label::Cross : Label::NoCross));
    }
}

TEST_CASE("report formatting sorts rows and prints two-decimal percentages") {
    std::vector<ReportRow> rows(2);
    rows[0].train = "synthetic";
    rows[0].test = "urban";
    rows[0].n_frames = 8;
    rows[0].metrics = compute_metrics(events_for(3, 1, 1, 5));
    rows[1].train = "combined";
    rows[1].test = "campus";
    rows[1].n_frames = 16;
    rows[1].metrics = compute_metrics(events_for(9, 1, 0, 10));

    const std::string report = format_report(rows);
    CHECK(report.find("Train") != std::string::npos);
    CHECK(report.find("F1-score") != std::string::npos);
    CHECK(report.find("75.00") != std::string::npos);
    CHECK(report.find("80.00") != std::string::npos);
    // sorted by test name: campus row before urban row
    CHECK(report.find("campus") < report.find("urban"));
}

TEST_CASE("csv report round-trips to the printed precision") {
    std::vector<ReportRow> rows(2);
    rows[0].train = "a";
    rows[0].test = "x";
    rows[0].n_frames = 8;
    rows[0].metrics = compute_metrics(events_for(13, 7, 5, 111));
    rows[1].train = "b";
    rows[1].test = "y";
    rows[1].n_frames = 32;
    rows[1].metrics = compute_metrics(events_for(1, 0, 0, 2));

    const auto back = parse_report_csv(format_report_csv(rows));
    REQUIRE(back.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back[i].train == rows[i].train);
        CHECK(back[i].test == rows[i].test);
        CHECK(back[i].n_frames == rows[i].n_frames);
        CHECK(std::abs(back[i].metrics.accuracy - rows[i].metrics.accuracy) < 5e-5);
        CHECK(std::abs(back[i].metrics.f1 - rows[i].metrics.f1) < 5e-5);
    }
    // a second round trip is exact
    CHECK(format_report_csv(back) == format_report_csv(rows));
}

TEST_CASE("event log lines are valid json with the expected fields") {
    PredictionEvent e;
    e.clip_id = "clip_00003";
    e.pedestrian_id = 4;
    e.frame_index = 77;
    e.p_cross = 0.625;
    e.predicted = Label::Cross;
    e.ground_truth = Label::NoCross;
    const std::string line = event_log_line(e);
    CHECK(line.find("\"clip_00003\"") != std::string::npos);
    CHECK(line.find("\"C\"") != std::string::npos);
    CHECK(line.find("\"NC\"") != std::string::npos);
    CHECK(line.find("0.625") != std::string::npos);
}
