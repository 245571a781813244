#include "pedgnn/eval.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pedgnn {

ConfusionCounts count_events(const std::vector<PredictionEvent>& events) {
    ConfusionCounts c;
    for (const auto& e : events) {
        if (!e.ground_truth) continue;
        const bool pred_c = e.predicted == Label::Cross;
        const bool gt_c = *e.ground_truth == Label::Cross;
        if (pred_c && gt_c) ++c.tp;
        else if (pred_c && !gt_c) ++c.fp;
        else if (!pred_c && gt_c) ++c.fn;
        else ++c.tn;
    }
    return c;
}

Metrics compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw std::invalid_argument("compute_metrics: zero events");
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0) {
        m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    } else {
        m.degenerate = true;
    }
    if (c.tp + c.fn > 0) {
        m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    } else {
        m.degenerate = true;
    }
    if (m.precision + m.recall > 0.0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

Metrics compute_metrics(const std::vector<PredictionEvent>& events) {
    return compute_metrics(count_events(events));
}

namespace {

struct TrackBuffer {
    std::vector<NormalizedSkeletonFrame> frames;
    int last_frame_index = -2;
};

} // namespace

std::vector<PredictionEvent> stream_predict(const ClipRecord& clip,
                                            const PedGnnParams& params,
                                            const SpectralBasis& basis) {
    const int n_frames = params.config.n_frames;
    std::map<int, TrackBuffer> tracks;
    std::vector<PredictionEvent> events;

    for (const auto& frame : clip.frames) {
        for (const auto& obs : frame.pedestrians) {
            TrackBuffer& track = tracks[obs.pedestrian_id];
            if (frame.frame_index != track.last_frame_index + 1) {
                track.frames.clear(); // gap resets the buffer
            }
            track.last_frame_index = frame.frame_index;

            RawSkeletonFrame raw;
            raw.joints = obs.joints;
            raw.frame_index = frame.frame_index;
            raw.pedestrian_id = obs.pedestrian_id;
            track.frames.push_back(normalize_frame(raw));
            if (static_cast<int>(track.frames.size()) > n_frames) {
                track.frames.erase(track.frames.begin());
            }
            if (static_cast<int>(track.frames.size()) < n_frames) continue;

            SkeletonWindow window;
            window.frames = track.frames;
            const Prediction pred = forward(window, params, basis, Mode::Infer);

            PredictionEvent e;
            e.clip_id = clip.clip_id;
            e.pedestrian_id = obs.pedestrian_id;
            e.frame_index = frame.frame_index;
            e.p_cross = pred.p_cross;
            e.predicted = pred.p_cross >= 0.5 ? Label::Cross : Label::NoCross;
            e.ground_truth = obs.label;
            events.push_back(std::move(e));
        }
    }
    return events;
}

std::vector<PredictionEvent> stream_predict(const std::vector<ClipRecord>& clips,
                                            const PedGnnParams& params,
                                            const SpectralBasis& basis) {
    std::vector<PredictionEvent> events;
    for (const auto& clip : clips) {
        auto e = stream_predict(clip, params, basis);
        events.insert(events.end(), e.begin(), e.end());
    }
    return events;
}

Metrics evaluate_clips(const std::vector<ClipRecord>& clips,
                       const PedGnnParams& params, const SpectralBasis& basis) {
    return compute_metrics(stream_predict(clips, params, basis));
}

namespace {

void sort_rows(std::vector<ReportRow>& rows) {
    std::sort(rows.begin(), rows.end(), [](const ReportRow& a, const ReportRow& b) {
        if (a.test != b.test) return a.test < b.test;
        if (a.train != b.train) return a.train < b.train;
        return a.n_frames < b.n_frames;
    });
}

std::string pct(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
    return buf;
}

} // namespace

std::string format_report(std::vector<ReportRow> rows) {
    if (rows.empty()) throw std::invalid_argument("format_report: no rows");
    sort_rows(rows);
    std::ostringstream out;
    const char* fmt = "%-16s %-16s %5s %10s %11s %8s %10s\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, "Train", "Test", "N_F", "Accuracy",
                  "Precision", "Recall", "F1-score");
    out << buf;
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), fmt, r.train.c_str(), r.test.c_str(),
                      std::to_string(r.n_frames).c_str(), pct(r.metrics.accuracy).c_str(),
                      pct(r.metrics.precision).c_str(), pct(r.metrics.recall).c_str(),
                      pct(r.metrics.f1).c_str());
        out << buf;
    }
    return out.str();
}

std::string format_report_csv(std::vector<ReportRow> rows) {
    sort_rows(rows);
    std::ostringstream out;
    out << "train,test,n_frames,accuracy,precision,recall,f1\n";
    for (const auto& r : rows) {
        out << r.train << ',' << r.test << ',' << r.n_frames << ','
            << pct(r.metrics.accuracy) << ',' << pct(r.metrics.precision) << ','
            << pct(r.metrics.recall) << ',' << pct(r.metrics.f1) << '\n';
    }
    return out.str();
}

std::vector<ReportRow> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line); // header
    std::vector<ReportRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ReportRow r;
        std::string field;
        std::getline(ls, r.train, ',');
        std::getline(ls, r.test, ',');
        std::getline(ls, field, ',');
        r.n_frames = std::stoi(field);
        std::getline(ls, field, ',');
        r.metrics.accuracy = std::stod(field) / 100.0;
        std::getline(ls, field, ',');
        r.metrics.precision = std::stod(field) / 100.0;
        std::getline(ls, field, ',');
        r.metrics.recall = std::stod(field) / 100.0;
        std::getline(ls, field, ',');
        r.metrics.f1 = std::stod(field) / 100.0;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string event_log_line(const PredictionEvent& e) {
    nlohmann::json j{{"clip_id", e.clip_id},
                     {"pedestrian_id", e.pedestrian_id},
                     {"frame", e.frame_index},
                     {"p_cross", e.p_cross},
                     {"predicted", label_name(e.predicted)}};
    if (e.ground_truth) {
        j["gt"] = label_name(*e.ground_truth);
    } else {
        j["gt"] = nullptr;
    }
    return j.dump();
}

} // namespace pedgnn
