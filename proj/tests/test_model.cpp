#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pedgnn/model.hpp"
#include "pedgnn/train.hpp"

#include <cmath>
#include <filesystem>

using namespace pedgnn;

namespace {

SkeletonWindow random_window(int n_frames, Rng& rng) {
    SkeletonWindow w;
    w.frames.resize(static_cast<std::size_t>(n_frames));
    for (auto& frame : w.frames) {
        for (auto& j : frame.joints) {
            j = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)};
        }
    }
    return w;
}

SpectralBasis basis_for(const PedGnnConfig& cfg) {
    return build_spectral_basis(build_topology(), cfg.cheb_order);
}

} // namespace

TEST_CASE("default configuration parameter budget") {
    const PedGnnConfig cfg;
    const PedGnnParams params = make_params(cfg);
    const ParamCount count = count_params(params);
    CHECK(count.count == 6010);
    CHECK(count.bytes_at_f32 == 24040);
    CHECK(count.bytes_at_f32 <= 27648);
}

TEST_CASE("tiny configuration parameter count, hand-counted") {
    PedGnnConfig cfg;
    cfg.hidden_channels = 1;
    cfg.cheb_order = 1;
    cfg.fc_dims = {1, 1, 2};
    const ParamCount count = count_params(make_params(cfg));
    // 3*(3 + 1 + 1) + (19 + 1) + (1 + 1) + (2 + 2) = 41
    CHECK(count.count == 41);
    CHECK(count.bytes_at_f32 == 4 * count.count);
}

TEST_CASE("all-zero parameters give the uniform prediction") {
    PedGnnConfig cfg;
    cfg.n_frames = 3;
    const PedGnnParams params = make_params(cfg);
    Rng rng(1);
    const auto pred = forward(random_window(3, rng), params, basis_for(cfg));
    CHECK(pred.logits(0) == 0.0);
    CHECK(pred.logits(1) == 0.0);
    CHECK(pred.p_cross == doctest::Approx(0.5));
    CHECK(pred.p_nocross == doctest::Approx(0.5));
}

TEST_CASE("infer mode is deterministic and softmax sums to one") {
    PedGnnConfig cfg;
    cfg.n_frames = 4;
    PedGnnParams params = make_params(cfg);
    Rng rng(2);
    init_params(params, rng);
    const auto basis = basis_for(cfg);
    const SkeletonWindow w = random_window(4, rng);
    const auto a = forward(w, params, basis);
    const auto b = forward(w, params, basis);
    CHECK(a.p_cross == b.p_cross);
    CHECK(a.logits(0) == b.logits(0));
    CHECK(std::abs(a.p_cross + a.p_nocross - 1.0) < 1e-12);
}

TEST_CASE("loss examples") {
    Prediction pred;
    pred.logits = Eigen::Vector2d(0.0, 0.0);
    CHECK(loss(pred, Label::Cross) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(loss(pred, Label::NoCross) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    pred.logits = Eigen::Vector2d(2.0, 0.0);
    CHECK(loss(pred, Label::Cross) ==
          doctest::Approx(std::log(1.0 + std::exp(-2.0))).epsilon(1e-12));

    // p_true -> 1 gives loss -> 0
    pred.logits = Eigen::Vector2d(60.0, 0.0);
    CHECK(loss(pred, Label::Cross) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("end-to-end gradients match finite differences") {
    for (std::uint64_t seed : {21ULL, 22ULL, 23ULL}) {
        Rng rng(seed);
        PedGnnConfig cfg;
        cfg.n_frames = 3;
        cfg.hidden_channels = 2;
        cfg.cheb_order = 2;
        cfg.fc_dims = {5, 4, 2};
        cfg.dropout_rate = 0.0;
        PedGnnParams params = make_params(cfg);
        init_params(params, rng);
        const auto basis = basis_for(cfg);
        const SkeletonWindow w = random_window(3, rng);
        const Label label = seed % 2 ? Label::Cross : Label::NoCross;

        ForwardTape tape;
        forward(w, params, basis, Mode::Train, nullptr, &tape);
        PedGnnParams grads = make_params(cfg);
        backward(tape, label, params, basis, grads);

        const double step = 1e-5;
        const auto prefs = tensor_refs(params);
        const auto grefs = tensor_refs(grads);
        for (std::size_t i = 0; i < prefs.size(); ++i) {
            for (Eigen::Index k = 0; k < prefs[i].tensor->size(); ++k) {
                double& theta = prefs[i].tensor->data()[k];
                const double orig = theta;
                theta = orig + step;
                const double fp = loss(forward(w, params, basis), label);
                theta = orig - step;
                const double fm = loss(forward(w, params, basis), label);
                theta = orig;
                const double fd = (fp - fm) / (2.0 * step);
                const double analytic = grefs[i].tensor->data()[k];
                CHECK(std::abs(analytic - fd) / std::max(1.0, std::abs(analytic)) < 1e-5);
            }
        }
    }
}

TEST_CASE("prediction is invariant under positive affine transforms of raw input") {
    Rng rng(31);
    PedGnnConfig cfg;
    cfg.n_frames = 4;
    PedGnnParams params = make_params(cfg);
    init_params(params, rng);
    const auto basis = basis_for(cfg);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<RawSkeletonFrame> raws(4);
        for (auto& raw : raws) {
            for (auto& j : raw.joints) {
                j = {rng.uniform(0.0, 1600.0), rng.uniform(0.0, 600.0),
                     rng.uniform(0.0, 1.0)};
            }
        }
        const double a = rng.uniform(0.5, 2.0);
        const double b = rng.uniform(-30.0, 30.0);
        const double c = rng.uniform(0.5, 2.0);
        const double d = rng.uniform(-30.0, 30.0);

        SkeletonWindow w0, w1;
        for (const auto& raw : raws) {
            w0.frames.push_back(normalize_frame(raw));
            RawSkeletonFrame scaled = raw;
            for (auto& j : scaled.joints) {
                j.x = a * j.x + b;
                j.y = c * j.y + d;
            }
            w1.frames.push_back(normalize_frame(scaled));
        }
        const auto p0 = forward(w0, params, basis);
        const auto p1 = forward(w1, params, basis);
        CHECK(std::abs(p0.p_cross - p1.p_cross) < 1e-12);
    }
}

TEST_CASE("training on a single repeated sample drives its loss below 1e-3") {
    Rng rng(41);
    PedGnnConfig cfg;
    cfg.n_frames = 4;
    cfg.dropout_rate = 0.0;
    PedGnnParams params = make_params(cfg);
    init_params(params, rng);
    const auto basis = basis_for(cfg);
    const SkeletonWindow w = random_window(4, rng);

    OptimState optim = make_optim_state(params, 0.01);
    optim.weight_decay = 0.0;
    PedGnnParams grads = make_params(cfg);
    double last = 1e9;
    for (int step = 0; step < 200; ++step) {
        for (TensorRef ref : tensor_refs(grads)) ref.tensor->setZero();
        ForwardTape tape;
        forward(w, params, basis, Mode::Train, nullptr, &tape);
        last = backward(tape, Label::Cross, params, basis, grads);
        adamw_step(params, grads, optim);
    }
    CHECK(last < 1e-3);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
    Rng rng(51);
    PedGnnConfig cfg;
    cfg.n_frames = 6;
    cfg.fc_dims = {8, 4, 2};
    PedGnnParams params = make_params(cfg);
    init_params(params, rng);

    const std::string text = checkpoint_to_json(params);
    PedGnnParams back = checkpoint_from_json(text);
    CHECK(back.config.n_frames == 6);
    const auto a = tensor_refs(params);
    const auto b = tensor_refs(back);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].name == b[i].name);
        CHECK((*a[i].tensor - *b[i].tensor).cwiseAbs().maxCoeff() == 0.0);
    }
    // and the serialized form itself is stable
    CHECK(checkpoint_to_json(back) == text);
}

TEST_CASE("forward rejects a window that does not match N_F") {
    PedGnnConfig cfg;
    cfg.n_frames = 5;
    const PedGnnParams params = make_params(cfg);
    Rng rng(6);
    CHECK_THROWS_AS(forward(random_window(4, rng), params, basis_for(cfg)),
                    std::invalid_argument);
}
