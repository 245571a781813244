#include <benchmark/benchmark.h>

#include "pedgnn/eval.hpp"
#include "pedgnn/model.hpp"

using namespace pedgnn;

namespace {

SkeletonWindow random_window(int n_frames, Rng& rng) {
    SkeletonWindow w;
    w.frames.resize(static_cast<std::size_t>(n_frames));
    for (auto& frame : w.frames) {
        for (auto& j : frame.joints) {
            j = {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 1.0};
        }
    }
    return w;
}

PedGnnParams default_params(int n_frames) {
    PedGnnConfig cfg;
    cfg.n_frames = n_frames;
    PedGnnParams params = make_params(cfg);
    Rng rng(1);
    init_params(params, rng);
    return params;
}

} // namespace

static void BM_ChebConv(benchmark::State& state) {
    const auto basis =
        build_spectral_basis(build_topology(), static_cast<int>(state.range(0)));
    Rng rng(2);
    Eigen::MatrixXd x(kNumJoints, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    std::vector<Eigen::MatrixXd> w(basis.order(), Eigen::MatrixXd::Random(3, 8));
    for (auto _ : state) {
        benchmark::DoNotOptimize(cheb_conv(x, w, basis));
    }
}
BENCHMARK(BM_ChebConv)->Arg(1)->Arg(2)->Arg(3);

static void BM_GruStep(benchmark::State& state) {
    PedGnnConfig cfg;
    const auto basis = build_spectral_basis(build_topology(), cfg.cheb_order);
    GConvGruParams gru = make_gru_params(cfg.hidden_channels, cfg.cheb_order);
    Rng rng(3);
    init_gru_params(gru, rng);
    const Eigen::MatrixXd x = Eigen::MatrixXd::Random(kNumJoints, 3);
    const Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kNumJoints, cfg.hidden_channels);
    for (auto _ : state) {
        benchmark::DoNotOptimize(gru_step(x, h, gru, basis));
    }
}
BENCHMARK(BM_GruStep);

static void BM_Forward(benchmark::State& state) {
    const int n_frames = static_cast<int>(state.range(0));
    const auto params = default_params(n_frames);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    Rng rng(4);
    const SkeletonWindow w = random_window(n_frames, rng);
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(w, params, basis));
    }
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(16)->Arg(32);

static void BM_StreamPredictFrame(benchmark::State& state) {
    // steady-state per-frame cost of the sliding-window runtime
    const auto params = default_params(8);
    const auto basis = build_spectral_basis(build_topology(), params.config.cheb_order);
    Rng rng(5);
    ClipRecord clip;
    clip.clip_id = "bench";
    for (int f = 0; f < 64; ++f) {
        ClipFrame frame;
        frame.frame_index = f;
        PedestrianObservation obs;
        obs.pedestrian_id = 0;
        obs.label = Label::NoCross;
        for (auto& j : obs.joints) {
            j = {rng.uniform(0.0, 1600.0), rng.uniform(0.0, 600.0), 1.0};
        }
        frame.pedestrians.push_back(obs);
        clip.frames.push_back(frame);
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(stream_predict(clip, params, basis));
    }
    state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_StreamPredictFrame);

BENCHMARK_MAIN();
