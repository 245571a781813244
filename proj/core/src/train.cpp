#include "pedgnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace pedgnn {

OptimState make_optim_state(PedGnnParams& params, double lr) {
    OptimState state;
    state.lr = lr;
    for (const TensorRef& ref : tensor_refs(params)) {
        state.m.push_back(Eigen::MatrixXd::Zero(ref.tensor->rows(), ref.tensor->cols()));
        state.v.push_back(Eigen::MatrixXd::Zero(ref.tensor->rows(), ref.tensor->cols()));
    }
    return state;
}

void adamw_step(PedGnnParams& params, PedGnnParams& grads, OptimState& state) {
    const auto prefs = tensor_refs(params);
    const auto grefs = tensor_refs(grads);
    if (prefs.size() != grefs.size() || prefs.size() != state.m.size()) {
        throw std::invalid_argument("adamw_step: shape mismatch");
    }
    for (const TensorRef& g : grefs) {
        if (!g.tensor->allFinite()) {
            throw std::runtime_error("adamw_step: non-finite gradient in " + g.name);
        }
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < prefs.size(); ++i) {
        Eigen::MatrixXd& theta = *prefs[i].tensor;
        const Eigen::MatrixXd& grad = *grefs[i].tensor;
        // decoupled weight decay, independent of the moment update
        theta *= (1.0 - state.lr * state.weight_decay);
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grad;
        state.v[i] = state.beta2 * state.v[i] +
                     (1.0 - state.beta2) * grad.cwiseProduct(grad);
        const Eigen::MatrixXd m_hat = state.m[i] / bc1;
        const Eigen::MatrixXd v_hat = state.v[i] / bc2;
        theta.array() -= state.lr * m_hat.array() / (v_hat.array().sqrt() + state.eps);
    }
}

WindowedDataset windowize_clips(const std::string& name,
                                const std::vector<ClipRecord>& clips,
                                int n_frames) {
    WindowedDataset ds;
    ds.name = name;

    struct TrackState {
        std::vector<NormalizedSkeletonFrame> frames;
        std::vector<std::optional<Label>> labels;
        int last_frame_index = -2;
    };

    for (const auto& clip : clips) {
        std::map<int, TrackState> open;
        const auto flush = [&](TrackState& t) {
            if (t.frames.empty()) return;
            const int track_idx = static_cast<int>(ds.tracks.size());
            for (int start = 0;
                 start + n_frames <= static_cast<int>(t.frames.size()); ++start) {
                const auto& last_label =
                    t.labels[static_cast<std::size_t>(start + n_frames - 1)];
                if (!last_label) continue;
                ds.windows.push_back({track_idx, start, *last_label});
            }
            ds.tracks.push_back(std::move(t.frames));
            t = TrackState{};
        };
        for (const auto& frame : clip.frames) {
            for (const auto& obs : frame.pedestrians) {
                TrackState& t = open[obs.pedestrian_id];
                if (frame.frame_index != t.last_frame_index + 1) flush(t);
                t.last_frame_index = frame.frame_index;
                RawSkeletonFrame raw;
                raw.joints = obs.joints;
                raw.frame_index = frame.frame_index;
                raw.pedestrian_id = obs.pedestrian_id;
                t.frames.push_back(normalize_frame(raw));
                t.labels.push_back(obs.label);
            }
        }
        for (auto& [id, t] : open) flush(t);
    }
    return ds;
}

SkeletonWindow make_window(const WindowedDataset& ds, const WindowRef& ref,
                           int n_frames) {
    SkeletonWindow w;
    const auto& track = ds.tracks[static_cast<std::size_t>(ref.track)];
    w.frames.assign(track.begin() + ref.start, track.begin() + ref.start + n_frames);
    return w;
}

TrainSample make_sample(const WindowedDataset& ds, const WindowRef& ref,
                        int n_frames) {
    return {make_window(ds, ref, n_frames), ref.label, ds.name};
}

std::vector<std::vector<BatchItem>> make_batches(
    const std::vector<WindowedDataset>& datasets, int batch_size, Rng& rng) {
    if (datasets.empty()) throw std::invalid_argument("make_batches: no datasets");
    std::size_t total = 0;
    for (const auto& ds : datasets) {
        if (ds.windows.empty()) {
            throw std::invalid_argument("make_batches: empty dataset " + ds.name);
        }
        total += ds.windows.size();
    }
    std::vector<std::vector<BatchItem>> batches;
    if (datasets.size() == 1) {
        std::vector<int> order(datasets[0].windows.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng.engine());
        for (std::size_t pos = 0; pos < order.size(); pos += static_cast<std::size_t>(batch_size)) {
            std::vector<BatchItem> batch;
            for (std::size_t i = pos;
                 i < std::min(order.size(), pos + static_cast<std::size_t>(batch_size)); ++i) {
                batch.emplace_back(0, order[i]);
            }
            batches.push_back(std::move(batch));
        }
        return batches;
    }
    // Equal expected proportion per source: pick a dataset uniformly, then a
    // window uniformly within it, with replacement.
    const std::size_t n_batches =
        (total + static_cast<std::size_t>(batch_size) - 1) / static_cast<std::size_t>(batch_size);
    for (std::size_t b = 0; b < n_batches; ++b) {
        std::vector<BatchItem> batch;
        batch.reserve(static_cast<std::size_t>(batch_size));
        for (int i = 0; i < batch_size; ++i) {
            const int d = static_cast<int>(rng.uniform_index(datasets.size()));
            const int w = static_cast<int>(
                rng.uniform_index(datasets[static_cast<std::size_t>(d)].windows.size()));
            batch.emplace_back(d, w);
        }
        batches.push_back(std::move(batch));
    }
    return batches;
}

TrainResult train_one(const PedGnnConfig& config, double lr,
                      const std::vector<std::pair<std::string, std::vector<ClipRecord>>>&
                          train_datasets,
                      const std::vector<ClipRecord>& val_clips,
                      const TrainOptions& options) {
    if (val_clips.empty()) {
        throw std::invalid_argument("train_one: empty validation set");
    }
    std::vector<WindowedDataset> datasets;
    for (const auto& [name, clips] : train_datasets) {
        datasets.push_back(windowize_clips(name, clips, config.n_frames));
        if (datasets.back().windows.empty()) {
            throw std::invalid_argument("train_one: dataset " + name +
                                        " has no labeled windows at N_F=" +
                                        std::to_string(config.n_frames));
        }
    }

    Rng root(options.seed);
    Rng init_rng = root.child("init");
    Rng dropout_rng = root.child("dropout");
    Rng sampler_rng = root.child("sampler");

    PedGnnParams params = make_params(config);
    init_params(params, init_rng);
    OptimState optim = make_optim_state(params, lr);

    const SkeletonTopology topo = build_topology();
    const SpectralBasis basis = build_spectral_basis(topo, config.cheb_order);

    TrainResult result;
    result.best_params = params;

    PedGnnParams grads = make_params(config);
    const auto zero_grads = [&grads] {
        for (const TensorRef& ref : tensor_refs(grads)) ref.tensor->setZero();
    };

    for (int epoch = 0; epoch < options.max_epochs; ++epoch) {
        try {
            const auto batches = make_batches(datasets, options.batch_size, sampler_rng);
            for (const auto& batch : batches) {
                zero_grads();
                for (const auto& [d, w] : batch) {
                    const auto& ds = datasets[static_cast<std::size_t>(d)];
                    const SkeletonWindow window =
                        make_window(ds, ds.windows[static_cast<std::size_t>(w)], config.n_frames);
                    ForwardTape tape;
                    forward(window, params, basis, Mode::Train, &dropout_rng, &tape);
                    backward(tape, ds.windows[static_cast<std::size_t>(w)].label,
                             params, basis, grads);
                }
                const double scale = 1.0 / static_cast<double>(batch.size());
                for (const TensorRef& ref : tensor_refs(grads)) *ref.tensor *= scale;
                adamw_step(params, grads, optim);
            }
        } catch (const std::runtime_error& e) {
            result.failed = true;
            result.error = e.what();
            return result;
        }

        const Metrics val = evaluate_clips(val_clips, params, basis);
        result.epoch_f1.push_back(val.f1);
        if (val.f1 > result.best_f1) {
            result.best_f1 = val.f1;
            result.best_epoch = epoch;
            result.best_params = params;
        }
        if (options.stop_at_f1 && result.best_f1 >= *options.stop_at_f1) break;
    }
    return result;
}

SweepResult sweep(const PedGnnConfig& base_config, const SweepPlan& plan,
                  const std::vector<std::pair<std::string, std::vector<ClipRecord>>>&
                      train_datasets,
                  const std::vector<ClipRecord>& val_clips) {
    if (plan.n_frames_grid.empty() || plan.lr_grid.empty()) {
        throw std::invalid_argument("sweep: empty grid");
    }
    SweepResult result;
    double best = -1.0;
    bool any_ok = false;
    for (int n_frames : plan.n_frames_grid) {
        for (double lr : plan.lr_grid) {
            PedGnnConfig config = base_config;
            config.n_frames = n_frames;
            TrainOptions options;
            options.max_epochs = plan.max_epochs;
            options.batch_size = plan.batch_size;
            options.seed = splitmix64(plan.seed ^ splitmix64(
                static_cast<std::uint64_t>(n_frames) * 1000003ULL +
                static_cast<std::uint64_t>(lr * 1e9)));
            TrainResult run;
            try {
                run = train_one(config, lr, train_datasets, val_clips, options);
            } catch (const std::exception& e) {
                run.failed = true;
                run.error = e.what();
            }
            SweepRow row{n_frames, lr, run.best_f1, run.best_epoch, run.failed};
            // A failed run may still carry a usable partial best.
            if (!run.failed || run.best_epoch >= 0) {
                if (run.best_f1 > best) {
                    best = run.best_f1;
                    result.best_params = run.best_params;
                    result.best_row = result.rows.size();
                }
                any_ok = true;
            }
            result.rows.push_back(row);
        }
    }
    if (!any_ok) throw std::runtime_error("sweep: every run failed");
    return result;
}

std::string format_sweep_table(const SweepResult& result) {
    std::ostringstream out;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%5s %8s %10s %10s %7s\n", "N_F", "lr",
                  "val_F1", "best_epoch", "status");
    out << buf;
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const SweepRow& r = result.rows[i];
        std::snprintf(buf, sizeof(buf), "%5d %8.4f %10.4f %10d %7s%s\n", r.n_frames,
                      r.lr, r.best_f1, r.best_epoch, r.failed ? "failed" : "ok",
                      i == result.best_row ? "  <- best" : "");
        out << buf;
    }
    return out.str();
}

} // namespace pedgnn
