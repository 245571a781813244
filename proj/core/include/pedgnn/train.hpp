#pragma once

#include "pedgnn/clipio.hpp"
#include "pedgnn/eval.hpp"
#include "pedgnn/model.hpp"
#include "pedgnn/rng.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pedgnn {

// AdamW with decoupled weight decay. Defaults follow the usual library
// defaults; only the learning rate is swept.
struct OptimState {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
    long long t = 0;
    std::vector<Eigen::MatrixXd> m;
    std::vector<Eigen::MatrixXd> v;
};

OptimState make_optim_state(PedGnnParams& params, double lr);
void adamw_step(PedGnnParams& params, PedGnnParams& grads, OptimState& state);

struct TrainSample {
    SkeletonWindow window;
    Label label = Label::NoCross;
    std::string source_dataset;
};

// Windows are stored as (track, start) references into the normalized
// tracks, so step-1 overlapping windows do not duplicate frame data.
struct WindowRef {
    int track = 0;
    int start = 0;
    Label label = Label::NoCross;
};

struct WindowedDataset {
    std::string name;
    std::vector<std::vector<NormalizedSkeletonFrame>> tracks;
    std::vector<WindowRef> windows;
};

// Step-1 sliding windows per pedestrian track; a frame-index gap splits the
// track; the window label is the last frame's label and windows whose last
// frame is unlabeled are skipped.
WindowedDataset windowize_clips(const std::string& name,
                                const std::vector<ClipRecord>& clips,
                                int n_frames);

SkeletonWindow make_window(const WindowedDataset& ds, const WindowRef& ref,
                           int n_frames);
TrainSample make_sample(const WindowedDataset& ds, const WindowRef& ref,
                        int n_frames);

using BatchItem = std::pair<int, int>; // (dataset index, window index)

// One epoch of batches. A single dataset is shuffled and chunked without
// replacement; multiple datasets are sampled with replacement at equal
// expected proportion per source, ceil(total / batch_size) batches.
std::vector<std::vector<BatchItem>> make_batches(
    const std::vector<WindowedDataset>& datasets, int batch_size, Rng& rng);

struct TrainOptions {
    int max_epochs = 100; // M_E
    int batch_size = 500;
    std::uint64_t seed = 0;
    std::optional<double> stop_at_f1; // optional early stop once val F1 reaches this
};

struct TrainResult {
    PedGnnParams best_params;
    double best_f1 = -1.0;
    int best_epoch = -1; // 0-based; -1 if no epoch completed
    bool failed = false;
    std::string error;
    std::vector<double> epoch_f1;
};

// Trains one (N_F, lr) point: up to max_epochs epochs, validation F1 after
// each epoch (sliding window, step 1), best-F1 snapshot retained with ties
// broken by earlier epoch. A numeric fault marks the run failed and returns
// the partial best.
TrainResult train_one(const PedGnnConfig& config, double lr,
                      const std::vector<std::pair<std::string, std::vector<ClipRecord>>>&
                          train_datasets,
                      const std::vector<ClipRecord>& val_clips,
                      const TrainOptions& options);

struct SweepPlan {
    std::vector<int> n_frames_grid;  // subset of {4,6,...,32}
    std::vector<double> lr_grid;     // subset of {0.001, 0.005, 0.0002, 0.0005}
    int max_epochs = 100;
    int batch_size = 500;
    std::uint64_t seed = 0;
};

struct SweepRow {
    int n_frames = 0;
    double lr = 0.0;
    double best_f1 = -1.0;
    int best_epoch = -1;
    bool failed = false;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    PedGnnParams best_params;
    std::size_t best_row = 0;
};

// Trains every (N_F, lr) pair and selects the argmax validation F1. Failed
// runs are logged in their row and skipped for selection; if every run
// fails the sweep throws.
SweepResult sweep(const PedGnnConfig& base_config, const SweepPlan& plan,
                  const std::vector<std::pair<std::string, std::vector<ClipRecord>>>&
                      train_datasets,
                  const std::vector<ClipRecord>& val_clips);

std::string format_sweep_table(const SweepResult& result);

} // namespace pedgnn
