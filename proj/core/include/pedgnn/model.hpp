#pragma once

#include "pedgnn/clipio.hpp"
#include "pedgnn/gconv.hpp"
#include "pedgnn/rng.hpp"
#include "pedgnn/skeleton.hpp"

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace pedgnn {

struct PedGnnConfig {
    int n_frames = 8;                  // N_F, window length
    int hidden_channels = 8;           // H
    int cheb_order = 2;                // K
    std::array<int, 3> fc_dims = {32, 16, 2};
    double dropout_rate = 0.5;
};

struct FcLayer {
    Eigen::MatrixXd w; // out x in
    Eigen::MatrixXd b; // out x 1
};

struct PedGnnParams {
    PedGnnConfig config;
    GConvGruParams gru;
    std::array<FcLayer, 3> fc;
};

PedGnnParams make_params(const PedGnnConfig& config);
void init_params(PedGnnParams& params, Rng& rng);
std::vector<TensorRef> tensor_refs(PedGnnParams& params);

struct Prediction {
    double p_cross = 0.5;
    double p_nocross = 0.5;
    Eigen::Vector2d logits = Eigen::Vector2d::Zero();
};

// Class index 0 is C (cross), 1 is NC.
inline int class_index(Label l) { return l == Label::Cross ? 0 : 1; }

enum class Mode { Infer, Train };

struct ForwardTape {
    std::vector<GruStepTape> gru_tapes;
    Eigen::VectorXd flat;                    // flatten(h_T), pre-dropout
    std::array<Eigen::VectorXd, 3> block_in; // post-dropout block inputs
    std::array<Eigen::VectorXd, 3> mask;     // inverted dropout masks
    std::array<Eigen::VectorXd, 3> relu_out;
    Eigen::Vector2d logits;
};

// GConvGRU over the window from h_0 = 0, flatten of h_T, then three
// (ReLU + FC) blocks and a softmax. Dropout (inverted scaling) is applied to
// each block's input in train mode only.
Prediction forward(const SkeletonWindow& window, const PedGnnParams& params,
                   const SpectralBasis& basis, Mode mode = Mode::Infer,
                   Rng* dropout_rng = nullptr, ForwardTape* tape = nullptr);

// Cross-entropy on the 2-class softmax, computed from logits via log-sum-exp.
double loss(const Prediction& pred, Label label);

// Backpropagates loss(forward(...), label) through the recorded tape,
// accumulating into `grads` (same structure as params). Returns the loss.
double backward(const ForwardTape& tape, Label label, const PedGnnParams& params,
                const SpectralBasis& basis, PedGnnParams& grads);

struct ParamCount {
    long long count = 0;
    long long bytes_at_f32 = 0;
};
ParamCount count_params(const PedGnnParams& params);

// Self-sufficient JSON checkpoint: config header + every tensor by canonical
// name, shape, and row-major values. Round-trips bit-exactly.
std::string checkpoint_to_json(const PedGnnParams& params);
PedGnnParams checkpoint_from_json(const std::string& text);
void save_checkpoint(const std::string& path, const PedGnnParams& params);
PedGnnParams load_checkpoint(const std::string& path);

} // namespace pedgnn
