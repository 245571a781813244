#pragma once

#include "pedgnn/rng.hpp"
#include "pedgnn/skeleton.hpp"

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace pedgnn {

// Symmetric normalized Laplacian of the fixed topology and the Chebyshev
// polynomials T_0..T_{K-1} of the scaled Laplacian L~ = L - I (lambda_max = 2).
struct SpectralBasis {
    Eigen::MatrixXd laplacian;       // 19x19
    std::vector<Eigen::MatrixXd> cheb; // K matrices, 19x19
    int order() const { return static_cast<int>(cheb.size()); }
};

SpectralBasis build_spectral_basis(const SkeletonTopology& topo, int K);

// Per-gate Chebyshev filter weights: K input filters (C_in x H), K hidden
// filters (H x H), and one bias row (1 x H) applied after summing both paths.
struct GateWeights {
    std::vector<Eigen::MatrixXd> w_x;
    std::vector<Eigen::MatrixXd> w_h;
    Eigen::MatrixXd b;
};

struct GConvGruParams {
    GateWeights update; // z
    GateWeights reset;  // r
    GateWeights cand;   // h~
    int input_channels = 3;
    int hidden_channels = 8;
    int cheb_order = 2;
};

GConvGruParams make_gru_params(int hidden_channels, int cheb_order,
                               int input_channels = 3);
// Fan-in uniform init: U(-1/sqrt(K*C_in*H), +1/sqrt(K*C_in*H)) per tensor.
void init_gru_params(GConvGruParams& params, Rng& rng);

struct TensorRef {
    std::string name;
    Eigen::MatrixXd* tensor;
};
std::vector<TensorRef> gru_tensor_refs(GConvGruParams& params);

// out = sum_k T_k * x * W[k]; node-mixing by T_k, channel-mixing by W[k].
Eigen::MatrixXd cheb_conv(const Eigen::MatrixXd& x,
                          const std::vector<Eigen::MatrixXd>& w,
                          const SpectralBasis& basis);

// Recorded activations of one gru_step, for backward.
struct GruStepTape {
    Eigen::MatrixXd x;      // 19 x C_in
    Eigen::MatrixXd h_prev; // 19 x H
    Eigen::MatrixXd z;
    Eigen::MatrixXd r;
    Eigen::MatrixXd h_cand;
    Eigen::MatrixXd rh; // r .* h_prev
};

// z = sig(conv_x(x) + conv_h(h) + b_z), r likewise,
// h~ = tanh(conv_x(x) + conv_h(r .* h) + b_c), h = z .* h + (1 - z) .* h~.
Eigen::MatrixXd gru_step(const Eigen::MatrixXd& x_t,
                         const Eigen::MatrixXd& h_prev,
                         const GConvGruParams& params,
                         const SpectralBasis& basis,
                         GruStepTape* tape = nullptr);

// Forward over a full window from h_0 = 0, recording one tape per step.
Eigen::MatrixXd gru_forward_sequence(const std::vector<Eigen::MatrixXd>& xs,
                                     const GConvGruParams& params,
                                     const SpectralBasis& basis,
                                     std::vector<GruStepTape>* tapes = nullptr);

// Backward through the recorded steps. Accumulates into `grads` (same shapes
// as params) and optionally returns dL/dx per step.
void gru_backward(const std::vector<GruStepTape>& tapes,
                  const Eigen::MatrixXd& dh_last,
                  const GConvGruParams& params,
                  const SpectralBasis& basis,
                  GConvGruParams& grads,
                  std::vector<Eigen::MatrixXd>* dxs = nullptr);

} // namespace pedgnn
