#include "pedgnn/gconv.hpp"

#include <cmath>
#include <stdexcept>

namespace pedgnn {

namespace {

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& m) {
    return 1.0 / (1.0 + (-m.array()).exp());
}

void check_finite(const Eigen::MatrixXd& m, const char* what) {
    if (!m.allFinite()) {
        throw std::runtime_error(std::string("non-finite values in ") + what);
    }
}

} // namespace

SpectralBasis build_spectral_basis(const SkeletonTopology& topo, int K) {
    if (K < 1) throw std::invalid_argument("Chebyshev order must be >= 1");
    const int n = kNumJoints;
    Eigen::VectorXd dinv_sqrt(n);
    for (int i = 0; i < n; ++i) {
        const double d = topo.degree(i);
        dinv_sqrt(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }
    SpectralBasis basis;
    basis.laplacian = Eigen::MatrixXd::Identity(n, n) -
                      dinv_sqrt.asDiagonal() * topo.adjacency * dinv_sqrt.asDiagonal();
    const Eigen::MatrixXd scaled =
        basis.laplacian - Eigen::MatrixXd::Identity(n, n);
    basis.cheb.reserve(static_cast<std::size_t>(K));
    basis.cheb.push_back(Eigen::MatrixXd::Identity(n, n));
    if (K >= 2) basis.cheb.push_back(scaled);
    for (int k = 2; k < K; ++k) {
        basis.cheb.push_back(2.0 * scaled * basis.cheb[static_cast<std::size_t>(k - 1)] -
                             basis.cheb[static_cast<std::size_t>(k - 2)]);
    }
    return basis;
}

GConvGruParams make_gru_params(int hidden_channels, int cheb_order,
                               int input_channels) {
    GConvGruParams p;
    p.input_channels = input_channels;
    p.hidden_channels = hidden_channels;
    p.cheb_order = cheb_order;
    for (GateWeights* g : {&p.update, &p.reset, &p.cand}) {
        g->w_x.assign(static_cast<std::size_t>(cheb_order),
                      Eigen::MatrixXd::Zero(input_channels, hidden_channels));
        g->w_h.assign(static_cast<std::size_t>(cheb_order),
                      Eigen::MatrixXd::Zero(hidden_channels, hidden_channels));
        g->b = Eigen::MatrixXd::Zero(1, hidden_channels);
    }
    return p;
}

void init_gru_params(GConvGruParams& params, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(
        params.cheb_order * params.input_channels * params.hidden_channels));
    for (TensorRef ref : gru_tensor_refs(params)) {
        for (Eigen::Index i = 0; i < ref.tensor->size(); ++i) {
            ref.tensor->data()[i] = rng.uniform(-bound, bound);
        }
    }
}

std::vector<TensorRef> gru_tensor_refs(GConvGruParams& params) {
    std::vector<TensorRef> refs;
    const std::pair<const char*, GateWeights*> gates[] = {
        {"update", &params.update}, {"reset", &params.reset}, {"cand", &params.cand}};
    for (auto [name, gate] : gates) {
        for (std::size_t k = 0; k < gate->w_x.size(); ++k) {
            refs.push_back({std::string("gru.") + name + ".w_x.k" + std::to_string(k),
                            &gate->w_x[k]});
        }
        for (std::size_t k = 0; k < gate->w_h.size(); ++k) {
            refs.push_back({std::string("gru.") + name + ".w_h.k" + std::to_string(k),
                            &gate->w_h[k]});
        }
        refs.push_back({std::string("gru.") + name + ".b", &gate->b});
    }
    return refs;
}

Eigen::MatrixXd cheb_conv(const Eigen::MatrixXd& x,
                          const std::vector<Eigen::MatrixXd>& w,
                          const SpectralBasis& basis) {
    if (w.size() != basis.cheb.size()) {
        throw std::invalid_argument("cheb_conv: weight count does not match basis order");
    }
    if (x.rows() != kNumJoints || (!w.empty() && x.cols() != w[0].rows())) {
        throw std::invalid_argument("cheb_conv: input shape mismatch");
    }
    Eigen::MatrixXd out = x * w[0]; // T_0 = I
    for (std::size_t k = 1; k < w.size(); ++k) {
        out.noalias() += basis.cheb[k] * x * w[k];
    }
    return out;
}

Eigen::MatrixXd gru_step(const Eigen::MatrixXd& x_t,
                         const Eigen::MatrixXd& h_prev,
                         const GConvGruParams& params,
                         const SpectralBasis& basis,
                         GruStepTape* tape) {
    if (h_prev.rows() != kNumJoints || h_prev.cols() != params.hidden_channels) {
        throw std::invalid_argument("gru_step: hidden state shape mismatch");
    }
    const auto broadcast = [](const Eigen::MatrixXd& b) {
        return b.replicate(kNumJoints, 1);
    };
    const Eigen::MatrixXd z =
        sigmoid(cheb_conv(x_t, params.update.w_x, basis) +
                cheb_conv(h_prev, params.update.w_h, basis) + broadcast(params.update.b));
    const Eigen::MatrixXd r =
        sigmoid(cheb_conv(x_t, params.reset.w_x, basis) +
                cheb_conv(h_prev, params.reset.w_h, basis) + broadcast(params.reset.b));
    const Eigen::MatrixXd rh = r.cwiseProduct(h_prev);
    const Eigen::MatrixXd h_cand =
        (cheb_conv(x_t, params.cand.w_x, basis) + cheb_conv(rh, params.cand.w_h, basis) +
         broadcast(params.cand.b))
            .array()
            .tanh();
    Eigen::MatrixXd h =
        z.cwiseProduct(h_prev) + (1.0 - z.array()).matrix().cwiseProduct(h_cand);
    check_finite(h, "gru_step output");
    if (tape) {
        tape->x = x_t;
        tape->h_prev = h_prev;
        tape->z = z;
        tape->r = r;
        tape->h_cand = h_cand;
        tape->rh = rh;
    }
    return h;
}

Eigen::MatrixXd gru_forward_sequence(const std::vector<Eigen::MatrixXd>& xs,
                                     const GConvGruParams& params,
                                     const SpectralBasis& basis,
                                     std::vector<GruStepTape>* tapes) {
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(kNumJoints, params.hidden_channels);
    if (tapes) {
        tapes->clear();
        tapes->resize(xs.size());
    }
    for (std::size_t t = 0; t < xs.size(); ++t) {
        h = gru_step(xs[t], h, params, basis, tapes ? &(*tapes)[t] : nullptr);
    }
    return h;
}

namespace {

// Gradient of one cheb_conv: given d(out), accumulate dW[k] += in^T T_k dout
// and return d(in) = sum_k T_k dout W[k]^T (T_k symmetric).
Eigen::MatrixXd cheb_conv_backward(const Eigen::MatrixXd& in,
                                   const Eigen::MatrixXd& dout,
                                   const std::vector<Eigen::MatrixXd>& w,
                                   std::vector<Eigen::MatrixXd>& dw,
                                   const SpectralBasis& basis) {
    Eigen::MatrixXd din = Eigen::MatrixXd::Zero(in.rows(), in.cols());
    for (std::size_t k = 0; k < w.size(); ++k) {
        const Eigen::MatrixXd td =
            k == 0 ? dout : Eigen::MatrixXd(basis.cheb[k] * dout);
        dw[k].noalias() += in.transpose() * td;
        din.noalias() += td * w[k].transpose();
    }
    return din;
}

} // namespace

void gru_backward(const std::vector<GruStepTape>& tapes,
                  const Eigen::MatrixXd& dh_last,
                  const GConvGruParams& params,
                  const SpectralBasis& basis,
                  GConvGruParams& grads,
                  std::vector<Eigen::MatrixXd>* dxs) {
    if (tapes.empty()) throw std::invalid_argument("gru_backward: empty tape");
    if (dxs) dxs->assign(tapes.size(), Eigen::MatrixXd());

    Eigen::MatrixXd dh = dh_last;
    for (std::size_t ti = tapes.size(); ti-- > 0;) {
        const GruStepTape& s = tapes[ti];
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(s.x.rows(), s.x.cols());
        Eigen::MatrixXd dh_prev = dh.cwiseProduct(s.z);

        const Eigen::MatrixXd dz = dh.cwiseProduct(s.h_prev - s.h_cand);
        const Eigen::MatrixXd dh_cand =
            dh.cwiseProduct((1.0 - s.z.array()).matrix());

        // candidate gate, through tanh
        const Eigen::MatrixXd da_c =
            dh_cand.cwiseProduct((1.0 - s.h_cand.array().square()).matrix());
        dx += cheb_conv_backward(s.x, da_c, params.cand.w_x, grads.cand.w_x, basis);
        const Eigen::MatrixXd drh =
            cheb_conv_backward(s.rh, da_c, params.cand.w_h, grads.cand.w_h, basis);
        grads.cand.b += da_c.colwise().sum();
        const Eigen::MatrixXd dr = drh.cwiseProduct(s.h_prev);
        dh_prev += drh.cwiseProduct(s.r);

        // reset gate, through sigmoid
        const Eigen::MatrixXd da_r =
            dr.cwiseProduct(s.r.cwiseProduct((1.0 - s.r.array()).matrix()));
        dx += cheb_conv_backward(s.x, da_r, params.reset.w_x, grads.reset.w_x, basis);
        dh_prev +=
            cheb_conv_backward(s.h_prev, da_r, params.reset.w_h, grads.reset.w_h, basis);
        grads.reset.b += da_r.colwise().sum();

        // update gate, through sigmoid
        const Eigen::MatrixXd da_z =
            dz.cwiseProduct(s.z.cwiseProduct((1.0 - s.z.array()).matrix()));
        dx += cheb_conv_backward(s.x, da_z, params.update.w_x, grads.update.w_x, basis);
        dh_prev +=
            cheb_conv_backward(s.h_prev, da_z, params.update.w_h, grads.update.w_h, basis);
        grads.update.b += da_z.colwise().sum();

        if (dxs) (*dxs)[ti] = dx;
        dh = dh_prev;
    }
}

} // namespace pedgnn
