#include "pedgnn/model.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pedgnn {

using nlohmann::json;

PedGnnParams make_params(const PedGnnConfig& config) {
    PedGnnParams p;
    p.config = config;
    p.gru = make_gru_params(config.hidden_channels, config.cheb_order);
    const int flat_dim = kNumJoints * config.hidden_channels;
    const int dims_in[3] = {flat_dim, config.fc_dims[0], config.fc_dims[1]};
    for (int i = 0; i < 3; ++i) {
        p.fc[static_cast<std::size_t>(i)].w =
            Eigen::MatrixXd::Zero(config.fc_dims[static_cast<std::size_t>(i)], dims_in[i]);
        p.fc[static_cast<std::size_t>(i)].b =
            Eigen::MatrixXd::Zero(config.fc_dims[static_cast<std::size_t>(i)], 1);
    }
    return p;
}

void init_params(PedGnnParams& params, Rng& rng) {
    init_gru_params(params.gru, rng);
    for (auto& layer : params.fc) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.w.cols()));
        for (Eigen::Index i = 0; i < layer.w.size(); ++i) {
            layer.w.data()[i] = rng.uniform(-bound, bound);
        }
        layer.b.setZero();
    }
}

std::vector<TensorRef> tensor_refs(PedGnnParams& params) {
    std::vector<TensorRef> refs = gru_tensor_refs(params.gru);
    for (std::size_t i = 0; i < params.fc.size(); ++i) {
        refs.push_back({"fc" + std::to_string(i + 1) + ".w", &params.fc[i].w});
        refs.push_back({"fc" + std::to_string(i + 1) + ".b", &params.fc[i].b});
    }
    return refs;
}

namespace {

std::vector<Eigen::MatrixXd> window_to_inputs(const SkeletonWindow& window) {
    std::vector<Eigen::MatrixXd> xs;
    xs.reserve(window.frames.size());
    for (const auto& frame : window.frames) {
        Eigen::MatrixXd x(kNumJoints, 3);
        for (int i = 0; i < kNumJoints; ++i) {
            const auto& j = frame.joints[static_cast<std::size_t>(i)];
            x(i, 0) = j.x;
            x(i, 1) = j.y;
            x(i, 2) = j.c;
        }
        xs.push_back(std::move(x));
    }
    return xs;
}

Eigen::VectorXd flatten_hidden(const Eigen::MatrixXd& h) {
    Eigen::VectorXd v(h.rows() * h.cols());
    for (Eigen::Index node = 0; node < h.rows(); ++node) {
        for (Eigen::Index c = 0; c < h.cols(); ++c) {
            v(node * h.cols() + c) = h(node, c);
        }
    }
    return v;
}

Eigen::Vector2d softmax2(const Eigen::Vector2d& logits) {
    const double m = logits.maxCoeff();
    const Eigen::Vector2d e = (logits.array() - m).exp();
    return e / e.sum();
}

} // namespace

Prediction forward(const SkeletonWindow& window, const PedGnnParams& params,
                   const SpectralBasis& basis, Mode mode, Rng* dropout_rng,
                   ForwardTape* tape) {
    const auto xs = window_to_inputs(window);
    if (static_cast<int>(xs.size()) != params.config.n_frames) {
        throw std::invalid_argument("forward: window length does not match config N_F");
    }
    std::vector<GruStepTape> gru_tapes;
    const Eigen::MatrixXd h_last = gru_forward_sequence(
        xs, params.gru, basis, tape ? &gru_tapes : nullptr);

    const double p_drop = params.config.dropout_rate;
    const bool use_dropout = mode == Mode::Train && p_drop > 0.0;
    if (use_dropout && dropout_rng == nullptr) {
        throw std::invalid_argument("forward: train mode with dropout needs an rng");
    }

    Eigen::VectorXd prev = flatten_hidden(h_last);
    std::array<Eigen::VectorXd, 3> block_in;
    std::array<Eigen::VectorXd, 3> masks;
    std::array<Eigen::VectorXd, 3> relu_outs;
    Eigen::VectorXd flat = prev;
    for (std::size_t i = 0; i < 3; ++i) {
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(prev.size());
        if (use_dropout) {
            const double keep_scale = 1.0 / (1.0 - p_drop);
            for (Eigen::Index k = 0; k < mask.size(); ++k) {
                mask(k) = dropout_rng->bernoulli(p_drop) ? 0.0 : keep_scale;
            }
        }
        const Eigen::VectorXd in = prev.cwiseProduct(mask);
        const Eigen::VectorXd act = in.cwiseMax(0.0);
        prev = params.fc[i].w * act + params.fc[i].b.col(0);
        if (tape) {
            block_in[i] = in;
            masks[i] = mask;
            relu_outs[i] = act;
        }
    }
    if (!prev.allFinite()) throw std::runtime_error("forward: non-finite logits");

    Prediction pred;
    pred.logits = Eigen::Vector2d(prev(0), prev(1));
    const Eigen::Vector2d p = softmax2(pred.logits);
    pred.p_cross = p(0);
    pred.p_nocross = p(1);

    if (tape) {
        tape->gru_tapes = std::move(gru_tapes);
        tape->flat = std::move(flat);
        tape->block_in = std::move(block_in);
        tape->mask = std::move(masks);
        tape->relu_out = std::move(relu_outs);
        tape->logits = pred.logits;
    }
    return pred;
}

double loss(const Prediction& pred, Label label) {
    const Eigen::Vector2d& l = pred.logits;
    const double m = l.maxCoeff();
    const double lse = m + std::log(std::exp(l(0) - m) + std::exp(l(1) - m));
    return lse - l(class_index(label));
}

double backward(const ForwardTape& tape, Label label, const PedGnnParams& params,
                const SpectralBasis& basis, PedGnnParams& grads) {
    Prediction pred;
    pred.logits = tape.logits;
    const double loss_value = loss(pred, label);

    Eigen::Vector2d dlogits = softmax2(tape.logits);
    dlogits(class_index(label)) -= 1.0;

    Eigen::VectorXd dprev = dlogits;
    for (std::size_t i = 3; i-- > 0;) {
        grads.fc[i].w.noalias() += dprev * tape.relu_out[i].transpose();
        grads.fc[i].b.col(0) += dprev;
        const Eigen::VectorXd da = params.fc[i].w.transpose() * dprev;
        Eigen::VectorXd din(da.size());
        for (Eigen::Index k = 0; k < da.size(); ++k) {
            din(k) = tape.block_in[i](k) > 0.0 ? da(k) : 0.0;
        }
        dprev = din.cwiseProduct(tape.mask[i]);
    }

    const int hidden = params.config.hidden_channels;
    Eigen::MatrixXd dh_last(kNumJoints, hidden);
    for (int node = 0; node < kNumJoints; ++node) {
        for (int c = 0; c < hidden; ++c) {
            dh_last(node, c) = dprev(node * hidden + c);
        }
    }
    gru_backward(tape.gru_tapes, dh_last, params.gru, basis, grads.gru);
    return loss_value;
}

ParamCount count_params(const PedGnnParams& params) {
    PedGnnParams copy = params;
    ParamCount out;
    for (const TensorRef& ref : tensor_refs(copy)) {
        out.count += ref.tensor->size();
    }
    out.bytes_at_f32 = out.count * 4;
    return out;
}

std::string checkpoint_to_json(const PedGnnParams& params) {
    PedGnnParams copy = params;
    json tensors = json::array();
    for (const TensorRef& ref : tensor_refs(copy)) {
        json data = json::array();
        const Eigen::MatrixXd& m = *ref.tensor;
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
        }
        tensors.push_back({{"name", ref.name},
                           {"shape", {m.rows(), m.cols()}},
                           {"data", std::move(data)}});
    }
    const auto& cfg = params.config;
    json j{{"format", "pedgnn-checkpoint"},
           {"version", 1},
           {"config",
            {{"n_frames", cfg.n_frames},
             {"hidden_channels", cfg.hidden_channels},
             {"cheb_order", cfg.cheb_order},
             {"fc_dims", cfg.fc_dims},
             {"dropout_rate", cfg.dropout_rate}}},
           {"tensors", std::move(tensors)}};
    return j.dump();
}

PedGnnParams checkpoint_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "pedgnn-checkpoint") {
        throw std::runtime_error("not a pedgnn checkpoint");
    }
    PedGnnConfig cfg;
    const json& jc = j.at("config");
    cfg.n_frames = jc.at("n_frames").get<int>();
    cfg.hidden_channels = jc.at("hidden_channels").get<int>();
    cfg.cheb_order = jc.at("cheb_order").get<int>();
    const auto dims = jc.at("fc_dims").get<std::vector<int>>();
    if (dims.size() != 3) throw std::runtime_error("checkpoint: fc_dims must have 3 entries");
    cfg.fc_dims = {dims[0], dims[1], dims[2]};
    cfg.dropout_rate = jc.at("dropout_rate").get<double>();

    PedGnnParams params = make_params(cfg);
    for (const TensorRef& ref : tensor_refs(params)) {
        bool found = false;
        for (const auto& jt : j.at("tensors")) {
            if (jt.at("name").get<std::string>() != ref.name) continue;
            const auto shape = jt.at("shape").get<std::vector<Eigen::Index>>();
            if (shape.size() != 2 || shape[0] != ref.tensor->rows() ||
                shape[1] != ref.tensor->cols()) {
                throw std::runtime_error("checkpoint: shape mismatch for " + ref.name);
            }
            const auto& data = jt.at("data");
            if (static_cast<Eigen::Index>(data.size()) != ref.tensor->size()) {
                throw std::runtime_error("checkpoint: data size mismatch for " + ref.name);
            }
            Eigen::Index idx = 0;
            for (Eigen::Index r = 0; r < ref.tensor->rows(); ++r) {
                for (Eigen::Index c = 0; c < ref.tensor->cols(); ++c) {
                    (*ref.tensor)(r, c) = data.at(static_cast<std::size_t>(idx++)).get<double>();
                }
            }
            found = true;
            break;
        }
        if (!found) throw std::runtime_error("checkpoint: missing tensor " + ref.name);
    }
    return params;
}

void save_checkpoint(const std::string& path, const PedGnnParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << checkpoint_to_json(params) << '\n';
}

PedGnnParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

} // namespace pedgnn
