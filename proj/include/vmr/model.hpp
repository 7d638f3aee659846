#pragma once

#include <cstddef>
#include <vector>

#include "vmr/graph.hpp"
#include "vmr/heads.hpp"
#include "vmr/lstm.hpp"
#include "vmr/params.hpp"
#include "vmr/rng.hpp"

namespace vmr {

struct ModelDims {
    std::size_t d_in = 16;    // input feature width
    std::size_t t = 40;       // common clip length after resampling
    std::size_t d_hidden = 16;  // LSTM hidden size d
    std::size_t d_proj = 16;    // projection output d1
    std::size_t d_out = 16;     // graph convolution output d1_out
};

// All trainable weights. Three disjoint optimizer groups cover them:
//   triplet   — lstm, gcn, score_head
//   regression — reg_head
//   sparsity  — proj
struct ModelParameters {
    ModelDims dims;
    LstmParameters lstm;
    GcnParameters gcn;
    MlpParameters score_head;
    MlpParameters reg_head;
    ProjectionParameters proj;
};

inline ModelParameters make_model(const ModelDims& dims) {
    ModelParameters m;
    m.dims = dims;
    m.lstm = make_lstm(dims.d_in, dims.d_hidden);
    m.gcn.w = Matrix(dims.d_hidden, dims.d_out);
    m.score_head = make_mlp({dims.d_out, dims.d_out, 1}, "tanh");
    m.reg_head = make_mlp({dims.d_out, dims.d_out, 2}, "linear");
    m.proj = make_projection(dims.d_proj, dims.d_hidden);
    return m;
}

inline ModelParameters init_model(const ModelDims& dims, SeededRng& rng) {
    ModelParameters m;
    m.dims = dims;
    SeededRng lstm_rng = rng.split("lstm");
    SeededRng gcn_rng = rng.split("gcn");
    SeededRng score_rng = rng.split("score");
    SeededRng reg_rng = rng.split("reg");
    SeededRng proj_rng = rng.split("proj");
    m.lstm = init_lstm(dims.d_in, dims.d_hidden, lstm_rng);
    m.gcn.w = Matrix(dims.d_hidden, dims.d_out);
    const double r = 1.0 / std::sqrt(static_cast<double>(dims.d_hidden));
    for (std::size_t k = 0; k < m.gcn.w.size(); ++k) m.gcn.w.data()[k] = gcn_rng.uniform(-r, r);
    m.score_head = init_mlp({dims.d_out, dims.d_out, 1}, "tanh", score_rng);
    m.reg_head = init_mlp({dims.d_out, dims.d_out, 2}, "linear", reg_rng);
    // Zero last layer: offsets start at (0, 0), so refinement begins as the
    // identity and the head walks toward the targets from there.
    m.reg_head.layers.back().w.fill(0.0);
    m.reg_head.layers.back().b.fill(0.0);
    m.proj = init_projection(dims.d_proj, dims.d_hidden, proj_rng);
    return m;
}

inline ModelParameters zeros_like(const ModelParameters& m) {
    ModelParameters z = make_model(m.dims);
    z.score_head.output_activation = m.score_head.output_activation;
    z.reg_head.output_activation = m.reg_head.output_activation;
    return z;
}

namespace detail {

inline void append_lstm(std::vector<ParamRef>& out, LstmParameters& p) {
    out.push_back({"lstm.w_i", &p.w_i}); out.push_back({"lstm.w_f", &p.w_f});
    out.push_back({"lstm.w_g", &p.w_g}); out.push_back({"lstm.w_o", &p.w_o});
    out.push_back({"lstm.u_i", &p.u_i}); out.push_back({"lstm.u_f", &p.u_f});
    out.push_back({"lstm.u_g", &p.u_g}); out.push_back({"lstm.u_o", &p.u_o});
    out.push_back({"lstm.b_i", &p.b_i}); out.push_back({"lstm.b_f", &p.b_f});
    out.push_back({"lstm.b_g", &p.b_g}); out.push_back({"lstm.b_o", &p.b_o});
}

inline void append_mlp(std::vector<ParamRef>& out, const std::string& prefix,
                       MlpParameters& p) {
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        out.push_back({prefix + ".w" + std::to_string(l), &p.layers[l].w});
        out.push_back({prefix + ".b" + std::to_string(l), &p.layers[l].b});
    }
}

}  // namespace detail

// Optimized against the triplet loss: everything except the regression head
// and the adjacency projection.
inline std::vector<ParamRef> group_tri(ModelParameters& m) {
    std::vector<ParamRef> out;
    detail::append_lstm(out, m.lstm);
    out.push_back({"gcn.w", &m.gcn.w});
    detail::append_mlp(out, "score", m.score_head);
    return out;
}

inline std::vector<ParamRef> group_reg(ModelParameters& m) {
    std::vector<ParamRef> out;
    detail::append_mlp(out, "reg", m.reg_head);
    return out;
}

inline std::vector<ParamRef> group_sparsity(ModelParameters& m) {
    return {{"proj.w", &m.proj.w}, {"proj.b", &m.proj.b}};
}

inline std::vector<ParamRef> all_parameters(ModelParameters& m) {
    std::vector<ParamRef> out = group_tri(m);
    for (auto& p : group_reg(m)) out.push_back(p);
    for (auto& p : group_sparsity(m)) out.push_back(p);
    return out;
}

// Every intermediate of one (query, proposal) forward pass, kept so the
// backward passes can run without recomputation.
struct PairCache {
    LstmCache q_lstm, p_lstm;
    Matrix h0;                  // 2T x d
    Matrix phi;                 // 2T x d1
    AdjacencyCache adj;
    GcnCache gcn;
    std::vector<double> pooled;  // d1_out
    MlpCache score_cache, reg_cache;
    double score = 0.0;
    RegressionOffsets offsets;
};

// Full chain: lstm on each clip -> stack -> project -> adjacency -> graph
// convolution -> pool -> heads.
inline PairCache forward_pair(const Matrix& q, const Matrix& p, const ModelParameters& m) {
    if (!q.same_shape(p))
        throw InvalidInput("forward_pair: clips differ in shape (" + shape_str(q) + " vs " +
                           shape_str(p) + ")");
    PairCache cc;
    cc.q_lstm = lstm_forward_cached(q, m.lstm);
    cc.p_lstm = lstm_forward_cached(p, m.lstm);
    cc.h0 = build_node_features(cc.q_lstm.h, cc.p_lstm.h);
    cc.phi = project(cc.h0, m.proj);
    cc.adj = build_adjacency_cached(cc.phi);
    cc.gcn = gcn_forward_cached(cc.adj.a_hat, cc.h0, m.gcn);
    cc.pooled = global_avg_pool(cc.gcn.h1);
    cc.score_cache = mlp_forward_cached(cc.pooled, m.score_head);
    cc.score = cc.score_cache.post.back()[0];
    cc.reg_cache = mlp_forward_cached(cc.pooled, m.reg_head);
    cc.offsets = {cc.reg_cache.post.back()[0], cc.reg_cache.post.back()[1]};
    return cc;
}

namespace detail {

// Pool cotangent -> full trunk backward: gcn, adjacency, projection, lstm.
inline void backward_trunk(const PairCache& cc, const ModelParameters& m,
                           const std::vector<double>& d_pooled, ModelParameters& grads) {
    const std::size_t n = cc.h0.rows(), d = cc.h0.cols();
    Matrix d_h0(n, d);
    Matrix d_a(n, n);
    {
        const std::size_t d1_out = cc.gcn.h1.cols();
        Matrix d_h1(n, d1_out);
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < d1_out; ++k) d_h1(i, k) = d_pooled[k] * inv;
        gcn_backward(cc.gcn, cc.adj.a_hat, cc.h0, m.gcn, d_h1, grads.gcn, d_a, d_h0);
    }
    // Adjacency path re-enters the node features through the projection.
    Matrix d_phi(n, cc.phi.cols());
    adjacency_backward(cc.adj, d_a, d_phi);
    project_backward(cc.h0, m.proj, d_phi, grads.proj, &d_h0);
    // Split the stacked rows back into the two clips; the shared encoder
    // accumulates both.
    const std::size_t t = n / 2;
    Matrix d_hq(t, d), d_hp(t, d);
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t k = 0; k < d; ++k) {
            d_hq(i, k) = d_h0(i, k);
            d_hp(i, k) = d_h0(t + i, k);
        }
    lstm_backward(cc.q_lstm, m.lstm, d_hq, grads.lstm);
    lstm_backward(cc.p_lstm, m.lstm, d_hp, grads.lstm);
}

}  // namespace detail

// d(loss)/d(score) -> gradients along the full forward chain. Gradients land
// in `grads` for every parameter the path touches; group routing happens at
// update time.
inline void backward_score(const PairCache& cc, const ModelParameters& m, double d_s,
                           ModelParameters& grads) {
    if (d_s == 0.0) return;
    std::vector<double> d_pooled(cc.pooled.size(), 0.0);
    mlp_backward(cc.score_cache, m.score_head, {d_s}, grads.score_head, &d_pooled);
    detail::backward_trunk(cc, m, d_pooled, grads);
}

// d(loss)/d(offsets) -> regression head gradients. The head is the only
// member of its optimizer group, so the trunk is not revisited.
inline void backward_offsets(const PairCache& cc, const ModelParameters& m,
                             const RegressionOffsets& d, ModelParameters& grads) {
    if (d.t_c == 0.0 && d.t_l == 0.0) return;
    mlp_backward(cc.reg_cache, m.reg_head, {d.t_c, d.t_l}, grads.reg_head, nullptr);
}

// d(loss)/d(a_hat) -> projection gradients. The sparsity optimizer owns only
// the projection, so backpropagation stops at the node features.
inline void backward_adjacency_loss(const PairCache& cc, const ModelParameters& m,
                                    const Matrix& d_a, ModelParameters& grads) {
    Matrix d_phi(cc.phi.rows(), cc.phi.cols());
    adjacency_backward(cc.adj, d_a, d_phi);
    project_backward(cc.h0, m.proj, d_phi, grads.proj, nullptr);
}

// The deployed query/proposal scoring call: score, predicted offsets, and
// the pair's adjacency for inspection.
struct PairScore {
    double score = 0.0;
    RegressionOffsets offsets;
    Matrix a_hat;
};

inline PairScore score_pair(const Matrix& q, const Matrix& p, const ModelParameters& m) {
    PairCache cc = forward_pair(q, p, m);
    return {cc.score, cc.offsets, std::move(cc.adj.a_hat)};
}

}  // namespace vmr
