#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "vmr/matrix.hpp"
#include "vmr/rng.hpp"

namespace vmr {

// Predicted correction of a proposal: relative center shift and log length
// ratio.
struct RegressionOffsets {
    double t_c = 0.0;
    double t_l = 0.0;
};

// Plain MLP, relu between layers, output activation chosen by id ("tanh" or
// "linear"). The score head is widths {d, d, 1} with tanh, the regression
// head {d, d, 2} linear.
struct MlpLayer {
    Matrix w;  // out x in
    Matrix b;  // 1 x out
};

struct MlpParameters {
    std::vector<MlpLayer> layers;
    std::string output_activation = "linear";
};

inline MlpParameters make_mlp(const std::vector<std::size_t>& widths,
                              std::string output_activation) {
    if (widths.size() < 2) throw InvalidInput("make_mlp: need at least input and output width");
    if (output_activation != "tanh" && output_activation != "linear")
        throw InvalidInput("make_mlp: unknown output activation '" + output_activation + "'");
    MlpParameters p;
    p.output_activation = std::move(output_activation);
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        p.layers.push_back({Matrix(widths[l + 1], widths[l]), Matrix(1, widths[l + 1])});
    return p;
}

inline MlpParameters init_mlp(const std::vector<std::size_t>& widths,
                              std::string output_activation, SeededRng& rng) {
    MlpParameters p = make_mlp(widths, std::move(output_activation));
    for (auto& layer : p.layers) {
        const double r = 1.0 / std::sqrt(static_cast<double>(layer.w.cols()));
        for (std::size_t k = 0; k < layer.w.size(); ++k) layer.w.data()[k] = rng.uniform(-r, r);
        for (std::size_t k = 0; k < layer.b.size(); ++k) layer.b.data()[k] = rng.uniform(-r, r);
    }
    return p;
}

struct MlpCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // per layer, before activation
    std::vector<std::vector<double>> post;  // per layer, after activation
};

inline MlpCache mlp_forward_cached(const std::vector<double>& input, const MlpParameters& p) {
    if (p.layers.empty()) throw InvalidInput("mlp: no layers");
    if (input.size() != p.layers.front().w.cols())
        throw InvalidInput("mlp: input width " + std::to_string(input.size()) +
                           " does not match first layer " +
                           std::to_string(p.layers.front().w.cols()));
    MlpCache cc;
    cc.input = input;
    const std::vector<double>* x = &cc.input;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const MlpLayer& layer = p.layers[l];
        const std::size_t out = layer.w.rows(), in = layer.w.cols();
        std::vector<double> pre(out);
        for (std::size_t a = 0; a < out; ++a) {
            double s = layer.b(0, a);
            const double* w = layer.w.data() + a * in;
            for (std::size_t k = 0; k < in; ++k) s += w[k] * (*x)[k];
            pre[a] = s;
        }
        std::vector<double> post(out);
        const bool last = (l + 1 == p.layers.size());
        for (std::size_t a = 0; a < out; ++a) {
            if (!last) post[a] = relu(pre[a]);
            else if (p.output_activation == "tanh") post[a] = std::tanh(pre[a]);
            else post[a] = pre[a];
        }
        cc.pre.push_back(std::move(pre));
        cc.post.push_back(std::move(post));
        x = &cc.post.back();
    }
    return cc;
}

inline std::vector<double> mlp_forward(const std::vector<double>& input,
                                       const MlpParameters& p) {
    return mlp_forward_cached(input, p).post.back();
}

// d_out is the cotangent of the post-activation output. Parameter gradients
// accumulate into `grads`; the input cotangent accumulates into d_input when
// given.
inline void mlp_backward(const MlpCache& cc, const MlpParameters& p,
                         const std::vector<double>& d_out, MlpParameters& grads,
                         std::vector<double>* d_input) {
    if (cc.post.empty()) throw InternalStateError("mlp_backward: forward cache missing");
    if (d_out.size() != cc.post.back().size())
        throw InvalidInput("mlp_backward: cotangent width mismatch");
    std::vector<double> delta = d_out;
    for (std::size_t l = p.layers.size(); l-- > 0;) {
        const MlpLayer& layer = p.layers[l];
        const std::size_t out = layer.w.rows(), in = layer.w.cols();
        const bool last = (l + 1 == p.layers.size());
        for (std::size_t a = 0; a < out; ++a) {
            if (!last) {
                if (cc.pre[l][a] <= 0.0) delta[a] = 0.0;
            } else if (p.output_activation == "tanh") {
                const double y = cc.post[l][a];
                delta[a] *= (1.0 - y * y);
            }
        }
        const std::vector<double>& x = (l == 0) ? cc.input : cc.post[l - 1];
        MlpLayer& g = grads.layers[l];
        for (std::size_t a = 0; a < out; ++a) {
            double* gw = g.w.data() + a * in;
            for (std::size_t k = 0; k < in; ++k) gw[k] += delta[a] * x[k];
            g.b(0, a) += delta[a];
        }
        if (l > 0 || d_input) {
            std::vector<double> d_x(in, 0.0);
            for (std::size_t a = 0; a < out; ++a) {
                const double* w = layer.w.data() + a * in;
                for (std::size_t k = 0; k < in; ++k) d_x[k] += delta[a] * w[k];
            }
            if (l == 0) {
                for (std::size_t k = 0; k < in; ++k) (*d_input)[k] += d_x[k];
            } else {
                delta = std::move(d_x);
            }
        }
    }
}

// Column-wise mean over all node rows: the graph-level feature both heads
// consume.
inline std::vector<double> global_avg_pool(const Matrix& h1) {
    if (h1.rows() == 0 || h1.cols() == 0)
        throw InvalidInput("global_avg_pool: empty feature matrix");
    std::vector<double> g(h1.cols(), 0.0);
    for (std::size_t i = 0; i < h1.rows(); ++i) {
        const double* row = h1.data() + i * h1.cols();
        for (std::size_t k = 0; k < h1.cols(); ++k) g[k] += row[k];
    }
    const double inv = 1.0 / static_cast<double>(h1.rows());
    for (double& x : g) x *= inv;
    return g;
}

inline double score_head(const std::vector<double>& g, const MlpParameters& p) {
    if (p.layers.empty() || p.layers.back().w.rows() != 1)
        throw InvalidInput("score_head: output width must be 1");
    if (p.output_activation != "tanh")
        throw InvalidInput("score_head: output activation must be tanh");
    return mlp_forward(g, p)[0];
}

inline RegressionOffsets regression_head(const std::vector<double>& g,
                                         const MlpParameters& p) {
    if (p.layers.empty() || p.layers.back().w.rows() != 2)
        throw InvalidInput("regression_head: output width must be 2");
    if (p.output_activation != "linear")
        throw InvalidInput("regression_head: output activation must be linear");
    const std::vector<double> out = mlp_forward(g, p);
    return {out[0], out[1]};
}

}  // namespace vmr
