#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "vmr/heads.hpp"
#include "vmr/matrix.hpp"
#include "vmr/model.hpp"
#include "vmr/segment.hpp"

namespace vmr {

struct Hyperparameters {
    double gamma = 0.5;        // triplet margin
    double lambda = 5e-3;      // L2 coefficient inside the triplet loss
    double lr_tri = 1e-4;
    double lr_reg = 1e-1;
    double lr_sparsity = 1e-2;
    std::size_t batch = 32;
    std::size_t epochs = 64;
    std::size_t t = 40;        // common clip length
    double adam_eps = 1e-8;
    double beta1 = 0.9;
    double beta2 = 0.999;

    void validate() const {
        if (!(gamma > 0.0)) throw InvalidInput("hyperparameters: gamma must be positive");
        if (lambda < 0.0) throw InvalidInput("hyperparameters: lambda must be nonnegative");
        if (!(lr_tri >= 0.0 && lr_reg >= 0.0 && lr_sparsity >= 0.0))
            throw InvalidInput("hyperparameters: learning rates must be nonnegative");
        if (batch == 0 || epochs == 0 || t < 2)
            throw InvalidInput("hyperparameters: batch, epochs, t out of range");
    }
};

// Sum of hinges over the batch; no mean, matching the regression loss's 1/N
// asymmetry deliberately.
inline double triplet_hinge_sum(std::span<const double> s_p, std::span<const double> s_n,
                                double gamma) {
    if (s_p.size() != s_n.size() || s_p.empty())
        throw InvalidInput("triplet loss: positive/negative batches must match and be nonempty");
    double loss = 0.0;
    for (std::size_t i = 0; i < s_p.size(); ++i) {
        const double h = gamma - s_p[i] + s_n[i];
        if (h > 0.0) loss += h;
    }
    return loss;
}

// sum_i max(0, gamma - s_p + s_n) + lambda ||theta_tri||^2. Only the triplet
// group is regularized; the other two groups are excluded from this
// optimizer and stay out of its penalty.
inline double triplet_loss(std::span<const double> s_p, std::span<const double> s_n,
                           ModelParameters& params, const Hyperparameters& hp) {
    const double hinge = triplet_hinge_sum(s_p, s_n, hp.gamma);
    return hinge + hp.lambda * l2_squared(group_tri(params));
}

// Hinge subgradients per batch item: d/ds_p = -1 and d/ds_n = +1 on active
// hinges, 0 otherwise (0 at the kink).
inline void triplet_score_grads(std::span<const double> s_p, std::span<const double> s_n,
                                double gamma, std::span<double> d_s_p,
                                std::span<double> d_s_n) {
    for (std::size_t i = 0; i < s_p.size(); ++i) {
        const bool active = (gamma - s_p[i] + s_n[i]) > 0.0;
        d_s_p[i] = active ? -1.0 : 0.0;
        d_s_n[i] = active ? 1.0 : 0.0;
    }
}

// Offset targets for a proposal against its ground truth:
//   t_c* = (loc - loc*) / len*,   t_l* = log(len / len*).
inline RegressionOffsets encode_targets(const Segment& proposal, const Segment& gt) {
    if (!(proposal.len() > 0.0) || !(gt.len() > 0.0))
        throw InvalidInput("encode_targets: segments must have positive length");
    return {(proposal.loc() - gt.loc()) / gt.len(), std::log(proposal.len() / gt.len())};
}

// Mean over the batch of |t_c - t_c*| + |t_l - t_l*|.
inline double regression_loss(std::span<const RegressionOffsets> pred,
                              std::span<const RegressionOffsets> target) {
    if (pred.size() != target.size() || pred.empty())
        throw InvalidInput("regression_loss: batches must match and be nonempty");
    double loss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        loss += std::abs(pred[i].t_c - target[i].t_c) + std::abs(pred[i].t_l - target[i].t_l);
    return loss / static_cast<double>(pred.size());
}

inline double sign0(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline RegressionOffsets regression_grad(const RegressionOffsets& pred,
                                         const RegressionOffsets& target, std::size_t n) {
    const double inv = 1.0 / static_cast<double>(n);
    return {sign0(pred.t_c - target.t_c) * inv, sign0(pred.t_l - target.t_l) * inv};
}

// Mean absolute adjacency entry: (1 / 4T^2) sum |a[i,j]|, in [0, 1] for
// cosine-valued entries.
inline double l1_sparsity_loss(const Matrix& a_hat) {
    if (a_hat.rows() != a_hat.cols())
        throw InvalidInput("l1_sparsity_loss: adjacency must be square");
    double s = 0.0;
    for (std::size_t k = 0; k < a_hat.size(); ++k) s += std::abs(a_hat.data()[k]);
    return s / static_cast<double>(a_hat.size());
}

// Cotangent of the adjacency for `weight` times the mean-|entry| loss:
// sign(a[i,j]) * weight / 4T^2.
inline Matrix l1_sparsity_grad(const Matrix& a_hat, double weight) {
    Matrix d(a_hat.rows(), a_hat.cols());
    const double w = weight / static_cast<double>(a_hat.size());
    for (std::size_t k = 0; k < a_hat.size(); ++k) d.data()[k] = sign0(a_hat.data()[k]) * w;
    return d;
}

}  // namespace vmr
