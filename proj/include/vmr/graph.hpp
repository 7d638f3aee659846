#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vmr/matrix.hpp"
#include "vmr/rng.hpp"

namespace vmr {

// Norms below this are treated as zero: the similarity is 0 there and so is
// its gradient. Relu upstream can produce exactly-zero rows, where the
// cosine quotient is singular.
inline constexpr double kNormEps = 1e-12;

// Linear map phi(h) = W h + b that shapes the adjacency. Trained only by the
// sparsity optimizer.
struct ProjectionParameters {
    Matrix w;  // d1 x d
    Matrix b;  // 1 x d1
};

inline ProjectionParameters make_projection(std::size_t d1, std::size_t d) {
    return {Matrix(d1, d), Matrix(1, d1)};
}

inline ProjectionParameters init_projection(std::size_t d1, std::size_t d, SeededRng& rng) {
    ProjectionParameters p = make_projection(d1, d);
    const double r = 1.0 / std::sqrt(static_cast<double>(d));
    for (Matrix* m : {&p.w, &p.b})
        for (std::size_t k = 0; k < m->size(); ++k) m->data()[k] = rng.uniform(-r, r);
    return p;
}

// Graph convolution weight. Trained by the triplet optimizer.
struct GcnParameters {
    Matrix w;  // d x d1_out
};

// Row i of the result is W h_i + b.
inline Matrix project(const Matrix& h0, const ProjectionParameters& p) {
    if (h0.cols() != p.w.cols())
        throw InvalidInput("project: feature width " + std::to_string(h0.cols()) +
                           " does not match projection input " + std::to_string(p.w.cols()));
    const std::size_t n = h0.rows(), d1 = p.w.rows(), d = p.w.cols();
    Matrix phi(n, d1);
    for (std::size_t i = 0; i < n; ++i) {
        const double* h = h0.data() + i * d;
        double* out = phi.data() + i * d1;
        for (std::size_t a = 0; a < d1; ++a) {
            double s = p.b(0, a);
            const double* w = p.w.data() + a * d;
            for (std::size_t k = 0; k < d; ++k) s += w[k] * h[k];
            out[a] = s;
        }
    }
    return phi;
}

// d_phi is the cotangent of project's output; accumulates parameter
// gradients and, when requested, the cotangent of h0.
inline void project_backward(const Matrix& h0, const ProjectionParameters& p,
                             const Matrix& d_phi, ProjectionParameters& grads,
                             Matrix* d_h0) {
    const std::size_t n = h0.rows(), d1 = p.w.rows(), d = p.w.cols();
    if (d_phi.rows() != n || d_phi.cols() != d1)
        throw InvalidInput("project_backward: cotangent shape mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const double* h = h0.data() + i * d;
        const double* dp = d_phi.data() + i * d1;
        for (std::size_t a = 0; a < d1; ++a) {
            double* gw = grads.w.data() + a * d;
            for (std::size_t k = 0; k < d; ++k) gw[k] += dp[a] * h[k];
            grads.b(0, a) += dp[a];
        }
        if (d_h0) {
            double* dh = d_h0->data() + i * d;
            for (std::size_t a = 0; a < d1; ++a) {
                const double* w = p.w.data() + a * d;
                for (std::size_t k = 0; k < d; ++k) dh[k] += dp[a] * w[k];
            }
        }
    }
}

// Cosine of the angle between two feature vectors; 0 when either norm falls
// under kNormEps.
inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw InvalidInput("cosine_similarity: length mismatch");
    const double na = norm2(a), nb = norm2(b);
    if (na < kNormEps || nb < kNormEps) return 0.0;
    return dot(a, b) / (na * nb);
}

// Pairwise cosine similarities of the projected node features. `unit` holds
// the normalized rows (zero where guarded), which is all the backward pass
// needs besides the norms.
struct AdjacencyCache {
    Matrix unit;               // n x d1, rows phi_i / ||phi_i||
    std::vector<double> norm;  // ||phi_i||, 0 marks a guarded row
    Matrix a_hat;              // n x n, symmetric, entries in [-1, 1]
};

inline AdjacencyCache build_adjacency_cached(const Matrix& phi) {
    const std::size_t n = phi.rows(), d1 = phi.cols();
    if (n < 2) throw InvalidInput("build_adjacency: need at least two nodes");
    AdjacencyCache cc;
    cc.unit = Matrix(n, d1);
    cc.norm.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double nv = norm2(phi.row(i));
        if (nv < kNormEps) continue;  // row stays zero, norm stays 0
        cc.norm[i] = nv;
        const double inv = 1.0 / nv;
        for (std::size_t k = 0; k < d1; ++k) cc.unit(i, k) = phi(i, k) * inv;
    }
    cc.a_hat = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        cc.a_hat(i, i) = cc.norm[i] > 0.0 ? 1.0 : 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = dot(cc.unit.row(i), cc.unit.row(j));
            cc.a_hat(i, j) = s;
            cc.a_hat(j, i) = s;
        }
    }
    return cc;
}

inline Matrix build_adjacency(const Matrix& phi) { return build_adjacency_cached(phi).a_hat; }

// Cotangent of a_hat -> cotangent of phi. Guarded rows get zero gradient.
// Through u_i = phi_i/n_i and A = U U^T: dU = (dA + dA^T) U, then
// dphi_i = (du_i - (du_i . u_i) u_i) / n_i.
inline void adjacency_backward(const AdjacencyCache& cc, const Matrix& d_a, Matrix& d_phi) {
    const std::size_t n = cc.unit.rows(), d1 = cc.unit.cols();
    if (d_a.rows() != n || d_a.cols() != n)
        throw InvalidInput("adjacency_backward: cotangent shape mismatch");
    if (d_phi.rows() != n || d_phi.cols() != d1)
        throw InvalidInput("adjacency_backward: output shape mismatch");
    std::vector<double> du(d1);
    for (std::size_t i = 0; i < n; ++i) {
        if (cc.norm[i] == 0.0) continue;
        std::fill(du.begin(), du.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j) {
            if (cc.norm[j] == 0.0) continue;
            const double w = d_a(i, j) + d_a(j, i);
            if (w == 0.0) continue;
            const double* uj = cc.unit.data() + j * d1;
            for (std::size_t k = 0; k < d1; ++k) du[k] += w * uj[k];
        }
        const double* ui = cc.unit.data() + i * d1;
        double proj = 0.0;
        for (std::size_t k = 0; k < d1; ++k) proj += du[k] * ui[k];
        const double inv = 1.0 / cc.norm[i];
        double* dp = d_phi.data() + i * d1;
        for (std::size_t k = 0; k < d1; ++k) dp[k] += (du[k] - proj * ui[k]) * inv;
    }
}

struct GcnCache {
    Matrix m0;  // H0 W, 2T x d1_out
    Matrix z;   // A m0, pre-activation
    Matrix h1;  // relu(z)
};

// Single graph convolution layer: H1 = relu(A H0 W). The adjacency is used
// raw, with no degree normalization.
inline GcnCache gcn_forward_cached(const Matrix& a_hat, const Matrix& h0,
                                   const GcnParameters& p) {
    if (a_hat.rows() != a_hat.cols() || a_hat.rows() != h0.rows())
        throw InvalidInput("gcn_forward: adjacency " + shape_str(a_hat) +
                           " incompatible with features " + shape_str(h0));
    if (h0.cols() != p.w.rows())
        throw InvalidInput("gcn_forward: feature width does not match weight rows");
    GcnCache cc;
    cc.m0 = matmul(h0, p.w);
    cc.z = matmul(a_hat, cc.m0);
    cc.h1 = elementwise("relu", cc.z);
    return cc;
}

inline Matrix gcn_forward(const Matrix& a_hat, const Matrix& h0, const GcnParameters& p) {
    return gcn_forward_cached(a_hat, h0, p).h1;
}

// Cotangent of h1 -> gradients of W plus cotangents of the adjacency and of
// h0. Relu subgradient at 0 is 0.
inline void gcn_backward(const GcnCache& cc, const Matrix& a_hat, const Matrix& h0,
                         const GcnParameters& p, const Matrix& d_h1, GcnParameters& grads,
                         Matrix& d_a, Matrix& d_h0) {
    if (cc.h1.empty()) throw InternalStateError("gcn_backward: forward cache missing");
    if (!d_h1.same_shape(cc.h1)) throw InvalidInput("gcn_backward: cotangent shape mismatch");
    Matrix d_z = d_h1;
    for (std::size_t k = 0; k < d_z.size(); ++k)
        if (cc.z.data()[k] <= 0.0) d_z.data()[k] = 0.0;
    // z = A m0:   dA += dz m0^T,  dm0 = A^T dz
    const Matrix m0_t = transpose(cc.m0);
    add_in_place(d_a, matmul(d_z, m0_t));
    const Matrix d_m0 = matmul(transpose(a_hat), d_z);
    // m0 = h0 W:  dW += h0^T dm0,  dh0 += dm0 W^T
    add_in_place(grads.w, matmul(transpose(h0), d_m0));
    add_in_place(d_h0, matmul(d_m0, transpose(p.w)));
}

}  // namespace vmr
