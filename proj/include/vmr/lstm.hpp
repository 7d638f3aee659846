#pragma once

#include <cmath>
#include <cstddef>

#include "vmr/matrix.hpp"
#include "vmr/rng.hpp"

namespace vmr {

// Single-layer LSTM, shared (siamese) between the two clips of a pair.
// Gate order throughout: input i, forget f, candidate g, output o.
struct LstmParameters {
    std::size_t d_in = 0, d = 0;
    Matrix w_i, w_f, w_g, w_o;  // input-to-hidden, d x d_in
    Matrix u_i, u_f, u_g, u_o;  // hidden-to-hidden, d x d
    Matrix b_i, b_f, b_g, b_o;  // 1 x d
};

inline LstmParameters make_lstm(std::size_t d_in, std::size_t d) {
    LstmParameters p;
    p.d_in = d_in;
    p.d = d;
    p.w_i = Matrix(d, d_in); p.w_f = Matrix(d, d_in); p.w_g = Matrix(d, d_in); p.w_o = Matrix(d, d_in);
    p.u_i = Matrix(d, d); p.u_f = Matrix(d, d); p.u_g = Matrix(d, d); p.u_o = Matrix(d, d);
    p.b_i = Matrix(1, d); p.b_f = Matrix(1, d); p.b_g = Matrix(1, d); p.b_o = Matrix(1, d);
    return p;
}

// Weights uniform in +-1/sqrt(d); forget-gate bias starts at 1 so memory is
// open early in training.
inline LstmParameters init_lstm(std::size_t d_in, std::size_t d, SeededRng& rng) {
    LstmParameters p = make_lstm(d_in, d);
    const double r = 1.0 / std::sqrt(static_cast<double>(d));
    for (Matrix* m : {&p.w_i, &p.w_f, &p.w_g, &p.w_o, &p.u_i, &p.u_f, &p.u_g, &p.u_o,
                      &p.b_i, &p.b_g, &p.b_o})
        for (std::size_t k = 0; k < m->size(); ++k) m->data()[k] = rng.uniform(-r, r);
    p.b_f.fill(1.0);
    return p;
}

struct LstmCache {
    Matrix input;        // T x d_in
    Matrix i, f, g, o;   // T x d, post-activation gate values
    Matrix c, tanh_c;    // T x d
    Matrix h;            // T x d, the forward output
};

namespace detail {

inline void check_lstm_shapes(const Matrix& seq, const LstmParameters& p) {
    if (p.d_in == 0 || p.d == 0) throw InvalidInput("lstm: uninitialized parameters");
    if (seq.cols() != p.d_in)
        throw InvalidInput("lstm: input width " + std::to_string(seq.cols()) +
                           " does not match d_in " + std::to_string(p.d_in));
    if (p.w_i.rows() != p.d || p.w_i.cols() != p.d_in || p.u_i.rows() != p.d ||
        p.u_i.cols() != p.d || p.b_i.cols() != p.d)
        throw InvalidInput("lstm: inconsistent parameter shapes");
}

}  // namespace detail

// Runs the recurrence from zero initial hidden/cell state and caches every
// intermediate needed by backpropagation through time.
inline LstmCache lstm_forward_cached(const Matrix& seq, const LstmParameters& p) {
    detail::check_lstm_shapes(seq, p);
    const std::size_t T = seq.rows(), d = p.d, d_in = p.d_in;
    LstmCache cc;
    cc.input = seq;
    cc.i = Matrix(T, d); cc.f = Matrix(T, d); cc.g = Matrix(T, d); cc.o = Matrix(T, d);
    cc.c = Matrix(T, d); cc.tanh_c = Matrix(T, d); cc.h = Matrix(T, d);

    std::vector<double> pre_i(d), pre_f(d), pre_g(d), pre_o(d);
    for (std::size_t t = 0; t < T; ++t) {
        const double* x = seq.data() + t * d_in;
        const double* h_prev = (t == 0) ? nullptr : cc.h.data() + (t - 1) * d;
        for (std::size_t a = 0; a < d; ++a) {
            double si = p.b_i(0, a), sf = p.b_f(0, a), sg = p.b_g(0, a), so = p.b_o(0, a);
            const double* wi = p.w_i.data() + a * d_in;
            const double* wf = p.w_f.data() + a * d_in;
            const double* wg = p.w_g.data() + a * d_in;
            const double* wo = p.w_o.data() + a * d_in;
            for (std::size_t k = 0; k < d_in; ++k) {
                si += wi[k] * x[k]; sf += wf[k] * x[k];
                sg += wg[k] * x[k]; so += wo[k] * x[k];
            }
            if (h_prev) {
                const double* ui = p.u_i.data() + a * d;
                const double* uf = p.u_f.data() + a * d;
                const double* ug = p.u_g.data() + a * d;
                const double* uo = p.u_o.data() + a * d;
                for (std::size_t k = 0; k < d; ++k) {
                    si += ui[k] * h_prev[k]; sf += uf[k] * h_prev[k];
                    sg += ug[k] * h_prev[k]; so += uo[k] * h_prev[k];
                }
            }
            pre_i[a] = si; pre_f[a] = sf; pre_g[a] = sg; pre_o[a] = so;
        }
        for (std::size_t a = 0; a < d; ++a) {
            const double iv = sigmoid(pre_i[a]);
            const double fv = sigmoid(pre_f[a]);
            const double gv = std::tanh(pre_g[a]);
            const double ov = sigmoid(pre_o[a]);
            const double c_prev = (t == 0) ? 0.0 : cc.c(t - 1, a);
            const double cv = fv * c_prev + iv * gv;
            const double tc = std::tanh(cv);
            cc.i(t, a) = iv; cc.f(t, a) = fv; cc.g(t, a) = gv; cc.o(t, a) = ov;
            cc.c(t, a) = cv; cc.tanh_c(t, a) = tc;
            cc.h(t, a) = ov * tc;
        }
    }
    return cc;
}

inline Matrix lstm_forward(const Matrix& seq, const LstmParameters& p) {
    return lstm_forward_cached(seq, p).h;
}

// Backpropagation through time. Accumulates parameter gradients for the
// cotangent d_h (T x d) into `grads`; both clips of a pair accumulate into
// the same gradient because the encoder weights are shared.
inline void lstm_backward(const LstmCache& cc, const LstmParameters& p, const Matrix& d_h,
                          LstmParameters& grads) {
    if (cc.h.empty()) throw InternalStateError("lstm_backward: forward cache missing");
    if (!d_h.same_shape(cc.h)) throw InvalidInput("lstm_backward: cotangent shape mismatch");
    const std::size_t T = cc.h.rows(), d = p.d, d_in = p.d_in;

    std::vector<double> dh_next(d, 0.0), dc_next(d, 0.0);
    std::vector<double> dpre_i(d), dpre_f(d), dpre_g(d), dpre_o(d), dh_prev(d);
    for (std::size_t t = T; t-- > 0;) {
        for (std::size_t a = 0; a < d; ++a) {
            const double dh = d_h(t, a) + dh_next[a];
            const double iv = cc.i(t, a), fv = cc.f(t, a), gv = cc.g(t, a), ov = cc.o(t, a);
            const double tc = cc.tanh_c(t, a);
            const double c_prev = (t == 0) ? 0.0 : cc.c(t - 1, a);
            const double dc = dh * ov * (1.0 - tc * tc) + dc_next[a];
            dpre_o[a] = dh * tc * ov * (1.0 - ov);
            dpre_f[a] = dc * c_prev * fv * (1.0 - fv);
            dpre_i[a] = dc * gv * iv * (1.0 - iv);
            dpre_g[a] = dc * iv * (1.0 - gv * gv);
            dc_next[a] = dc * fv;
        }
        const double* x = cc.input.data() + t * d_in;
        for (std::size_t a = 0; a < d; ++a) {
            double* gwi = grads.w_i.data() + a * d_in;
            double* gwf = grads.w_f.data() + a * d_in;
            double* gwg = grads.w_g.data() + a * d_in;
            double* gwo = grads.w_o.data() + a * d_in;
            for (std::size_t k = 0; k < d_in; ++k) {
                gwi[k] += dpre_i[a] * x[k]; gwf[k] += dpre_f[a] * x[k];
                gwg[k] += dpre_g[a] * x[k]; gwo[k] += dpre_o[a] * x[k];
            }
            grads.b_i(0, a) += dpre_i[a]; grads.b_f(0, a) += dpre_f[a];
            grads.b_g(0, a) += dpre_g[a]; grads.b_o(0, a) += dpre_o[a];
        }
        if (t > 0) {
            const double* h_prev = cc.h.data() + (t - 1) * d;
            for (std::size_t a = 0; a < d; ++a) {
                double* gui = grads.u_i.data() + a * d;
                double* guf = grads.u_f.data() + a * d;
                double* gug = grads.u_g.data() + a * d;
                double* guo = grads.u_o.data() + a * d;
                for (std::size_t k = 0; k < d; ++k) {
                    gui[k] += dpre_i[a] * h_prev[k]; guf[k] += dpre_f[a] * h_prev[k];
                    gug[k] += dpre_g[a] * h_prev[k]; guo[k] += dpre_o[a] * h_prev[k];
                }
            }
            for (std::size_t k = 0; k < d; ++k) {
                double s = 0.0;
                for (std::size_t a = 0; a < d; ++a)
                    s += p.u_i(a, k) * dpre_i[a] + p.u_f(a, k) * dpre_f[a] +
                         p.u_g(a, k) * dpre_g[a] + p.u_o(a, k) * dpre_o[a];
                dh_prev[k] = s;
            }
            dh_next = dh_prev;
        }
    }
}

// Row-wise stack of the two encoded clips: query rows first, proposal rows
// after, giving the 2T x d node feature matrix of the pair graph.
inline Matrix build_node_features(const Matrix& q_hidden, const Matrix& p_hidden) {
    if (!q_hidden.same_shape(p_hidden))
        throw InvalidInput("build_node_features: clip encodings differ in shape");
    const std::size_t T = q_hidden.rows(), d = q_hidden.cols();
    Matrix h0(2 * T, d);
    for (std::size_t t = 0; t < T; ++t)
        for (std::size_t a = 0; a < d; ++a) {
            h0(t, a) = q_hidden(t, a);
            h0(T + t, a) = p_hidden(t, a);
        }
    return h0;
}

}  // namespace vmr
