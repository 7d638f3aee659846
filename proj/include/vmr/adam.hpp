#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "vmr/matrix.hpp"
#include "vmr/params.hpp"

namespace vmr {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First and second moment accumulators, one pair per tensor of the group the
// optimizer owns, in group order.
struct AdamState {
    std::size_t step = 0;
    std::vector<Matrix> m;
    std::vector<Matrix> v;
};

inline AdamState make_adam_state(std::span<const ParamRef> params) {
    AdamState st;
    for (const auto& p : params) {
        st.m.emplace_back(p.tensor->rows(), p.tensor->cols());
        st.v.emplace_back(p.tensor->rows(), p.tensor->cols());
    }
    return st;
}

// One bias-corrected Adam update over a parameter group. `grads` must mirror
// `params` tensor for tensor.
inline void adam_step(std::span<const ParamRef> params, std::span<const ParamRef> grads,
                      AdamState& st, const AdamConfig& cfg) {
    if (params.size() != grads.size() || params.size() != st.m.size())
        throw InvalidInput("adam_step: parameter, gradient and state lists must align");
    st.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(st.step));
    for (std::size_t t = 0; t < params.size(); ++t) {
        Matrix& p = *params[t].tensor;
        const Matrix& g = *grads[t].tensor;
        Matrix& m = st.m[t];
        Matrix& v = st.v[t];
        if (!p.same_shape(g) || !p.same_shape(m))
            throw InvalidInput("adam_step: shape mismatch in tensor " + params[t].name);
        for (std::size_t k = 0; k < p.size(); ++k) {
            const double gk = g.data()[k];
            m.data()[k] = cfg.beta1 * m.data()[k] + (1.0 - cfg.beta1) * gk;
            v.data()[k] = cfg.beta2 * v.data()[k] + (1.0 - cfg.beta2) * gk * gk;
            const double m_hat = m.data()[k] / bc1;
            const double v_hat = v.data()[k] / bc2;
            p.data()[k] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
        }
    }
}

}  // namespace vmr
