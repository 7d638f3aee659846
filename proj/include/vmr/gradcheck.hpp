#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "vmr/errors.hpp"

namespace vmr {

// Central-difference gradient oracle: (f(x + h e_k) - f(x - h e_k)) / (2h)
// per coordinate. Used to verify every analytic gradient in the library.
inline std::vector<double> finite_diff_grad(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h) {
    if (!(h > 0.0)) throw InvalidInput("finite_diff_grad: step size must be positive");
    std::vector<double> grad(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double saved = x[k];
        x[k] = saved + h;
        const double fp = f(x);
        x[k] = saved - h;
        const double fm = f(x);
        x[k] = saved;
        if (!std::isfinite(fp) || !std::isfinite(fm))
            throw NumericError("finite_diff_grad: non-finite value at coordinate " +
                               std::to_string(k));
        grad[k] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

// ||a - b|| / max(||a||, ||b||, floor). Vector-level relative error, the
// measure all gradient checks are stated in.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b,
                             double floor = 1e-12) {
    if (a.size() != b.size()) throw InvalidInput("relative_error: length mismatch");
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double denom = std::max({std::sqrt(na), std::sqrt(nb), floor});
    return std::sqrt(diff) / denom;
}

}  // namespace vmr
