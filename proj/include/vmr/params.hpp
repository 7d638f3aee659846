#pragma once

#include <span>
#include <string>
#include <vector>

#include "vmr/matrix.hpp"

namespace vmr {

// Named view of one parameter tensor. Parameter groups, the optimizers, the
// checkpoint format and the gradient checks all walk these lists, so a
// group's order is part of the serialized layout.
struct ParamRef {
    std::string name;
    Matrix* tensor = nullptr;
};

inline std::size_t total_size(std::span<const ParamRef> params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.tensor->size();
    return n;
}

inline std::vector<double> flatten(std::span<const ParamRef> params) {
    std::vector<double> out;
    out.reserve(total_size(params));
    for (const auto& p : params)
        out.insert(out.end(), p.tensor->data(), p.tensor->data() + p.tensor->size());
    return out;
}

inline void unflatten(std::span<const double> flat, std::span<const ParamRef> params) {
    if (flat.size() != total_size(params))
        throw InvalidInput("unflatten: flat size does not match parameter list");
    std::size_t off = 0;
    for (const auto& p : params) {
        for (std::size_t k = 0; k < p.tensor->size(); ++k) p.tensor->data()[k] = flat[off + k];
        off += p.tensor->size();
    }
}

inline double l2_squared(std::span<const ParamRef> params) {
    double s = 0.0;
    for (const auto& p : params)
        for (std::size_t k = 0; k < p.tensor->size(); ++k) {
            const double x = p.tensor->data()[k];
            s += x * x;
        }
    return s;
}

}  // namespace vmr
