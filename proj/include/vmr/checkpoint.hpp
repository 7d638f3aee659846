#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "vmr/adam.hpp"
#include "vmr/io.hpp"
#include "vmr/losses.hpp"
#include "vmr/model.hpp"

namespace vmr {

// Optimizer states in step order: sparsity, triplet, regression.
struct OptimizerStates {
    AdamState sparsity, tri, reg;
};

// ---------------------------------------------------------------------------
// Checkpoint format. Everything needed to resume or evaluate:
//
//   magic   "VMRCKP01"
//   u32     version (1)
//   f64 x11 hyperparameters (gamma, lambda, lr_tri, lr_reg, lr_sparsity,
//           adam_eps, beta1, beta2) and u64 x3 (batch, epochs, t)
//   u32 x5  dims (d_in, t, d_hidden, d_proj, d_out)
//   tensor list: u32 count, then per tensor
//           string name, u32 rows, u32 cols, f64[rows*cols]
//   three optimizer states (sparsity, triplet, regression), each
//           u64 step, tensor list m, tensor list v
//
// Tensor order inside a list follows the parameter-group walk, and names are
// verified on load. All writes are deterministic: identical parameters give
// identical bytes.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kCheckpointMagic = "VMRCKP01";

namespace detail {

inline void write_tensor_list(std::ostream& os, std::span<const ParamRef> params) {
    write_u32(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        write_string(os, p.name);
        write_u32(os, static_cast<std::uint32_t>(p.tensor->rows()));
        write_u32(os, static_cast<std::uint32_t>(p.tensor->cols()));
        for (std::size_t k = 0; k < p.tensor->size(); ++k) write_f64(os, p.tensor->data()[k]);
    }
}

inline void read_tensor_list(std::istream& is, std::span<const ParamRef> params) {
    const std::uint32_t n = read_u32(is);
    if (n != params.size()) throw IoError("checkpoint: tensor count mismatch");
    for (const auto& p : params) {
        const std::string name = read_string(is);
        if (name != p.name)
            throw IoError("checkpoint: expected tensor '" + p.name + "', found '" + name + "'");
        const std::uint32_t rows = read_u32(is);
        const std::uint32_t cols = read_u32(is);
        if (rows != p.tensor->rows() || cols != p.tensor->cols())
            throw IoError("checkpoint: shape mismatch for tensor '" + name + "'");
        for (std::size_t k = 0; k < p.tensor->size(); ++k) p.tensor->data()[k] = read_f64(is);
    }
}

inline std::vector<ParamRef> moment_refs(std::vector<Matrix>& tensors,
                                         std::span<const ParamRef> params,
                                         const char* which) {
    std::vector<ParamRef> out;
    for (std::size_t i = 0; i < tensors.size(); ++i)
        out.push_back({params[i].name + "." + which, &tensors[i]});
    return out;
}

inline void write_adam(std::ostream& os, AdamState& st, std::span<const ParamRef> params) {
    write_u64(os, st.step);
    write_tensor_list(os, moment_refs(st.m, params, "m"));
    write_tensor_list(os, moment_refs(st.v, params, "v"));
}

inline void read_adam(std::istream& is, AdamState& st, std::span<const ParamRef> params) {
    st.step = static_cast<std::size_t>(read_u64(is));
    read_tensor_list(is, moment_refs(st.m, params, "m"));
    read_tensor_list(is, moment_refs(st.v, params, "v"));
}

}  // namespace detail

inline void save_checkpoint(std::ostream& os, ModelParameters& model, OptimizerStates& opt,
                            const Hyperparameters& hp) {
    write_magic(os, kCheckpointMagic);
    write_u32(os, 1);
    write_f64(os, hp.gamma);
    write_f64(os, hp.lambda);
    write_f64(os, hp.lr_tri);
    write_f64(os, hp.lr_reg);
    write_f64(os, hp.lr_sparsity);
    write_f64(os, hp.adam_eps);
    write_f64(os, hp.beta1);
    write_f64(os, hp.beta2);
    write_u64(os, hp.batch);
    write_u64(os, hp.epochs);
    write_u64(os, hp.t);
    write_u32(os, static_cast<std::uint32_t>(model.dims.d_in));
    write_u32(os, static_cast<std::uint32_t>(model.dims.t));
    write_u32(os, static_cast<std::uint32_t>(model.dims.d_hidden));
    write_u32(os, static_cast<std::uint32_t>(model.dims.d_proj));
    write_u32(os, static_cast<std::uint32_t>(model.dims.d_out));
    detail::write_tensor_list(os, all_parameters(model));
    detail::write_adam(os, opt.sparsity, group_sparsity(model));
    detail::write_adam(os, opt.tri, group_tri(model));
    detail::write_adam(os, opt.reg, group_reg(model));
    if (!os) throw IoError("checkpoint: write failed");
}

struct Checkpoint {
    ModelParameters model;
    OptimizerStates opt;
    Hyperparameters hp;
};

inline Checkpoint load_checkpoint(std::istream& is) {
    expect_magic(is, kCheckpointMagic, "checkpoint");
    const std::uint32_t version = read_u32(is);
    if (version != 1)
        throw IoError("checkpoint: unsupported version " + std::to_string(version));
    Checkpoint ck;
    ck.hp.gamma = read_f64(is);
    ck.hp.lambda = read_f64(is);
    ck.hp.lr_tri = read_f64(is);
    ck.hp.lr_reg = read_f64(is);
    ck.hp.lr_sparsity = read_f64(is);
    ck.hp.adam_eps = read_f64(is);
    ck.hp.beta1 = read_f64(is);
    ck.hp.beta2 = read_f64(is);
    ck.hp.batch = static_cast<std::size_t>(read_u64(is));
    ck.hp.epochs = static_cast<std::size_t>(read_u64(is));
    ck.hp.t = static_cast<std::size_t>(read_u64(is));
    ModelDims dims;
    dims.d_in = read_u32(is);
    dims.t = read_u32(is);
    dims.d_hidden = read_u32(is);
    dims.d_proj = read_u32(is);
    dims.d_out = read_u32(is);
    ck.model = make_model(dims);
    detail::read_tensor_list(is, all_parameters(ck.model));
    ck.opt.sparsity = make_adam_state(group_sparsity(ck.model));
    ck.opt.tri = make_adam_state(group_tri(ck.model));
    ck.opt.reg = make_adam_state(group_reg(ck.model));
    detail::read_adam(is, ck.opt.sparsity, group_sparsity(ck.model));
    detail::read_adam(is, ck.opt.tri, group_tri(ck.model));
    detail::read_adam(is, ck.opt.reg, group_reg(ck.model));
    return ck;
}

inline void save_checkpoint_file(const std::string& path, ModelParameters& model,
                                 OptimizerStates& opt, const Hyperparameters& hp) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    save_checkpoint(os, model, opt, hp);
}

inline Checkpoint load_checkpoint_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    return load_checkpoint(is);
}

inline std::string checkpoint_bytes(ModelParameters& model, OptimizerStates& opt,
                                    const Hyperparameters& hp) {
    std::ostringstream os(std::ios::binary);
    save_checkpoint(os, model, opt, hp);
    return os.str();
}

}  // namespace vmr
