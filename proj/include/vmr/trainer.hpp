#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vmr/adam.hpp"
#include "vmr/checkpoint.hpp"
#include "vmr/config.hpp"
#include "vmr/data.hpp"
#include "vmr/losses.hpp"
#include "vmr/model.hpp"

namespace vmr {

struct BatchLosses {
    double sparsity = 0.0;
    double triplet = 0.0;
    double regression = 0.0;
};

using EpochLog = BatchLosses;

// One optimization step per batch of triplets: a single forward pass on the
// (q,p) and (q,n) pairs, three backward passes routed to their parameter
// groups, then the three Adam updates in order sparsity, triplet,
// regression. All gradients are taken at the pre-update parameters, as a
// graph built once per batch would give.
class Trainer {
public:
    Trainer(const Dataset& data, const RunConfig& cfg)
        : data_(data),
          cfg_(cfg),
          root_(cfg.seed),
          sample_rng_(root_.split("sampling")),
          shuffle_rng_(root_.split("shuffle")) {
        cfg_.validate();
        if (data_.t_video == 0 || data_.videos.empty()) throw DataError("trainer: empty dataset");
        queries_ = detail::train_video_indices(data_);
        if (queries_.empty()) throw DataError("trainer: dataset has no training videos");
        SeededRng init_rng = root_.split("init");
        model_ = init_model(cfg_.dims(data_.d_in, cfg_.hp.t), init_rng);
        opt_.sparsity = make_adam_state(group_sparsity(model_));
        opt_.tri = make_adam_state(group_tri(model_));
        opt_.reg = make_adam_state(group_reg(model_));
        grads_sp_ = zeros_like(model_);
        grads_tri_ = zeros_like(model_);
        grads_reg_ = zeros_like(model_);
    }

    ModelParameters& model() { return model_; }
    const ModelParameters& model() const { return model_; }
    OptimizerStates& optimizer_states() { return opt_; }
    std::size_t steps_taken() const { return step_count_; }
    const std::vector<EpochLog>& log() const { return log_; }

    // One batch of n triplets; n defaults to the configured batch size.
    BatchLosses step(std::size_t n = 0) {
        if (n == 0) n = cfg_.hp.batch;
        std::vector<TrainingTriplet> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            batch.push_back(
                make_triplet(data_, next_query(), cfg_.hp.t, cfg_.thresholds, sample_rng_));
        return step_on(batch);
    }

    BatchLosses step_on(const std::vector<TrainingTriplet>& batch) {
        const std::size_t n = batch.size();
        if (n == 0) throw InvalidInput("trainer: empty batch");

        std::vector<PairCache> pos, neg;
        pos.reserve(n);
        neg.reserve(n);
        for (const auto& tr : batch) {
            pos.push_back(forward_pair(tr.q.features, tr.p.features, model_));
            neg.push_back(forward_pair(tr.q.features, tr.n.features, model_));
        }

        std::vector<double> s_p(n), s_n(n);
        for (std::size_t i = 0; i < n; ++i) {
            s_p[i] = pos[i].score;
            s_n[i] = neg[i].score;
        }

        BatchLosses losses;
        // Sparsity: mean of the per-pair mean-|entry| losses over all 2n
        // adjacencies of the batch.
        for (const auto& c : pos) losses.sparsity += l1_sparsity_loss(c.adj.a_hat);
        for (const auto& c : neg) losses.sparsity += l1_sparsity_loss(c.adj.a_hat);
        losses.sparsity /= static_cast<double>(2 * n);
        losses.triplet = triplet_loss(s_p, s_n, model_, cfg_.hp);

        std::vector<RegressionOffsets> preds(n), targets(n);
        for (std::size_t i = 0; i < n; ++i) {
            preds[i] = pos[i].offsets;
            targets[i] = encode_targets(batch[i].p_seg, batch[i].p_gt);
        }
        losses.regression = regression_loss(preds, targets);

        check_finite(losses.sparsity, "sparsity");
        check_finite(losses.triplet, "triplet");
        check_finite(losses.regression, "regression");

        zero_gradients();
        const double pair_weight = 1.0 / static_cast<double>(2 * n);
        for (const auto& c : pos)
            backward_adjacency_loss(c, model_, l1_sparsity_grad(c.adj.a_hat, pair_weight),
                                    grads_sp_);
        for (const auto& c : neg)
            backward_adjacency_loss(c, model_, l1_sparsity_grad(c.adj.a_hat, pair_weight),
                                    grads_sp_);

        std::vector<double> d_s_p(n), d_s_n(n);
        triplet_score_grads(s_p, s_n, cfg_.hp.gamma, d_s_p, d_s_n);
        for (std::size_t i = 0; i < n; ++i) {
            backward_score(pos[i], model_, d_s_p[i], grads_tri_);
            backward_score(neg[i], model_, d_s_n[i], grads_tri_);
        }
        {
            // d(lambda ||theta||^2) = 2 lambda theta over the triplet group.
            auto params = group_tri(model_);
            auto grads = group_tri(grads_tri_);
            for (std::size_t t = 0; t < params.size(); ++t)
                axpy_in_place(*grads[t].tensor, 2.0 * cfg_.hp.lambda, *params[t].tensor);
        }

        for (std::size_t i = 0; i < n; ++i)
            backward_offsets(pos[i], model_, regression_grad(preds[i], targets[i], n),
                             grads_reg_);

        adam_step(group_sparsity(model_), group_sparsity(grads_sp_), opt_.sparsity,
                  {cfg_.hp.lr_sparsity, cfg_.hp.beta1, cfg_.hp.beta2, cfg_.hp.adam_eps});
        adam_step(group_tri(model_), group_tri(grads_tri_), opt_.tri,
                  {cfg_.hp.lr_tri, cfg_.hp.beta1, cfg_.hp.beta2, cfg_.hp.adam_eps});
        adam_step(group_reg(model_), group_reg(grads_reg_), opt_.reg,
                  {cfg_.hp.lr_reg, cfg_.hp.beta1, cfg_.hp.beta2, cfg_.hp.adam_eps});

        ++step_count_;
        return losses;
    }

    // Full training run: `epochs` passes, each over a fixed triplet budget,
    // logging the three batch-averaged losses per epoch.
    const std::vector<EpochLog>& run() {
        const std::size_t per_epoch =
            cfg_.triplets_per_epoch ? cfg_.triplets_per_epoch : queries_.size();
        log_.clear();
        log_.reserve(cfg_.hp.epochs);
        for (std::size_t e = 0; e < cfg_.hp.epochs; ++e) {
            EpochLog acc;
            std::size_t batches = 0, remaining = per_epoch;
            while (remaining > 0) {
                const std::size_t k = std::min(cfg_.hp.batch, remaining);
                const BatchLosses b = step(k);
                acc.sparsity += b.sparsity;
                acc.triplet += b.triplet;
                acc.regression += b.regression;
                remaining -= k;
                ++batches;
            }
            acc.sparsity /= static_cast<double>(batches);
            acc.triplet /= static_cast<double>(batches);
            acc.regression /= static_cast<double>(batches);
            log_.push_back(acc);
        }
        return log_;
    }

private:
    std::size_t next_query() {
        if (pos_ >= order_.size()) {
            order_ = queries_;
            for (std::size_t i = order_.size(); i > 1; --i)
                std::swap(order_[i - 1], order_[shuffle_rng_.uniform_index(i)]);
            pos_ = 0;
        }
        return order_[pos_++];
    }

    void zero_gradients() {
        for (ModelParameters* g : {&grads_sp_, &grads_tri_, &grads_reg_})
            for (auto& ref : all_parameters(*g)) ref.tensor->fill(0.0);
    }

    void check_finite(double value, const char* loss_name) const {
        if (!std::isfinite(value))
            throw NumericError(std::string("non-finite ") + loss_name + " loss at batch " +
                               std::to_string(step_count_));
    }

    const Dataset& data_;
    RunConfig cfg_;
    SeededRng root_, sample_rng_, shuffle_rng_;
    std::vector<std::size_t> queries_, order_;
    std::size_t pos_ = 0;
    ModelParameters model_;
    OptimizerStates opt_;
    ModelParameters grads_sp_, grads_tri_, grads_reg_;
    std::size_t step_count_ = 0;
    std::vector<EpochLog> log_;
};

}  // namespace vmr
