// Command-line front end: dataset generation, training, evaluation,
// single-pair retrieval and adjacency dumps.
//
// Exit codes: 0 success, 2 config error, 3 data error, 4 numeric failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vmr/vmr.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string checkpoint_path;
    std::string data_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_checkpoint, bool with_data) {
    cmd->add_option("--config", args.config_path, "run configuration file (key = value lines)");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_path, "output path");
    if (with_checkpoint)
        cmd->add_option("--checkpoint", args.checkpoint_path, "checkpoint file");
    if (with_data)
        cmd->add_option("--data", args.data_path, "dataset file (overrides config)");
}

vmr::RunConfig load_config(const CommonArgs& args) {
    vmr::RunConfig cfg;
    if (!args.config_path.empty()) cfg = vmr::parse_config_file(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (!args.data_path.empty()) cfg.dataset_path = args.data_path;
    if (!args.checkpoint_path.empty()) cfg.checkpoint_path = args.checkpoint_path;
    cfg.validate();
    return cfg;
}

vmr::Dataset load_or_generate(const vmr::RunConfig& cfg) {
    if (!cfg.dataset_path.empty()) return vmr::load_dataset(cfg.dataset_path);
    return vmr::generate_synthetic_dataset(cfg.gen, cfg.seed);
}

vmr::Checkpoint load_checkpoint_for(const vmr::RunConfig& cfg, const vmr::Dataset& ds) {
    if (cfg.checkpoint_path.empty())
        throw vmr::ConfigError("a checkpoint path is required (--checkpoint)");
    vmr::Checkpoint ck = vmr::load_checkpoint_file(cfg.checkpoint_path);
    if (ck.model.dims.d_in != ds.d_in)
        throw vmr::DataError("checkpoint feature width does not match dataset");
    return ck;
}

// First other video sharing the query's class; the natural reference when
// none is named.
std::size_t default_reference(const vmr::Dataset& ds, std::size_t query) {
    for (std::size_t i = 0; i < ds.videos.size(); ++i)
        if (i != query && ds.videos[i].class_id == ds.videos[query].class_id) return i;
    throw vmr::DataError("no other video shares the query's class");
}

int cmd_gen_data(const CommonArgs& args) {
    const vmr::RunConfig cfg = load_config(args);
    if (args.out_path.empty()) throw vmr::ConfigError("gen-data: --out is required");
    const vmr::Dataset ds = vmr::generate_synthetic_dataset(cfg.gen, cfg.seed);
    vmr::save_dataset(ds, args.out_path);
    std::cout << "wrote " << ds.videos.size() << " videos (" << ds.train_classes.size()
              << " train / " << ds.test_classes.size() << " test classes) to "
              << args.out_path << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    vmr::RunConfig cfg = load_config(args);
    if (!args.out_path.empty()) cfg.checkpoint_path = args.out_path;
    if (cfg.checkpoint_path.empty())
        throw vmr::ConfigError("train: a checkpoint output path is required (--out)");
    const vmr::Dataset ds = load_or_generate(cfg);
    vmr::Trainer trainer(ds, cfg);
    const auto& log = trainer.run();
    for (std::size_t e = 0; e < log.size(); ++e)
        std::printf("epoch %3zu  sparsity %.6f  triplet %.6f  regression %.6f\n", e + 1,
                    log[e].sparsity, log[e].triplet, log[e].regression);
    vmr::save_checkpoint_file(cfg.checkpoint_path, trainer.model(),
                              trainer.optimizer_states(), cfg.hp);
    std::cout << "wrote checkpoint to " << cfg.checkpoint_path << "\n";
    return 0;
}

int cmd_eval(const CommonArgs& args) {
    const vmr::RunConfig cfg = load_config(args);
    const vmr::Dataset ds = load_or_generate(cfg);
    const vmr::Checkpoint ck = load_checkpoint_for(cfg, ds);
    const vmr::EvalReport rep = vmr::evaluate(ck.model, ds, cfg);
    const std::string table = vmr::format_eval_table(rep);
    std::cout << table;
    std::cout << "queries\t" << rep.num_queries << "\n";
    if (!args.out_path.empty()) {
        std::ofstream os(args.out_path);
        if (!os) throw vmr::IoError("cannot open report file: " + args.out_path);
        os << table;
    }
    return 0;
}

int cmd_retrieve(const CommonArgs& args, std::size_t query, std::int64_t ref) {
    const vmr::RunConfig cfg = load_config(args);
    const vmr::Dataset ds = load_or_generate(cfg);
    const vmr::Checkpoint ck = load_checkpoint_for(cfg, ds);
    if (query >= ds.videos.size()) throw vmr::DataError("retrieve: query index out of range");
    const std::size_t ref_idx =
        ref < 0 ? default_reference(ds, query) : static_cast<std::size_t>(ref);
    if (ref_idx >= ds.videos.size()) throw vmr::DataError("retrieve: ref index out of range");
    const vmr::SyntheticVideo& qv = ds.videos[query];
    const vmr::SyntheticVideo& rv = ds.videos[ref_idx];
    const vmr::Matrix q =
        vmr::resample(vmr::extract_clip(qv.features, qv.gt), ck.model.dims.t);
    const vmr::RetrieveResult res = vmr::retrieve(q, rv, ck.model, cfg.thresholds);
    std::printf("proposals %zu  selected %zu  score %.6f\n", res.proposals.size(),
                res.proposal_index, res.scores[res.proposal_index]);
    std::printf("segment %.4f %.4f  tiou_vs_gt %.4f\n", res.segment.start, res.segment.end,
                vmr::tiou(res.segment, rv.gt));
    return 0;
}

int cmd_dump_adj(const CommonArgs& args, std::size_t query, std::int64_t ref) {
    const vmr::RunConfig cfg = load_config(args);
    if (args.out_path.empty()) throw vmr::ConfigError("dump-adj: --out is required");
    const vmr::Dataset ds = load_or_generate(cfg);
    const vmr::Checkpoint ck = load_checkpoint_for(cfg, ds);
    if (query >= ds.videos.size()) throw vmr::DataError("dump-adj: query index out of range");
    const std::size_t ref_idx =
        ref < 0 ? default_reference(ds, query) : static_cast<std::size_t>(ref);
    if (ref_idx >= ds.videos.size()) throw vmr::DataError("dump-adj: ref index out of range");
    const vmr::SyntheticVideo& qv = ds.videos[query];
    const vmr::SyntheticVideo& rv = ds.videos[ref_idx];
    const vmr::Matrix q =
        vmr::resample(vmr::extract_clip(qv.features, qv.gt), ck.model.dims.t);
    // Pair the query with the reference's best proposal, the same choice
    // training makes for positives.
    const auto proposals = vmr::actionness_grouping(rv.actionness, cfg.thresholds);
    vmr::Segment best = proposals.front();
    double best_v = -1.0;
    for (const auto& pr : proposals) {
        const double v = vmr::tiou(pr, rv.gt);
        if (v > best_v) {
            best_v = v;
            best = pr;
        }
    }
    const vmr::Matrix p =
        vmr::resample(vmr::extract_clip(rv.features, best), ck.model.dims.t);
    vmr::dump_adjacency(ck.model, q, p, args.out_path);
    const std::string base = vmr::strip_suffix(vmr::strip_suffix(args.out_path, ".txt"), ".pgm");
    std::cout << "wrote " << base << ".txt and " << base << ".pgm\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"video moment retrieval with similarity-weighted graph convolution"};
    app.require_subcommand(1);

    CommonArgs gen_args, train_args, eval_args, retrieve_args, dump_args;
    std::size_t query_idx = 0;
    std::int64_t ref_idx = -1;

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
    add_common(gen, gen_args, false, false);

    CLI::App* train = app.add_subcommand("train", "train a model");
    add_common(train, train_args, false, true);

    CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
    add_common(eval, eval_args, true, true);

    CLI::App* retr = app.add_subcommand("retrieve", "retrieve the matching segment for one pair");
    add_common(retr, retrieve_args, true, true);
    retr->add_option("--query", query_idx, "query video index");
    retr->add_option("--ref", ref_idx, "reference video index (default: first same-class)");

    CLI::App* dump = app.add_subcommand("dump-adj", "dump a pair's adjacency matrix");
    add_common(dump, dump_args, true, true);
    dump->add_option("--query", query_idx, "query video index");
    dump->add_option("--ref", ref_idx, "reference video index (default: first same-class)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_data(gen_args);
        if (train->parsed()) return cmd_train(train_args);
        if (eval->parsed()) return cmd_eval(eval_args);
        if (retr->parsed()) return cmd_retrieve(retrieve_args, query_idx, ref_idx);
        if (dump->parsed()) return cmd_dump_adj(dump_args, query_idx, ref_idx);
    } catch (const vmr::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const vmr::InvalidInput& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const vmr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const vmr::IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 3;
    } catch (const vmr::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
