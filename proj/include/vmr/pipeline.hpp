#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "vmr/config.hpp"
#include "vmr/data.hpp"
#include "vmr/losses.hpp"
#include "vmr/model.hpp"
#include "vmr/trainer.hpp"

namespace vmr {

// Inverts the offset encoding: len* = len exp(-t_l), loc* = loc - t_c len*.
// The result is clamped to [0, video_len]; pass the default to skip
// clamping.
inline Segment refine(const Segment& proposal, const RegressionOffsets& offsets,
                      double video_len = std::numeric_limits<double>::infinity()) {
    if (!(proposal.len() > 0.0)) throw InvalidInput("refine: proposal length must be positive");
    const double len = proposal.len() * std::exp(-offsets.t_l);
    const double loc = proposal.loc() - offsets.t_c * len;
    double a = loc - 0.5 * len;
    double b = loc + 0.5 * len;
    if (std::isfinite(video_len)) {
        if (b <= 0.0) return {0.0, std::min(len, video_len)};
        if (a >= video_len) return {std::max(0.0, video_len - len), video_len};
        a = std::max(a, 0.0);
        b = std::min(b, video_len);
    }
    return {a, b};
}

struct RetrieveResult {
    Segment segment;                  // refined, clamped to the video
    std::size_t proposal_index = 0;   // argmax of the scores, lowest index on ties
    std::vector<Segment> proposals;   // grouping output, in order
    std::vector<double> scores;       // one per proposal
    RegressionOffsets offsets;        // the selected proposal's predicted offsets
};

// Scores every proposal of the reference video against the query clip,
// selects the argmax and refines its boundary.
inline RetrieveResult retrieve(const Matrix& query, const SyntheticVideo& ref,
                               const ModelParameters& model,
                               std::span<const double> thresholds) {
    RetrieveResult res;
    res.proposals = actionness_grouping(ref.actionness, thresholds);
    if (res.proposals.empty())
        throw DataError("retrieve: reference video produced no proposals");
    res.scores.reserve(res.proposals.size());
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    RegressionOffsets best_offsets;
    for (std::size_t i = 0; i < res.proposals.size(); ++i) {
        const Matrix clip =
            resample(extract_clip(ref.features, res.proposals[i]), model.dims.t);
        const PairScore ps = score_pair(query, clip, model);
        res.scores.push_back(ps.score);
        if (ps.score > best_score) {
            best_score = ps.score;
            best = i;
            best_offsets = ps.offsets;
        }
    }
    res.proposal_index = best;
    res.offsets = best_offsets;
    res.segment = refine(res.proposals[best], best_offsets,
                         static_cast<double>(ref.features.rows()));
    return res;
}

struct EvalReport {
    std::vector<double> grid;
    std::vector<double> accuracy;         // top-1 localization accuracy per threshold
    std::vector<double> chance_accuracy;  // random proposal, no refinement
    std::size_t num_queries = 0;
    double mean_tiou = 0.0;
    double chance_mean_tiou = 0.0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

// Pairs every test-split video's ground-truth clip, as query, with every
// other video of the same (unseen) class as reference. The chance baseline
// reuses the same pairs with a uniformly random proposal pick and no
// refinement.
inline EvalReport evaluate(const ModelParameters& model, const Dataset& ds,
                           const RunConfig& cfg) {
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < ds.videos.size(); ++i)
        if (!ds.is_train_class(ds.videos[i].class_id)) test.push_back(i);
    if (test.empty()) throw DataError("evaluate: empty test split");

    SeededRng chance_rng = SeededRng(cfg.seed).split("chance");
    EvalReport rep;
    rep.grid = cfg.tiou_grid;
    rep.accuracy.assign(rep.grid.size(), 0.0);
    rep.chance_accuracy.assign(rep.grid.size(), 0.0);

    for (std::size_t qi : test) {
        const SyntheticVideo& qv = ds.videos[qi];
        const Matrix query = resample(extract_clip(qv.features, qv.gt), model.dims.t);
        for (std::size_t ri : test) {
            if (ri == qi || ds.videos[ri].class_id != qv.class_id) continue;
            const SyntheticVideo& rv = ds.videos[ri];
            const RetrieveResult res = retrieve(query, rv, model, cfg.thresholds);
            const double tv = tiou(res.segment, rv.gt);
            const std::size_t pick = chance_rng.uniform_index(res.proposals.size());
            const double cv = tiou(res.proposals[pick], rv.gt);
            rep.mean_tiou += tv;
            rep.chance_mean_tiou += cv;
            for (std::size_t g = 0; g < rep.grid.size(); ++g) {
                if (tv >= rep.grid[g]) rep.accuracy[g] += 1.0;
                if (cv >= rep.grid[g]) rep.chance_accuracy[g] += 1.0;
            }
            ++rep.num_queries;
        }
    }
    if (rep.num_queries == 0)
        throw DataError("evaluate: test split has no same-class video pairs");
    const double inv = 1.0 / static_cast<double>(rep.num_queries);
    for (std::size_t g = 0; g < rep.grid.size(); ++g) {
        rep.accuracy[g] *= inv;
        rep.chance_accuracy[g] *= inv;
    }
    rep.mean_tiou *= inv;
    rep.chance_mean_tiou *= inv;
    return rep;
}

// threshold, accuracy, chance accuracy, mean tiou; tab separated, one row
// per grid value.
inline std::string format_eval_table(const EvalReport& rep) {
    std::ostringstream os;
    os << "threshold\taccuracy\tchance_accuracy\tmean_tiou\n";
    char buf[128];
    for (std::size_t g = 0; g < rep.grid.size(); ++g) {
        std::snprintf(buf, sizeof(buf), "%.2f\t%.6f\t%.6f\t%.6f\n", rep.grid[g],
                      rep.accuracy[g], rep.chance_accuracy[g], rep.mean_tiou);
        os << buf;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Adjacency dumps: full-precision text grid plus an 8-bit grayscale PGM with
// entries mapped affinely from [-1, 1] to [0, 255].
// ---------------------------------------------------------------------------

inline std::string strip_suffix(std::string path, std::string_view suffix) {
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        path.erase(path.size() - suffix.size());
    return path;
}

inline void write_adjacency_text(const Matrix& a, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open adjacency text file for writing: " + path);
    os << "vmr-adjacency 1\n" << a.rows() << " " << a.cols() << "\n";
    char buf[64];
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", a(i, j));
            os << buf << (j + 1 == a.cols() ? '\n' : ' ');
        }
    }
    if (!os) throw IoError("failed writing adjacency text file: " + path);
}

inline Matrix load_adjacency_text(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open adjacency text file: " + path);
    std::string tag;
    int version = 0;
    std::size_t rows = 0, cols = 0;
    is >> tag >> version >> rows >> cols;
    if (!is || tag != "vmr-adjacency" || version != 1 || rows == 0 || cols == 0)
        throw IoError("bad adjacency text header in " + path);
    Matrix a(rows, cols);
    for (std::size_t k = 0; k < a.size(); ++k)
        if (!(is >> a.data()[k])) throw IoError("truncated adjacency text file: " + path);
    return a;
}

inline void write_adjacency_pgm(const Matrix& a, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open adjacency image for writing: " + path);
    os << "P5\n" << a.cols() << " " << a.rows() << "\n255\n";
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double v = (a.data()[k] + 1.0) * 0.5 * 255.0;
        const long px = std::lround(std::clamp(v, 0.0, 255.0));
        os.put(static_cast<char>(static_cast<unsigned char>(px)));
    }
    if (!os) throw IoError("failed writing adjacency image: " + path);
}

// Writes <base>.txt and <base>.pgm, where base is `path` without a trailing
// ".txt"/".pgm".
inline void dump_adjacency(const ModelParameters& model, const Matrix& q, const Matrix& p,
                           const std::string& path) {
    const PairScore ps = score_pair(q, p, model);
    std::string base = strip_suffix(strip_suffix(path, ".txt"), ".pgm");
    write_adjacency_text(ps.a_hat, base + ".txt");
    write_adjacency_pgm(ps.a_hat, base + ".pgm");
}

}  // namespace vmr
