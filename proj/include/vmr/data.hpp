#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vmr/io.hpp"
#include "vmr/matrix.hpp"
#include "vmr/rng.hpp"
#include "vmr/segment.hpp"

namespace vmr {

// One temporal feature sequence, rows are timesteps.
struct FeatureSequence {
    std::string clip_id;
    Matrix features;  // T x d_in
};

// Untrimmed synthetic video: background noise with one class motif planted
// on the ground-truth segment, plus a per-step actionness track.
struct SyntheticVideo {
    int class_id = -1;
    Segment gt;
    std::vector<double> actionness;  // length T_video, values in [0, 1]
    Matrix features;                 // T_video x d_in
};

struct Dataset {
    std::uint32_t t_video = 0;
    std::uint32_t d_in = 0;
    std::vector<SyntheticVideo> videos;
    std::vector<int> train_classes;
    std::vector<int> test_classes;

    bool is_train_class(int c) const {
        return std::find(train_classes.begin(), train_classes.end(), c) != train_classes.end();
    }
};

struct GenSpec {
    std::size_t num_classes = 8;
    std::size_t videos_per_class = 20;
    std::size_t train_class_count = 6;  // first k classes train, rest test
    std::size_t t_video = 120;
    std::size_t d_in = 16;
    double snr = 3.0;                 // motif amplitude over unit noise
    double actionness_noise = 0.14;   // dip inside gt / jitter outside
    std::size_t motif_min = 10;
    std::size_t motif_max = 40;
    std::size_t distractors_per_video = 4;  // moderate actionness bumps off gt

    void validate() const {
        if (num_classes < 2) throw InvalidInput("gen spec: need at least two classes");
        if (videos_per_class < 2)
            throw InvalidInput("gen spec: need at least two videos per class");
        if (train_class_count < 1 || train_class_count >= num_classes)
            throw InvalidInput("gen spec: train classes must leave a nonempty test split");
        if (motif_min < 4) throw InvalidInput("gen spec: motif length must be at least 4");
        if (motif_max < motif_min || motif_max >= t_video)
            throw InvalidInput("gen spec: motif length range infeasible for video length");
        if (d_in == 0 || t_video == 0) throw InvalidInput("gen spec: zero dimensions");
        if (actionness_noise < 0.0 || actionness_noise > 0.5)
            throw InvalidInput("gen spec: actionness noise out of range");
    }
};

// Baseline actionness level outside the ground-truth segment. Spurious runs
// above the lowest grouping threshold come from noise on top of this, which
// is what gives reference videos more than one proposal.
inline constexpr double kActionnessLow = 0.15;

// Each class gets a fixed random unit direction; the motif is that direction
// scaled by a smooth bump envelope over the planted segment, added on unit
// background noise.
inline Dataset generate_synthetic_dataset(const GenSpec& spec, std::uint64_t seed) {
    spec.validate();
    Dataset ds;
    ds.t_video = static_cast<std::uint32_t>(spec.t_video);
    ds.d_in = static_cast<std::uint32_t>(spec.d_in);
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
        if (c < spec.train_class_count) ds.train_classes.push_back(static_cast<int>(c));
        else ds.test_classes.push_back(static_cast<int>(c));
    }

    SeededRng root(seed);
    SeededRng motif_rng = root.split("class-motifs");
    std::vector<std::vector<double>> directions(spec.num_classes,
                                                std::vector<double>(spec.d_in));
    for (auto& dir : directions) {
        double n2 = 0.0;
        for (double& x : dir) {
            x = motif_rng.uniform(-1.0, 1.0);
            n2 += x * x;
        }
        const double inv = std::sqrt(static_cast<double>(spec.d_in)) / std::sqrt(n2);
        for (double& x : dir) x *= inv;  // per-component RMS of 1
    }

    const std::size_t total = spec.num_classes * spec.videos_per_class;
    ds.videos.reserve(total);
    for (std::size_t v = 0; v < total; ++v) {
        SeededRng rng = root.split("video").split(static_cast<std::uint64_t>(v));
        SyntheticVideo vid;
        vid.class_id = static_cast<int>(v / spec.videos_per_class);

        const std::size_t len =
            spec.motif_min + rng.uniform_index(spec.motif_max - spec.motif_min + 1);
        const std::size_t start = rng.uniform_index(spec.t_video - len + 1);
        vid.gt = {static_cast<double>(start), static_cast<double>(start + len)};

        vid.features = Matrix(spec.t_video, spec.d_in);
        for (std::size_t t = 0; t < spec.t_video; ++t)
            for (std::size_t k = 0; k < spec.d_in; ++k) vid.features(t, k) = rng.normal();
        const std::vector<double>& dir = directions[static_cast<std::size_t>(vid.class_id)];
        for (std::size_t t = start; t < start + len; ++t) {
            const double u = (static_cast<double>(t - start) + 0.5) / static_cast<double>(len);
            const double env = 4.0 * u * (1.0 - u);
            for (std::size_t k = 0; k < spec.d_in; ++k)
                vid.features(t, k) += spec.snr * env * dir[k];
        }

        // Actionness jitter is a short moving average of uniforms, so it is
        // temporally correlated: background excursions over the lowest
        // grouping threshold form multi-step runs rather than single-step
        // spikes.
        vid.actionness.resize(spec.t_video);
        std::vector<double> u(spec.t_video + 3);
        for (double& x : u) x = rng.uniform();
        for (std::size_t t = 0; t < spec.t_video; ++t) {
            const bool inside = t >= start && t < start + len;
            const double smooth = 0.25 * (u[t] + u[t + 1] + u[t + 2] + u[t + 3]);
            const double jitter = spec.actionness_noise * smooth;
            const double a = inside ? 1.0 - jitter : kActionnessLow + jitter;
            vid.actionness[t] = std::clamp(a, 0.0, 1.0);
        }
        ds.videos.push_back(std::move(vid));
    }
    return ds;
}

// Maximal runs of consecutive steps with actionness >= threshold, one sweep
// per threshold, deduplicated and sorted by start then length.
inline std::vector<Segment> actionness_grouping(std::span<const double> actionness,
                                                std::span<const double> thresholds) {
    if (actionness.empty()) throw InvalidInput("actionness_grouping: empty signal");
    for (double a : actionness)
        if (a < 0.0 || a > 1.0)
            throw InvalidInput("actionness_grouping: values must lie in [0, 1]");
    for (double th : thresholds)
        if (!(th > 0.0 && th < 1.0))
            throw InvalidInput("actionness_grouping: thresholds must lie strictly in (0, 1)");

    std::vector<Segment> out;
    for (double th : thresholds) {
        std::size_t t = 0;
        while (t < actionness.size()) {
            if (actionness[t] >= th) {
                std::size_t e = t + 1;
                while (e < actionness.size() && actionness[e] >= th) ++e;
                out.push_back({static_cast<double>(t), static_cast<double>(e)});
                t = e;
            } else {
                ++t;
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const Segment& a, const Segment& b) {
        if (a.start != b.start) return a.start < b.start;
        return a.len() < b.len();
    });
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Rows [round(start), round(end)) of a feature matrix.
inline Matrix extract_clip(const Matrix& features, const Segment& seg) {
    const auto s = static_cast<std::size_t>(std::llround(std::max(0.0, seg.start)));
    auto e = static_cast<std::size_t>(std::llround(seg.end));
    e = std::min<std::size_t>(e, features.rows());
    if (e <= s) throw InvalidInput("extract_clip: segment selects no rows");
    Matrix out(e - s, features.cols());
    for (std::size_t i = s; i < e; ++i)
        for (std::size_t k = 0; k < features.cols(); ++k) out(i - s, k) = features(i, k);
    return out;
}

// Uniform index selection with linear interpolation onto t_out rows. Applied
// identically at train and test time.
inline Matrix resample(const Matrix& features, std::size_t t_out) {
    if (t_out < 2) throw InvalidInput("resample: target length must be at least 2");
    const std::size_t n = features.rows(), d = features.cols();
    Matrix out(t_out, d);
    if (n == 1) {
        for (std::size_t t = 0; t < t_out; ++t)
            for (std::size_t k = 0; k < d; ++k) out(t, k) = features(0, k);
        return out;
    }
    const double step = static_cast<double>(n - 1) / static_cast<double>(t_out - 1);
    for (std::size_t t = 0; t < t_out; ++t) {
        const double pos = static_cast<double>(t) * step;
        auto i0 = static_cast<std::size_t>(pos);
        if (i0 >= n - 1) i0 = n - 2;
        const double frac = pos - static_cast<double>(i0);
        for (std::size_t k = 0; k < d; ++k)
            out(t, k) = (1.0 - frac) * features(i0, k) + frac * features(i0 + 1, k);
    }
    return out;
}

// Query clip, same-class positive proposal with its ground truth, and a
// different-class negative proposal, all resampled to a common length.
struct TrainingTriplet {
    FeatureSequence q, p, n;
    Segment p_seg;  // the positive proposal's extent in its video
    Segment p_gt;   // the positive video's ground truth
    int q_class = -1;
    int n_class = -1;
};

namespace detail {

inline std::vector<std::size_t> train_video_indices(const Dataset& ds) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.videos.size(); ++i)
        if (ds.is_train_class(ds.videos[i].class_id)) out.push_back(i);
    return out;
}

inline Segment best_tiou_proposal(const std::vector<Segment>& proposals, const Segment& gt) {
    if (proposals.empty()) throw DataError("no proposals for positive video");
    std::size_t best = 0;
    double best_v = -1.0;
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        const double v = tiou(proposals[i], gt);
        if (v > best_v) {
            best_v = v;
            best = i;
        }
    }
    return proposals[best];
}

}  // namespace detail

// Builds the triplet for a given query video. The positive comes from a
// different same-class video (highest-tiou proposal, so the regression
// targets are meaningful); the negative is the action proposal of a
// uniformly drawn different-class video, selected the same way. Matching
// the two selections keeps the only difference between p and n the motif
// itself, so the score must rely on query-proposal similarity instead of
// memorizing training-class patterns.
inline TrainingTriplet make_triplet(const Dataset& ds, std::size_t q_index, std::size_t t_out,
                                    std::span<const double> thresholds, SeededRng& rng) {
    const SyntheticVideo& qv = ds.videos.at(q_index);
    std::vector<std::size_t> same, diff;
    for (std::size_t i = 0; i < ds.videos.size(); ++i) {
        if (!ds.is_train_class(ds.videos[i].class_id)) continue;
        if (i == q_index) continue;  // no self-retrieval
        if (ds.videos[i].class_id == qv.class_id) same.push_back(i);
        else diff.push_back(i);
    }
    if (same.empty() || diff.empty())
        throw DataError("degenerate dataset: a training triplet needs a same-class and a "
                        "different-class video");

    const std::size_t p_index = same[rng.uniform_index(same.size())];
    const std::size_t n_index = diff[rng.uniform_index(diff.size())];
    const SyntheticVideo& pv = ds.videos[p_index];
    const SyntheticVideo& nv = ds.videos[n_index];

    const std::vector<Segment> p_props = actionness_grouping(pv.actionness, thresholds);
    const std::vector<Segment> n_props = actionness_grouping(nv.actionness, thresholds);
    if (n_props.empty()) throw DataError("no proposals for negative video");

    TrainingTriplet tr;
    tr.q_class = qv.class_id;
    tr.n_class = nv.class_id;
    tr.p_gt = pv.gt;
    tr.p_seg = detail::best_tiou_proposal(p_props, pv.gt);
    const Segment n_seg = detail::best_tiou_proposal(n_props, nv.gt);

    tr.q = {"video" + std::to_string(q_index),
            resample(extract_clip(qv.features, qv.gt), t_out)};
    tr.p = {"video" + std::to_string(p_index),
            resample(extract_clip(pv.features, tr.p_seg), t_out)};
    tr.n = {"video" + std::to_string(n_index),
            resample(extract_clip(nv.features, n_seg), t_out)};
    return tr;
}

// Triplet with a uniformly drawn training query.
inline TrainingTriplet sample_triplet(const Dataset& ds, std::size_t t_out,
                                      std::span<const double> thresholds, SeededRng& rng) {
    const std::vector<std::size_t> train = detail::train_video_indices(ds);
    if (train.empty()) throw DataError("sample_triplet: no training videos");
    return make_triplet(ds, train[rng.uniform_index(train.size())], t_out, thresholds, rng);
}

// ---------------------------------------------------------------------------
// Dataset file format. Binary body plus a plain-text manifest ("<path>.manifest")
// carrying the class split.
//
//   magic   "VMRDAT01"
//   u32     version (1)
//   u32     num videos
//   u32     t_video
//   u32     d_in
//   per video:
//     i32   class_id
//     f64   gt start, gt end
//     f64[t_video]          actionness
//     f64[t_video * d_in]   features, row-major
// ---------------------------------------------------------------------------

inline constexpr std::string_view kDatasetMagic = "VMRDAT01";

inline std::string manifest_path(const std::string& dataset_path) {
    return dataset_path + ".manifest";
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open dataset file for writing: " + path);
    write_magic(os, kDatasetMagic);
    write_u32(os, 1);
    write_u32(os, static_cast<std::uint32_t>(ds.videos.size()));
    write_u32(os, ds.t_video);
    write_u32(os, ds.d_in);
    for (const auto& v : ds.videos) {
        write_i32(os, v.class_id);
        write_f64(os, v.gt.start);
        write_f64(os, v.gt.end);
        for (double a : v.actionness) write_f64(os, a);
        for (std::size_t k = 0; k < v.features.size(); ++k) write_f64(os, v.features.data()[k]);
    }
    if (!os) throw IoError("failed writing dataset file: " + path);

    std::ofstream ms(manifest_path(path));
    if (!ms) throw IoError("cannot open manifest for writing: " + manifest_path(path));
    ms << "vmr-dataset-manifest 1\n";
    ms << "videos " << ds.videos.size() << "\n";
    ms << "t_video " << ds.t_video << "\n";
    ms << "d_in " << ds.d_in << "\n";
    ms << "train_classes";
    for (int c : ds.train_classes) ms << " " << c;
    ms << "\ntest_classes";
    for (int c : ds.test_classes) ms << " " << c;
    ms << "\n";
    if (!ms) throw IoError("failed writing manifest: " + manifest_path(path));
}

inline Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open dataset file: " + path);
    expect_magic(is, kDatasetMagic, "dataset");
    const std::uint32_t version = read_u32(is);
    if (version != 1) throw DataError("unsupported dataset version " + std::to_string(version));
    Dataset ds;
    const std::uint32_t n = read_u32(is);
    ds.t_video = read_u32(is);
    ds.d_in = read_u32(is);
    if (ds.t_video == 0 || ds.d_in == 0) throw DataError("dataset header has zero dimensions");
    ds.videos.resize(n);
    for (auto& v : ds.videos) {
        v.class_id = read_i32(is);
        const double s = read_f64(is);
        const double e = read_f64(is);
        if (!(e > s) || s < 0.0 || e > static_cast<double>(ds.t_video))
            throw DataError("dataset record has invalid ground-truth segment");
        v.gt = {s, e};
        v.actionness.resize(ds.t_video);
        for (double& a : v.actionness) a = read_f64(is);
        v.features = Matrix(ds.t_video, ds.d_in);
        for (std::size_t k = 0; k < v.features.size(); ++k) v.features.data()[k] = read_f64(is);
    }

    std::ifstream ms(manifest_path(path));
    if (!ms) throw DataError("cannot open dataset manifest: " + manifest_path(path));
    std::string line;
    while (std::getline(ms, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "train_classes" || key == "test_classes") {
            auto& dst = (key == "train_classes") ? ds.train_classes : ds.test_classes;
            int c;
            while (ls >> c) dst.push_back(c);
        }
    }
    std::set<int> train(ds.train_classes.begin(), ds.train_classes.end());
    for (int c : ds.test_classes)
        if (train.count(c)) throw DataError("manifest: train and test classes overlap");
    return ds;
}

}  // namespace vmr
