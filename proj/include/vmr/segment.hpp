#pragma once

#include <algorithm>

#include "vmr/errors.hpp"

namespace vmr {

// Temporal interval on the feature-step axis, end exclusive.
struct Segment {
    double start = 0.0;
    double end = 0.0;

    double loc() const { return 0.5 * (start + end); }
    double len() const { return end - start; }

    friend bool operator==(const Segment& a, const Segment& b) {
        return a.start == b.start && a.end == b.end;
    }
};

inline Segment make_segment(double start, double end) {
    if (!(end > start)) throw InvalidInput("segment: end must exceed start");
    if (start < 0.0) throw InvalidInput("segment: start must be nonnegative");
    return {start, end};
}

// Temporal intersection over union; 0 for disjoint intervals.
inline double tiou(const Segment& a, const Segment& b) {
    const double inter =
        std::max(0.0, std::min(a.end, b.end) - std::max(a.start, b.start));
    if (inter <= 0.0) return 0.0;
    const double uni = a.len() + b.len() - inter;
    return inter / uni;
}

}  // namespace vmr
