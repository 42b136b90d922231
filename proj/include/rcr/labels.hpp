#pragma once

// Exact counting and enumeration of compatible labels given arrivals
// and a source set.  A label is a piecewise-constant {r,l} map per
// circle, jumping exactly at its sources and flip arrivals, with value
// r at every mark time.

#include <cstdint>
#include <vector>

#include "rcr/lattice.hpp"
#include "rcr/pointprocess.hpp"

namespace rcr {

enum class Label : uint8_t { r, l };

inline Label flipped(Label v) { return v == Label::r ? Label::l : Label::r; }

/// Finite set of points forcing label jumps.
struct SourceSet {
    std::vector<Point> points;
};

/// Label data of one circle: sorted jump times plus the value on the
/// arc containing time 0 (arcs are half-open [t_k, t_{k+1})).
struct CircleLabel {
    std::vector<double> jumps;
    Label base = Label::r;

    Label value_at(double t) const;
    bool operator==(const CircleLabel&) const = default;
};

struct LabelConfig {
    std::vector<CircleLabel> circles;  // indexed by site

    Label value_at(int site_idx, double t) const { return circles[site_idx].value_at(t); }
    bool operator==(const LabelConfig&) const = default;
};

/// Per-site list of incident ground edge indices (into edges(params)).
std::vector<std::vector<int>> build_incidence(const ModelParams& p);

/// Sorted union of A-points on the site's circle, ground flip arrivals
/// of incident edges and the site's ghost flips.  Throws on an exact
/// collision between an A-point and an arrival.
std::vector<double> forced_jumps(const Arrivals& arr, const SourceSet& A, const Site& site,
                                 const ModelParams& p);

/// The <= 2 alternating candidates on one circle that are r at every
/// mark (and at every extra constraint time).  Empty when the forced
/// jump count is odd or no candidate survives.
std::vector<CircleLabel> circle_candidates(const std::vector<double>& jumps,
                                           const std::vector<double>& circle_marks,
                                           const std::vector<double>& r_times = {});

/// Candidate lists for every circle at once.
std::vector<std::vector<CircleLabel>> all_circle_candidates(const Arrivals& arr,
                                                            const SourceSet& A,
                                                            const ModelParams& p,
                                                            const std::vector<Point>& rpoints = {});

/// Number of labels compatible with (arr, A): the product over circles
/// of per-circle candidate counts.
uint64_t count_compatible(const Arrivals& arr, const SourceSet& A, const ModelParams& p);

/// Same, but every candidate must additionally equal r at each rpoint.
/// rpoints must be disjoint from arrivals and from A.
uint64_t count_compatible_with_r_constraints(const Arrivals& arr, const SourceSet& A,
                                             const std::vector<Point>& rpoints,
                                             const ModelParams& p);

/// All compatible labels; throws cap_exceeded_error when the circle
/// count exceeds `cap`.
std::vector<LabelConfig> enumerate_compatible(const Arrivals& arr, const SourceSet& A,
                                              const ModelParams& p, int cap = 20);

/// Re-validates the three compatibility conditions for a full label.
bool is_compatible(const Arrivals& arr, const SourceSet& A, const LabelConfig& nu,
                   const ModelParams& p);

}  // namespace rcr
