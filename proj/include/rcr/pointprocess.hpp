#pragma once

// Sampling and combinatorics of the Poisson processes of flips and
// marks: single-replica sampling (homogeneous and time-inhomogeneous),
// two-replica combination, and exhaustive splitting enumeration.

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "rcr/lattice.hpp"

namespace rcr {

/// One realization of the flip and mark processes for a single replica.
/// Ground flip lists are indexed parallel to edges(params); ghost flips
/// and marks are indexed by site.  All time lists are sorted and the
/// whole configuration holds no duplicate time (almost sure event,
/// enforced).
struct Arrivals {
    std::vector<std::vector<double>> ground;
    std::vector<std::vector<double>> ghost;
    std::vector<std::vector<double>> marks;

    std::size_t n_flips() const;
    std::size_t n_marks() const;
    bool operator==(const Arrivals&) const = default;

    /// Throws if a list is unsorted, a time lies outside [0, beta), or
    /// any time appears twice in the configuration.
    void validate(const ModelParams& p) const;

    std::string to_json(const ModelParams& p) const;
    static Arrivals from_json(const std::string& text, const ModelParams& p);
};

/// Piecewise-constant nonnegative rate per ground edge plus the
/// (homogeneous) ghost and mark rates.  values[k] applies on
/// [times[k], times[k+1]) with times[0] == 0 and an implicit final
/// breakpoint at beta.
struct PiecewiseRate {
    std::vector<double> times{0.0};
    std::vector<double> values{0.0};

    double at(double t) const;
    double max_value() const;
};

struct RateProfile {
    std::vector<PiecewiseRate> ground;  // parallel to edges(params)
    double ghost_rate = 0.0;
    double mark_rate = 0.0;
};

/// Replica tag carried by combined arrivals.
enum class Replica : int { one = 1, two = 2 };

struct TaggedTime {
    double time;
    Replica tag;
    friend bool operator==(const TaggedTime& a, const TaggedTime& b) {
        return a.time == b.time && a.tag == b.tag;
    }
};

/// Tag-preserving union of two replicas' arrivals.
struct CombinedArrivals {
    std::vector<std::vector<TaggedTime>> ground;
    std::vector<std::vector<TaggedTime>> ghost;
    std::vector<std::vector<TaggedTime>> marks;

    std::size_t n_flips() const;
    std::size_t n_marks() const;
};

/// A ground segment: either a full circle of a site, or the arc
/// [t0, t1) on that site's circle (0 <= t0 < t1 <= beta).
struct GroundSegment {
    Site site;
    bool full_circle = false;
    double t0 = 0.0, t1 = 0.0;
};

/// Homogeneous sampling: rate rho*J per ground edge, h per ghost edge,
/// lambda per site, all on the circle of circumference beta.
/// Deterministic given seed.
Arrivals sample_arrivals(const ModelParams& p, uint64_t seed);

/// Ground flips from the given profile via thinning; ghost and mark
/// processes from the profile's homogeneous rates.
Arrivals sample_inhomogeneous(const ModelParams& p, const RateProfile& profile, uint64_t seed);

/// Homogeneous profile rho*J on every ground edge, h and lambda.
RateProfile full_rates(const ModelParams& p);

/// Rate rho*J at times when both edge endpoints lie in region A or both
/// in its complement; 0 otherwise.  Throws on overlapping segments.
RateProfile reduced_rates(const ModelParams& p, const std::vector<GroundSegment>& region);

/// Membership test used by reduced_rates and the label restriction.
bool segment_contains(const std::vector<GroundSegment>& region, const ModelParams& p,
                      const Site& site, double t);

/// Merged, tag-preserving union.  Throws std::invalid_argument on an
/// exact time collision between the replicas.
CombinedArrivals combine(const Arrivals& r1, const Arrivals& r2, const ModelParams& p);

/// Strip tags back into the two replicas.
std::pair<Arrivals, Arrivals> split(const CombinedArrivals& c);

/// Invoke fn on every one of the 2^(#flips + #marks) assignments of the
/// combined arrivals to the two replicas.  Throws if the exponent
/// exceeds cap.
void for_each_splitting(const CombinedArrivals& c,
                        const std::function<void(const Arrivals&, const Arrivals&)>& fn,
                        int cap = 24);

/// Materializing wrapper for small configurations.
std::vector<std::pair<Arrivals, Arrivals>> enumerate_splittings(const CombinedArrivals& c,
                                                                int cap = 24);

}  // namespace rcr
