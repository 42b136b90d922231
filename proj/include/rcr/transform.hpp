#pragma once

// Minimal unblocked path selection under the length-then-runs order,
// and the path surgery that exchanges label/mark data between the two
// replicas along an unblocked path.

#include <cstdint>
#include <vector>

#include "rcr/geometry.hpp"
#include "rcr/labels.hpp"
#include "rcr/pointprocess.hpp"

namespace rcr {

/// Two replicas with compatible labels and their source sets.
struct PairConfig {
    LabelConfig nu1, nu2;
    Arrivals rep1, rep2;  // flips and marks of each replica
    SourceSet A, B;

    CombinedArrivals combined(const ModelParams& p) const { return combine(rep1, rep2, p); }
};

/// Sum of Euclidean arc lengths of ground intervals; ghost visits
/// contribute zero.
double path_length(const IntervalGraph& g, const PathObj& p);

/// Coarse-grained run lengths: maximal same-circle runs of ground
/// intervals, ghost visits as zero-length runs.
std::vector<double> coarse_runs(const IntervalGraph& g, const PathObj& p);

/// Strict order: shorter total length first; on exact ties the run
/// sequence that is larger at the first differing position wins (the
/// path staying longest on each successive circle).
bool precedes(const IntervalGraph& g, const PathObj& p, const PathObj& q);

/// The unique minimal unblocked simple path from u to v.  Throws
/// no_path_error when not connected and cap_exceeded_error when the
/// shortest-path enumeration exceeds `cap` candidates.
PathObj minimal_unblocked_path(const IntervalGraph& g, const GhostOrPoint& u,
                               const GhostOrPoint& v, std::size_t cap = 100000);

/// All shortest unblocked simple paths (unranked); exposed for tests.
std::vector<PathObj> shortest_unblocked_paths(const IntervalGraph& g, const GhostOrPoint& u,
                                              const GhostOrPoint& v, std::size_t cap = 100000);

/// Basic path surgery: flip both labels on every ground interval of the
/// path, move marks to the replica labeled r afterwards, reassign flip
/// arrivals so each replica jumps exactly at its own arrivals, and
/// change the source sets by symmetric difference with the path's
/// ground endpoints.  The combined configuration is invariant and the
/// map is an involution.
PairConfig basic_transformation(const PairConfig& cfg, const IntervalGraph& g, const PathObj& path,
                                const ModelParams& p);

}  // namespace rcr
