#pragma once

// Randomized verification drives: exact switching-identity checks over
// random combined configurations, definitional brute-force label
// counting, and the transformation laws.  Used by the verify-*
// subcommands and the acceptance suite.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rcr/estimators.hpp"
#include "rcr/geometry.hpp"
#include "rcr/labels.hpp"
#include "rcr/lattice.hpp"
#include "rcr/pointprocess.hpp"
#include "rcr/transform.hpp"

namespace rcr {

/// Small one-dimensional chain with nearest-neighbor couplings.
ModelParams chain_params(int N, double beta, double h, double rho, double lambda, int d = 1);

ModelParams random_small_params(std::mt19937_64& rng);

/// Uniformly placed collision-free combined configuration with at most
/// max_arrivals flips plus marks.
CombinedArrivals random_combined(const ModelParams& p, int max_arrivals, std::mt19937_64& rng);

/// Random point avoiding every arrival time of c and every point in
/// `used`.
Point random_point(const ModelParams& p, const CombinedArrivals& c, const std::vector<Point>& used,
                   std::mt19937_64& rng);

struct SwitchCheckRow {
    int config_id;
    SwitchVariant variant;
    uint64_t lhs, rhs;
    std::size_t arrivals;
};

struct SwitchingSummary {
    std::vector<SwitchCheckRow> rows;
    int failures = 0;
};

SwitchingSummary verify_switching(int nconfigs, int max_arrivals, uint64_t seed,
                                  PassThrough policy = PassThrough::any_endpoint);

/// Definitional count: enumerate the alternating candidates per circle
/// as explicit labels and check the compatibility conditions pointwise.
/// Independent of the product-count implementation.
uint64_t brute_force_label_count(const Arrivals& arr, const SourceSet& A,
                                 const std::vector<Point>& rpoints, const ModelParams& p);

struct LabelSummary {
    int n = 0;
    int failures = 0;
};

/// count_compatible (and the r-constrained variant) against the
/// definitional brute force on random instances with at most 6 circles.
LabelSummary verify_labels(int n, uint64_t seed);

struct TransformSummary {
    int n = 0;
    int failures = 0;
    std::vector<std::string> notes;
};

/// Involution, combined invariance, locality, source symmetric
/// difference, blocked-status preservation and minimal-path
/// preservation on random (configuration, unblocked path) instances.
TransformSummary verify_transform(int n, uint64_t seed);

/// A random compatible two-replica configuration with sources {u} and
/// {v}; returns false when none exists for the sampled draw.
struct RandomPair {
    PairConfig cfg;
    Point u, v;
};
bool random_compatible_pair(const ModelParams& p, std::mt19937_64& rng, RandomPair& out);

}  // namespace rcr
