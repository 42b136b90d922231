#pragma once

// Discretized space-time percolation: the Bernoulli site field driven
// by combined marks, first-passage times over the slot-site graph, the
// passage-time bound experiment, and exponential-decay fitting.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcr/lattice.hpp"
#include "rcr/pointprocess.hpp"

namespace rcr {

/// Per (time slot, site) value in {0, delta}: 0 iff the combined mark
/// process hits the slot [k*delta, (k+1)*delta) on that site.
struct SiteField {
    double delta = 0.0;
    int slots = 0;
    std::vector<std::vector<double>> values;  // [slot][site]
};

struct SlotSite {
    int slot = 0;
    int site = 0;
};

/// Throws when beta/delta is not an integer.
SiteField discretize_marks(const CombinedArrivals& n, const ModelParams& p, double delta);

/// Minimal sum of field values over connected slot-site paths,
/// including both endpoints (Dijkstra).
double passage_time(const SiteField& f, const ModelParams& p, const SlotSite& a, const SlotSite& b);

/// Minimal number of points in a connected path joining a to b,
/// endpoints included.
int graph_distance(const SiteField& f, const ModelParams& p, const SlotSite& a, const SlotSite& b);

struct PercRow {
    int pair_id = 0;
    int d_delta = 0;
    double frequency = 0.0;
    double ci_low = 0.0, ci_high = 0.0;
};

struct PercTable {
    std::vector<PercRow> rows;
    double fitted_slope = 0.0;  // of log(frequency) vs d_delta over positive rows
    int positive_rows = 0;
};

/// Empirical frequencies of {T_delta < (delta/2) d_delta} per pair over
/// samples of the combined mark process (rate 2 lambda per site), with
/// Wilson 95% intervals and a log-linear fit.
PercTable percbound_experiment(const ModelParams& p, double delta,
                               const std::vector<std::pair<SlotSite, SlotSite>>& pairs,
                               uint64_t nsamples, uint64_t seed);

struct DecayFit {
    double c1 = 0.0;         // minus the fitted slope
    double intercept = 0.0;  // log value at distance zero
    double r2 = 0.0;
    int n_used = 0;
};

/// Least-squares fit of log|value| against distance over strictly
/// positive values; throws when fewer than three remain.
DecayFit decay_fit(const std::vector<std::pair<double, double>>& pts);

std::string perc_csv_header();
std::string perc_csv_row(const PercRow& r);

}  // namespace rcr
