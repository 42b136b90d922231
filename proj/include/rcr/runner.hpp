#pragma once

// Batch front end shared by the command-line tool and tests:
// configuration, one entry point per experiment, deterministic seeding,
// CSV/JSON artifacts.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcr/lattice.hpp"

namespace rcr {

extern const char* kBuildId;

struct RunConfig {
    ModelParams params;
    std::string command;  // estimate | oracle | verify-switching | verify-labels |
                          // verify-transform | diffineq | percolation | decay-scan | monotonicity
    std::string obs_kind;
    std::vector<Point> obs_points;
    uint64_t nsamples = 10000;
    uint64_t seed = 0;
    bool seed_given = false;
    std::string output;  // CSV path; empty = stdout only
    int workers = 1;
    bool json_summary = false;

    // command-specific knobs (all optional in the JSON document)
    double delta = 0.1;
    int max_distance = 5;
    double rho_low = 0.3, rho_high = 0.6;
    int nconfigs = 500;
    int max_arrivals = 12;

    // scan: Cartesian ranges over scalar parameters
    std::vector<double> scan_h, scan_rho, scan_lambda, scan_beta;

    static RunConfig from_json_file(const std::string& path);
    static RunConfig from_json_text(const std::string& text);
};

/// Executes the configured experiment.  Returns 0 on pass, 1 on check
/// failure; configuration errors throw std::invalid_argument (mapped to
/// exit 2 by the CLI).
int run(RunConfig config);

/// Cartesian product scan: one row per parameter point, resumable via
/// completed-row detection on the params hash.
int scan(RunConfig config);

}  // namespace rcr
