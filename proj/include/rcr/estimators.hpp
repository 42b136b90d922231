#pragma once

// Monte Carlo estimators for the representation formulas and the
// switching-lemma expressions, plus exact per-configuration counting
// verification of the switching identities.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rcr/geometry.hpp"
#include "rcr/labels.hpp"
#include "rcr/lattice.hpp"
#include "rcr/pointprocess.hpp"

namespace rcr {

enum class ObsKind {
    sz,
    szsz,
    sigx,
    sigxsigx,
    szsigx,
    trunc_zz,
    trunc_xx,
    trunc_zx,
    triple,
    crossmany,
    partition
};

const char* obs_kind_name(ObsKind k);
ObsKind obs_kind_from_name(const std::string& s);

struct Observable {
    ObsKind kind;
    std::vector<Point> points;
};

/// Ratio-estimator result.  stderr_ is a 50-block jackknife error of
/// the ratio; results are reproducible from (seed, nsamples) and
/// independent of the worker count.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    uint64_t nsamples = 0;
    uint64_t seed = 0;
    std::string observable;
};

/// Single-replica ratio estimator of the representation formulas
/// (means of sourced / r-constrained label counts over the
/// unconstrained count).  `partition` estimates the normalized
/// partition function as a plain mean.
Estimate estimate(const ModelParams& p, const Observable& obs, uint64_t nsamples, uint64_t seed,
                  int nthreads = 1);

/// Two-replica estimators of the truncated correlations in their
/// switching form.  trunc_zx is reported with its leading minus sign.
Estimate estimate_truncated_switch(const ModelParams& p, const Observable& obs, uint64_t nsamples,
                                   uint64_t seed, int nthreads = 1);

/// The difference-of-events form of the truncated x correlation.
Estimate estimate_difference_form_xx(const ModelParams& p, const Point& u, const Point& v,
                                     uint64_t nsamples, uint64_t seed, int nthreads = 1);

/// <sigma^z_0 ; sigma^z_w sigma^z_z> via the two-replica expression
/// with sources {0, w, z} and the not-connected-to-ghost indicator.
Estimate estimate_triple(const ModelParams& p, const Point& w, const Point& z, uint64_t nsamples,
                         uint64_t seed, int nthreads = 1);

/// Truncated <sigma^z_u ; prod Sigma^x_{v_q}> with whole-set
/// pivotality; reported with its leading minus sign.
Estimate estimate_crossmany(const ModelParams& p, const Point& u, const std::vector<Point>& vlist,
                            uint64_t nsamples, uint64_t seed, int nthreads = 1);

enum class SwitchVariant { zz, xx, zx };

/// For a fixed combined configuration, count contributing
/// (splitting, label pair) objects on the product side and on the
/// switched side of the named switching identity.  The transformation
/// bijection forces exact equality.
std::pair<uint64_t, uint64_t> switching_identity_check(const CombinedArrivals& c, const Point& u,
                                                       const Point& v, SwitchVariant variant,
                                                       const ModelParams& p,
                                                       PassThrough policy = PassThrough::any_endpoint);

struct MonotonicityReport {
    Estimate low, high;
    double difference = 0.0;
    double combined_stderr = 0.0;
    bool pass = false;
};

/// Estimates the one-point function under two rate profiles and checks
/// M(high) - M(low) >= -3 combined standard errors.
MonotonicityReport monotonicity_check(const ModelParams& p, const RateProfile& profile_low,
                                      const RateProfile& profile_high, const Point& u,
                                      uint64_t nsamples, uint64_t seed, int nthreads = 1);

struct CondExpReport {
    double lhs = 0.0, lhs_stderr = 0.0;
    double rhs = 0.0, rhs_stderr = 0.0;  // rhs = M_estimate * unsourced mean
    double m_estimate = 0.0, m_stderr = 0.0;
    double slack = 0.0;  // rhs - lhs
    double combined_stderr = 0.0;
    bool pass = false;
};

/// Conditional-decoupling inequality under reduced rates: the sourced,
/// r-constrained restricted-label mean is at most M times the
/// unsourced one.
CondExpReport condexp_check(const ModelParams& p, const std::vector<GroundSegment>& region,
                            const Point& u, const std::vector<Point>& vlist, uint64_t nsamples,
                            uint64_t seed, int nthreads = 1);

/// Count of restricted labels on the complement of `region` compatible
/// with the arrivals there, jumping at `sources`, with value r at each
/// `r_times` point.  Exposed for tests.
uint64_t restricted_label_count(const Arrivals& arr, const ModelParams& p,
                                const std::vector<GroundSegment>& region,
                                const std::vector<Point>& sources,
                                const std::vector<Point>& r_times);

/// CSV row: observable,points,mean,stderr,nsamples,seed,params_hash.
std::string estimate_csv_header();
std::string estimate_csv_row(const Estimate& e, const ModelParams& p);

}  // namespace rcr
