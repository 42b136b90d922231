#include <cmath>

#include "doctest.h"
#include "rcr/errors.hpp"
#include "rcr/estimators.hpp"
#include "rcr/oracle.hpp"
#include "rcr/verification.hpp"

using namespace rcr;

namespace {

ModelParams single(double beta, double h, double lambda) {
    ModelParams p;
    p.d = 1;
    p.N = 1;
    p.beta = beta;
    p.h = h;
    p.lambda = lambda;
    return p;
}

bool within(double value, double target, double se, double nsig = 3.0) {
    return std::fabs(value - target) <= nsig * std::max(se, 1e-300);
}

}  // namespace

TEST_CASE("one-point estimator on the decoupled two-level system") {
    const ModelParams p = single(1.0, 0.5, 0.0);
    const Observable obs{ObsKind::sz, {Point{{{0}}, 0.3}}};
    const Estimate e = estimate(p, obs, 20000, 11);
    CHECK(within(e.mean, std::tanh(0.5), e.stderr_));
}

TEST_CASE("spin-flip symmetry at h = 0") {
    const ModelParams p = chain_params(2, 1.0, 0.0, 0.5, 0.4);
    const Estimate e = estimate(p, {ObsKind::sz, {Point{{{0}}, 0.1}}}, 5000, 12);
    CHECK(within(e.mean, 0.0, e.stderr_));
}

TEST_CASE("estimates are deterministic and thread-count independent") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Observable obs{ObsKind::szsz, {Point{{{0}}, 0.1}, Point{{{1}}, 0.7}}};
    const Estimate a = estimate(p, obs, 4000, 77, 1);
    const Estimate b = estimate(p, obs, 4000, 77, 1);
    const Estimate c = estimate(p, obs, 4000, 77, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
    CHECK(a.mean == c.mean);
    CHECK(a.stderr_ == c.stderr_);
}

TEST_CASE("pair estimators are worker-count independent") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Observable obs{ObsKind::trunc_zz, {Point{{{0}}, 0.1}, Point{{{1}}, 0.7}}};
    const Estimate a = estimate_truncated_switch(p, obs, 3000, 88, 1);
    const Estimate b = estimate_truncated_switch(p, obs, 3000, 88, 2);
    CHECK(a.mean == b.mean);
    CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("partition estimator matches the closed form") {
    const ModelParams p = single(1.0, 0.5, 0.0);
    const Estimate e = estimate(p, {ObsKind::partition, {}}, 20000, 13);
    CHECK(within(e.mean, 1.0 + std::exp(-1.0), e.stderr_));
}

TEST_CASE("single-replica estimators track the oracle on a small chain") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    OracleSystem sys(p);
    const Point u{{{0}}, 0.15}, v{{{1}}, 0.6};
    const uint64_t n = 30000;

    const Estimate sz = estimate(p, {ObsKind::sz, {u}}, n, 21);
    CHECK(within(sz.mean, sys.ordered_correlation({{OpKind::sz, u}}), sz.stderr_));

    const Estimate zz = estimate(p, {ObsKind::szsz, {u, v}}, n, 22);
    CHECK(within(zz.mean, sys.ordered_correlation({{OpKind::sz, u}, {OpKind::sz, v}}), zz.stderr_));

    const Estimate sx = estimate(p, {ObsKind::sigx, {u}}, n, 23);
    CHECK(within(sx.mean, sys.ordered_correlation({{OpKind::sigx, u}}), sx.stderr_));

    const Estimate xx = estimate(p, {ObsKind::sigxsigx, {u, v}}, n, 24);
    CHECK(within(xx.mean, sys.ordered_correlation({{OpKind::sigx, u}, {OpKind::sigx, v}}),
                 xx.stderr_));

    const Estimate zx = estimate(p, {ObsKind::szsigx, {u, v}}, n, 25);
    CHECK(within(zx.mean, sys.ordered_correlation({{OpKind::sz, u}, {OpKind::sigx, v}}),
                 zx.stderr_));
}

TEST_CASE("szsigx rejects coincident points") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point u{{{0}}, 0.15};
    CHECK_THROWS_AS(estimate(p, {ObsKind::szsigx, {u, u}}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(estimate_truncated_switch(p, {ObsKind::trunc_zx, {u, u}}, 10, 1),
                    std::invalid_argument);
}

TEST_CASE("switching identity on empty configurations") {
    const ModelParams p = chain_params(3, 1.0, 0.5, 0.5, 0.5);
    CombinedArrivals c;
    c.ground.resize(edges(p).size());
    c.ghost.resize(p.n_sites());
    c.marks.resize(p.n_sites());

    const Point u{{{0}}, 0.2};
    const Point v_far{{{1}}, 0.6};
    auto [l1, r1] = switching_identity_check(c, u, v_far, SwitchVariant::zz, p);
    CHECK(l1 == 0);
    CHECK(r1 == 0);

    const Point v_same{{{0}}, 0.6};
    auto [l2, r2] = switching_identity_check(c, u, v_same, SwitchVariant::zz, p);
    CHECK(l2 == 0);
    CHECK(r2 == 0);
}

TEST_CASE("switching identities hold on random configurations") {
    const auto s = verify_switching(80, 10, 555);
    CHECK(s.failures == 0);
    uint64_t nonzero = 0;
    for (const auto& r : s.rows) nonzero += (r.lhs > 0);
    CHECK(nonzero > 0);  // the check is not vacuous
}

TEST_CASE("truncated switch estimators agree with the oracle on two sites") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point u{{{0}}, 0.15}, v{{{1}}, 0.6};
    const uint64_t n = 40000;
    OracleSystem sys(p);

    const Estimate zz = estimate_truncated_switch(p, {ObsKind::trunc_zz, {u, v}}, n, 31);
    CHECK(within(zz.mean, sys.truncated(OpKind::sz, u, OpKind::sz, v), zz.stderr_));

    const Estimate xx = estimate_truncated_switch(p, {ObsKind::trunc_xx, {u, v}}, n, 32);
    CHECK(within(xx.mean, sys.truncated(OpKind::sigx, u, OpKind::sigx, v), xx.stderr_));

    const Estimate zx = estimate_truncated_switch(p, {ObsKind::trunc_zx, {u, v}}, n, 33);
    CHECK(within(zx.mean, sys.truncated(OpKind::sz, u, OpKind::sigx, v), zx.stderr_));
    CHECK(zx.mean <= 3.0 * zx.stderr_);  // nonpositive within errors
}

TEST_CASE("difference form equals the loop form and the oracle") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point u{{{0}}, 0.15}, v{{{1}}, 0.6};
    const uint64_t n = 40000;

    const Estimate diff = estimate_difference_form_xx(p, u, v, n, 41);
    const Estimate loop = estimate_truncated_switch(p, {ObsKind::trunc_xx, {u, v}}, n, 42);
    const double comb = std::sqrt(diff.stderr_ * diff.stderr_ + loop.stderr_ * loop.stderr_);
    CHECK(within(diff.mean, loop.mean, comb));

    OracleSystem sys(p);
    CHECK(within(diff.mean, sys.truncated(OpKind::sigx, u, OpKind::sigx, v), diff.stderr_));

    ModelParams decoupled = chain_params(3, 1.0, 0.4, 0.0, 0.3);
    const Estimate far = estimate_difference_form_xx(decoupled, Point{{{0}}, 0.1},
                                                     Point{{{2}}, 0.8}, 20000, 43);
    CHECK(within(far.mean, 0.0, far.stderr_));
}

TEST_CASE("triple correlation estimator") {
    const ModelParams p = chain_params(3, 1.0, 0.4, 0.5, 0.3);
    const Point w{{{1}}, 0.5}, z{{{2}}, 0.5};
    const Estimate e = estimate_triple(p, w, z, 30000, 51);
    CHECK(e.mean >= -3.0 * e.stderr_);  // nonnegative

    OracleSystem sys(p);
    const Point origin{{{0}}, 0.0};
    const double joint = sys.ordered_correlation(
        {{OpKind::sz, origin}, {OpKind::sz, w}, {OpKind::sz, z}});
    const double split = sys.magnetization() *
                         sys.ordered_correlation({{OpKind::sz, w}, {OpKind::sz, z}});
    CHECK(within(e.mean, joint - split, e.stderr_));

    ModelParams frozen = chain_params(3, 1.0, 0.4, 0.0, 0.0);
    const Estimate zero = estimate_triple(frozen, w, z, 20000, 52);
    CHECK(within(zero.mean, 0.0, zero.stderr_, 3.0));
}

TEST_CASE("crossmany reduces to trunc_zx for a single v") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point u{{{0}}, 0.15}, v{{{1}}, 0.6};
    const Estimate em = estimate_crossmany(p, u, {v}, 8000, 61);
    const Estimate tz = estimate_truncated_switch(p, {ObsKind::trunc_zx, {u, v}}, 8000, 61);
    CHECK(em.mean == tz.mean);  // identical indicator and sample stream
    CHECK(em.stderr_ == tz.stderr_);
}

TEST_CASE("crossmany with two insertions stays nonpositive and tracks the oracle") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point v1{{{1}}, 0.2}, v2{{{1}}, 0.9};
    const Point u{{{0}}, 0.5};  // strictly between the two times
    const Estimate e = estimate_crossmany(p, u, {v1, v2}, 60000, 62);
    CHECK(e.mean <= 3.0 * e.stderr_);

    OracleSystem sys(p);
    const double joint = sys.ordered_correlation(
        {{OpKind::sigx, v1}, {OpKind::sz, u}, {OpKind::sigx, v2}});
    const double split =
        sys.magnetization() *
        sys.ordered_correlation({{OpKind::sigx, v1}, {OpKind::sigx, v2}});
    CHECK(within(e.mean, joint - split, e.stderr_));

    CHECK_THROWS_AS(estimate_crossmany(p, u, {v2, v1}, 10, 1), std::invalid_argument);
}

TEST_CASE("monotonicity in the flip rates") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.6, 0.3);
    ModelParams plow = p;
    plow.rho = 0.3;
    const auto rep = monotonicity_check(p, full_rates(plow), full_rates(p),
                                        Point{{{0}}, 0.0}, 20000, 71);
    CHECK(rep.pass);
    CHECK(rep.difference >= -3.0 * rep.combined_stderr);

    // identical profiles: difference compatible with zero
    const auto same = monotonicity_check(p, full_rates(p), full_rates(p), Point{{{0}}, 0.0},
                                         20000, 72);
    CHECK(within(same.difference, 0.0, same.combined_stderr));
}

TEST_CASE("restricted label counting") {
    const ModelParams p = chain_params(2, 1.0, 0.5, 0.5, 0.4);
    Arrivals none;
    none.ground.resize(edges(p).size());
    none.ghost.resize(2);
    none.marks.resize(2);

    SUBCASE("empty region reduces to the ordinary count") {
        CHECK(restricted_label_count(none, p, {}, {}, {}) == count_compatible(none, {}, p));
    }
    SUBCASE("an excised arc leaves one free arc with two candidates") {
        const std::vector<GroundSegment> region{{{{1}}, false, 0.2, 0.6}};
        // circle 0 free (2), circle 1 one domain arc (2)
        CHECK(restricted_label_count(none, p, region, {}, {}) == 4);
        // r at both boundary points: still 2 candidates per arc minus
        // the one that is l there
        const std::vector<Point> rts{Point{{{1}}, 0.6}, Point{{{1}}, 0.2}};
        CHECK(restricted_label_count(none, p, region, {}, rts) == 2);
    }
    SUBCASE("a full circle in the region drops its factor") {
        const std::vector<GroundSegment> region{{{{1}}, true, 0.0, 0.0}};
        CHECK(restricted_label_count(none, p, region, {}, {}) == 2);
    }
    SUBCASE("sources inside the domain force jumps") {
        const std::vector<GroundSegment> region{{{{1}}, false, 0.2, 0.6}};
        // one source on circle 0: odd parity on a full circle -> 0
        CHECK(restricted_label_count(none, p, region, {Point{{{0}}, 0.5}}, {}) == 0);
        // source on the free arc of circle 1: arcs have no parity rule
        CHECK(restricted_label_count(none, p, region, {Point{{{1}}, 0.8}}, {}) == 4);
    }
}

TEST_CASE("conditional decoupling inequality") {
    const ModelParams p = chain_params(2, 1.0, 0.4, 0.5, 0.3);
    const Point u{{{0}}, 0.0};

    SUBCASE("degenerate empty region") {
        const auto r = condexp_check(p, {}, u, {}, 8000, 81);
        CHECK(r.pass);
    }
    SUBCASE("no marks, full-circle region: reduces to the rate monotonicity") {
        ModelParams p0 = p;
        p0.lambda = 0.0;
        const std::vector<GroundSegment> region{{{{1}}, true, 0.0, 0.0}};
        const auto r = condexp_check(p0, region, u, {}, 8000, 82);
        CHECK(r.pass);
    }
    SUBCASE("arc segments demand their endpoint constraints") {
        const std::vector<GroundSegment> region{{{{1}}, false, 0.2, 0.6}};
        CHECK_THROWS_AS(condexp_check(p, region, u, {}, 10, 85), std::invalid_argument);
    }
    SUBCASE("single excised arc with boundary constraints") {
        const std::vector<GroundSegment> region{{{{1}}, false, 0.2, 0.6}};
        const std::vector<Point> vq{Point{{{1}}, 0.2}, Point{{{1}}, 0.6}};
        const auto r = condexp_check(p, region, u, vq, 8000, 83);
        CHECK(r.pass);
    }
    SUBCASE("u inside the region is rejected") {
        const std::vector<GroundSegment> region{{{{0}}, false, 0.0, 0.5}};
        CHECK_THROWS_AS(condexp_check(p, region, Point{{{0}}, 0.2}, {}, 10, 84),
                        std::invalid_argument);
    }
}

TEST_CASE("truncated estimator signs across a parameter grid") {
    const Point u{{{0}}, 0.15}, v{{{1}}, 0.6};
    int pt = 0;
    for (double h : {0.3, 0.7}) {
        for (double lam : {0.2, 0.5}) {
            const ModelParams p = chain_params(2, 1.0, h, 0.5, lam);
            const uint64_t n = 8000;
            const Estimate zz =
                estimate_truncated_switch(p, {ObsKind::trunc_zz, {u, v}}, n, 900 + pt);
            const Estimate xx =
                estimate_truncated_switch(p, {ObsKind::trunc_xx, {u, v}}, n, 910 + pt);
            const Estimate zx =
                estimate_truncated_switch(p, {ObsKind::trunc_zx, {u, v}}, n, 920 + pt);
            CHECK(zz.mean >= -3.0 * zz.stderr_);
            CHECK(xx.mean >= -3.0 * xx.stderr_);
            CHECK(zx.mean <= 3.0 * zx.stderr_);
            ++pt;
        }
    }
}

TEST_CASE("estimator CSV row shape") {
    const ModelParams p = single(1.0, 0.5, 0.0);
    const Estimate e = estimate(p, {ObsKind::sz, {Point{{{0}}, 0.25}}}, 500, 7);
    CHECK(estimate_csv_header() == "observable,points,mean,stderr,nsamples,seed,params_hash");
    const std::string row = estimate_csv_row(e, p);
    CHECK(row.find("sz,") == 0);
    CHECK(row.find(p.hash()) != std::string::npos);
    CHECK(std::count(row.begin(), row.end(), ',') == 6);
}

TEST_CASE("pair estimators enforce the circle cap") {
    ModelParams big = chain_params(9, 1.0, 0.3, 0.3, 0.3);
    const Point u{{{0}}, 0.1}, v{{{1}}, 0.2};
    CHECK_THROWS_AS(estimate_truncated_switch(big, {ObsKind::trunc_zz, {u, v}}, 10, 1),
                    cap_exceeded_error);
}
