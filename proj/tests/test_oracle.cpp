#include <cmath>

#include "doctest.h"
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

}  // namespace

TEST_CASE("hamiltonian construction") {
    SUBCASE("one site is the exact 2x2 matrix") {
        const auto H = build_hamiltonian(single(1.0, 0.4, 0.6));
        // -H = h sigma^z + lambda (I + sigma^x)/2
        CHECK(H(0, 0) == doctest::Approx(-0.4 - 0.3));
        CHECK(H(1, 1) == doctest::Approx(0.4 - 0.3));
        CHECK(H(0, 1) == doctest::Approx(-0.3));
        CHECK(H(1, 0) == doctest::Approx(-0.3));
    }
    SUBCASE("hermitian for a random chain") {
        const auto H = build_hamiltonian(chain_params(3, 1.0, 0.3, 0.7, 0.4));
        CHECK((H - H.transpose()).norm() == 0.0);
    }
    SUBCASE("classical limit is diagonal") {
        const auto H = build_hamiltonian(chain_params(3, 1.0, 0.3, 0.7, 0.0));
        Eigen::MatrixXd off = H;
        off.diagonal().setZero();
        CHECK(off.norm() == 0.0);
    }
    SUBCASE("dimension cap") {
        ModelParams p = chain_params(13, 1.0, 0.1, 0.1, 0.1);
        CHECK_THROWS_AS(build_hamiltonian(p), std::invalid_argument);
    }
}

TEST_CASE("partition function") {
    // N=1, lambda=0: closed form 1 + exp(-2 beta h)
    for (double h : {0.2, 0.7}) {
        for (double beta : {0.5, 2.0}) {
            const double z = partition_function(single(beta, h, 0.0));
            CHECK(z == doctest::Approx(1.0 + std::exp(-2.0 * beta * h)).epsilon(1e-12));
        }
    }
    // all couplings zero: 2^{N^d}
    ModelParams p0 = chain_params(3, 1.0, 0.0, 0.0, 0.0);
    p0.couplings.clear();
    CHECK(partition_function(p0) == doctest::Approx(8.0).epsilon(1e-12));

    // three-site ring, h = lambda = 0: closed form 2 + 6 e^{-4K} with
    // K = beta * rho * J, pinning the coupling normalization (this also
    // equals the expected compatible-label count of the flip process)
    for (double rho : {0.3, 0.8}) {
        ModelParams ring = chain_params(3, 1.0, 0.0, rho, 0.0);
        const double K = ring.beta * rho;
        CHECK(partition_function(ring) ==
              doctest::Approx(2.0 + 6.0 * std::exp(-4.0 * K)).epsilon(1e-12));
    }
}

TEST_CASE("ordered correlations") {
    const ModelParams p = chain_params(2, 1.2, 0.5, 0.6, 0.4);
    OracleSystem sys(p);

    SUBCASE("no insertions give one") { CHECK(sys.ordered_correlation({}) == doctest::Approx(1.0)); }

    SUBCASE("single insertion is time independent (cyclicity)") {
        const double at0 = sys.ordered_correlation({{OpKind::sz, {{{0}}, 0.0}}});
        for (double t : {0.2, 0.7, 1.1}) {
            CHECK(sys.ordered_correlation({{OpKind::sz, {{{0}}, t}}}) ==
                  doctest::Approx(at0).epsilon(1e-10));
        }
    }
    SUBCASE("two-point function is invariant under global time rotation") {
        const double base = sys.ordered_correlation(
            {{OpKind::sz, {{{0}}, 0.1}}, {OpKind::sigx, {{{1}}, 0.6}}});
        for (double s : {0.1, 0.3}) {
            const double rot = sys.ordered_correlation(
                {{OpKind::sz, {{{0}}, 0.1 + s}}, {OpKind::sigx, {{{1}}, 0.6 + s}}});
            CHECK(rot == doctest::Approx(base).epsilon(1e-10));
        }
    }
    SUBCASE("unsorted times are rejected") {
        CHECK_THROWS_AS(sys.ordered_correlation(
                            {{OpKind::sz, {{{0}}, 0.9}}, {OpKind::sz, {{{1}}, 0.2}}}),
                        std::invalid_argument);
    }
    SUBCASE("the three-insertion path matches the two-point special case") {
        // <A(t1) B(t2)> computed generically with a trivial third insertion
        const Point a{{{0}}, 0.1}, b{{{1}}, 0.6};
        const double two = sys.ordered_correlation({{OpKind::sz, a}, {OpKind::sz, b}});
        const double three = sys.ordered_correlation(
            {{OpKind::sz, a}, {OpKind::sz, b}, {OpKind::sz, {{{1}}, 0.8}}});
        // sanity only: both finite and bounded
        CHECK(std::fabs(two) <= 1.0 + 1e-9);
        CHECK(std::fabs(three) <= 1.0 + 1e-9);
        // sigma^z twice at the same point at equal times is the identity
        const double twice = sys.ordered_correlation(
            {{OpKind::sz, a}, {OpKind::sz, a}, {OpKind::sz, b}});
        const double single_b = sys.ordered_correlation({{OpKind::sz, b}});
        CHECK(twice == doctest::Approx(single_b).epsilon(1e-10));
    }
}

TEST_CASE("magnetization") {
    for (double h : {0.1, 0.5, 1.0}) {
        CHECK(magnetization(single(1.0, h, 0.0)) == doctest::Approx(std::tanh(h)).epsilon(1e-12));
    }
    CHECK(std::fabs(magnetization(chain_params(3, 1.0, 0.0, 0.5, 0.4))) <= 1e-12);
}

TEST_CASE("scaling identity in (h, rho, lambda; beta)") {
    const ModelParams p = chain_params(3, 1.0, 0.4, 0.5, 0.3);
    for (double alpha : {0.5, 2.0}) {
        ModelParams scaled = p;
        scaled.h *= alpha;
        scaled.rho *= alpha;
        scaled.lambda *= alpha;
        ModelParams stretched = p;
        stretched.beta *= alpha;
        CHECK(magnetization(scaled) == doctest::Approx(magnetization(stretched)).epsilon(1e-10));
    }
}

TEST_CASE("truncated correlations") {
    SUBCASE("product states decouple") {
        ModelParams p = chain_params(3, 1.0, 0.5, 0.0, 0.4);
        const Point u{{{0}}, 0.2}, v{{{1}}, 0.6};
        CHECK(std::fabs(truncated(p, TruncKind::zz, u, v)) <= 1e-12);
        CHECK(std::fabs(truncated(p, TruncKind::xx, u, v)) <= 1e-12);
        CHECK(std::fabs(truncated(p, TruncKind::zx, u, v)) <= 1e-12);
    }
    SUBCASE("signs at one representative point") {
        const ModelParams p = chain_params(4, 1.0, 0.5, 0.5, 0.5);
        OracleSystem sys(p);
        const Point u{{{0}}, 0.0}, v{{{2}}, 0.0};
        CHECK(sys.truncated(OpKind::sz, u, OpKind::sz, v) >= -1e-10);
        CHECK(sys.truncated(OpKind::sigx, u, OpKind::sigx, v) >= -1e-10);
        CHECK(sys.truncated(OpKind::sz, u, OpKind::sigx, v) <= 1e-10);
    }
}

TEST_CASE("derivatives: closed form, signs, quadrature cross-check") {
    SUBCASE("one site, classical") {
        const ModelParams p = single(1.0, 0.3, 0.0);
        const Derivatives d = derivatives(p);
        const double expect = p.beta * (1.0 - std::pow(std::tanh(p.beta * p.h), 2));
        CHECK(d.dh == doctest::Approx(expect).epsilon(1e-6));
    }
    SUBCASE("monotonicity signs on a small grid") {
        for (double h : {0.3, 0.8}) {
            for (double lam : {0.2, 0.6}) {
                const ModelParams p = chain_params(3, 1.0, h, 0.5, lam);
                const Derivatives d = derivatives(p);
                CHECK(d.drho >= -1e-8);
                CHECK(d.dlambda <= 1e-8);
            }
        }
    }
    SUBCASE("finite differences track the quadrature route") {
        for (double beta : {0.7, 1.3}) {
            const ModelParams p = chain_params(3, beta, 0.4, 0.5, 0.3);
            const Derivatives d = derivatives(p);
            CHECK(d.max_rel_discrepancy <= 1e-3);
        }
    }
}

TEST_CASE("differential inequality report") {
    SUBCASE("classical reduction at lambda -> 0") {
        ModelParams p = chain_params(3, 1.0, 0.5, 0.5, 0.0);
        const DiffIneqRow r = diffineq_point(p);
        CHECK(r.pass);
        CHECK(r.slack1 >= -1e-6);
    }
    SUBCASE("decoupled sites equal the single-site system") {
        ModelParams p = chain_params(3, 1.0, 0.5, 0.0, 0.4);
        const double m3 = magnetization(p);
        const double m1 = magnetization(single(1.0, 0.5, 0.4));
        CHECK(m3 == doctest::Approx(m1).epsilon(1e-12));
        CHECK(diffineq_point(p).pass);
    }
    SUBCASE("a few grid points pass") {
        const auto rows = diffineq_report(chain_params(3, 1.0, 0.5, 0.5, 0.5), {0.2, 1.0},
                                          {0.5}, {0.2, 1.0}, {1.0});
        CHECK(rows.size() == 4);
        for (const auto& r : rows) {
            CHECK(r.pass);
            CHECK(r.M >= 0.0);
            CHECK(r.M < 1.0);
        }
    }
}

TEST_CASE("log-domain partition function stays finite at large beta") {
    const ModelParams p = chain_params(3, 50.0, 0.5, 0.5, 0.5);
    OracleSystem sys(p);
    CHECK(std::isfinite(sys.log_partition_function()));
    CHECK(partition_function(p) >= 0.0);
}
