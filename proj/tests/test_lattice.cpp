#include <cmath>
#include <random>

#include "doctest.h"
#include "rcr/lattice.hpp"
#include "rcr/rng.hpp"

using namespace rcr;

namespace {

ModelParams chain(int N, double beta = 1.0) {
    ModelParams p;
    p.d = 1;
    p.N = N;
    p.beta = beta;
    p.couplings[{1}] = 1.0;
    p.couplings[{-1}] = 1.0;
    p.h = 0.3;
    p.rho = 0.5;
    p.lambda = 0.2;
    return p;
}

}  // namespace

TEST_CASE("jbar on standard coupling maps") {
    CHECK(jbar(chain(3)) == 2.0);

    ModelParams empty = chain(3);
    empty.couplings.clear();
    empty.rho = 0.0;
    CHECK(jbar(empty) == 0.0);

    ModelParams sq;
    sq.d = 2;
    sq.N = 4;
    sq.beta = 1.0;
    for (auto v : std::vector<Displacement>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) sq.couplings[v] = 0.5;
    CHECK(jbar(sq) == 2.0);
}

TEST_CASE("jbar invariant under negating all displacements") {
    ModelParams p = chain(4);
    p.couplings[{1}] = 0.7;
    p.couplings[{-1}] = 0.7;
    ModelParams q = p;
    q.couplings.clear();
    for (const auto& [v, J] : p.couplings) {
        Displacement neg{-v[0]};
        q.couplings[neg] = J;
    }
    CHECK(jbar(p) == jbar(q));
}

TEST_CASE("edge enumeration with wraparound dedup") {
    const auto e3 = edge_set(chain(3));
    CHECK(e3.ground.size() == 3);
    CHECK(e3.ghost.size() == 3);
    for (const auto& e : e3.ground) CHECK(e.coupling == 1.0);

    // N=2: both directions reach the same neighbour; one edge with the
    // summed coupling.
    const auto e2 = edge_set(chain(2));
    CHECK(e2.ground.size() == 1);
    CHECK(e2.ghost.size() == 2);
    CHECK(e2.ground[0].coupling == 2.0);

    ModelParams rho_only = chain(3);
    rho_only.couplings.clear();
    rho_only.rho = 0.0;
    const auto e0 = edge_set(rho_only);
    CHECK(e0.ground.empty());
    CHECK((int)e0.ghost.size() == rho_only.n_sites());
}

TEST_CASE("spacetime distance") {
    const ModelParams p = chain(5, 1.0);
    const Point u{{{0}}, 0.1};
    CHECK(spacetime_distance(u, u, p) == 0.0);
    CHECK(spacetime_distance({{{2}}, 0.1}, {{{2}}, 0.3}, p) == doctest::Approx(0.2));
    CHECK(spacetime_distance({{{0}}, 0.4}, {{{1}}, 0.4}, p) == 1.0);
    // time wraps around the circle
    CHECK(spacetime_distance({{{0}}, 0.05}, {{{0}}, 0.95}, p) == doctest::Approx(0.1));
    // sites wrap around the torus
    CHECK(spacetime_distance({{{0}}, 0.0}, {{{4}}, 0.0}, p) == 1.0);
}

TEST_CASE("spacetime distance is symmetric and satisfies the triangle inequality") {
    const ModelParams p = chain(6, 2.0);
    auto rng = make_rng(41);
    std::uniform_int_distribution<int> sd(0, 5);
    std::uniform_real_distribution<double> td(0.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        const Point a{{{sd(rng)}}, td(rng)}, b{{{sd(rng)}}, td(rng)}, c{{{sd(rng)}}, td(rng)};
        CHECK(spacetime_distance(a, b, p) == spacetime_distance(b, a, p));
        CHECK(spacetime_distance(a, c, p) <=
              spacetime_distance(a, b, p) + spacetime_distance(b, c, p) + 1e-12);
    }
}

TEST_CASE("params JSON round trip and hash stability") {
    const ModelParams p = chain(3, 1.5);
    const ModelParams q = ModelParams::from_json(p.to_json());
    CHECK(q.N == p.N);
    CHECK(q.beta == p.beta);
    CHECK(q.couplings == p.couplings);
    CHECK(q.hash() == p.hash());

    ModelParams r = q;
    r.h += 1e-9;
    CHECK(r.hash() != q.hash());
}

TEST_CASE("params validation rejects bad fields") {
    ModelParams p = chain(3);
    p.beta = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    ModelParams asym = chain(3);
    asym.couplings[{1}] = 2.0;  // breaks J(v) == J(-v)
    CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

    ModelParams zero = chain(3);
    zero.couplings[{0}] = 1.0;
    CHECK_THROWS_AS(zero.validate(), std::invalid_argument);

    CHECK_THROWS_AS(ModelParams::from_json("{\"d\":1}"), std::invalid_argument);
}
