#include <cmath>
#include <set>

#include "doctest.h"
#include "rcr/pointprocess.hpp"
#include "rcr/rng.hpp"

using namespace rcr;

namespace {

ModelParams chain(int N, double beta, double h, double rho, double lambda) {
    ModelParams p;
    p.d = 1;
    p.N = N;
    p.beta = beta;
    p.h = h;
    p.rho = rho;
    p.lambda = lambda;
    p.couplings[{1}] = 1.0;
    p.couplings[{-1}] = 1.0;
    return p;
}

}  // namespace

TEST_CASE("zero rates give empty processes") {
    const ModelParams p0 = chain(3, 1.0, 0.5, 0.5, 0.0);
    const Arrivals a = sample_arrivals(p0, 7);
    for (const auto& m : a.marks) CHECK(m.empty());

    ModelParams pr = chain(3, 1.0, 0.5, 0.0, 0.4);
    const Arrivals b = sample_arrivals(pr, 7);
    for (const auto& g : b.ground) CHECK(g.empty());
}

TEST_CASE("sampling is deterministic given the seed and valid") {
    const ModelParams p = chain(3, 1.3, 0.6, 0.8, 0.5);
    const Arrivals a = sample_arrivals(p, 99);
    const Arrivals b = sample_arrivals(p, 99);
    CHECK(a == b);
    a.validate(p);
    CHECK(sample_arrivals(p, 100).n_flips() + a.n_flips() > 0);
}

TEST_CASE("ghost counts match the Poisson mean beta*h") {
    const ModelParams p = chain(2, 2.0, 0.7, 0.0, 0.0);
    const int n = 10000;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const Arrivals a = sample_arrivals(p, derive_seed(5, i));
        total += a.ghost[0].size();
    }
    const double mean = total / n;
    CHECK(std::fabs(mean - 1.4) <= 4.0 * std::sqrt(1.4 / n));
}

TEST_CASE("per-edge and per-site counts match their rates") {
    const ModelParams p = chain(3, 1.5, 0.4, 0.7, 0.6);
    const int n = 4000;
    double ground = 0, marks = 0;
    for (int i = 0; i < n; ++i) {
        const Arrivals a = sample_arrivals(p, derive_seed(6, i));
        ground += a.ground[0].size();
        marks += a.marks[1].size();
    }
    const double rg = p.rho * 1.0 * p.beta;   // rho * J * beta
    const double rm = p.lambda * p.beta;
    CHECK(std::fabs(ground / n - rg) <= 4.0 * std::sqrt(rg / n));
    CHECK(std::fabs(marks / n - rm) <= 4.0 * std::sqrt(rm / n));
}

TEST_CASE("inhomogeneous sampling: constant profile behaves like the homogeneous one") {
    const ModelParams p = chain(2, 1.0, 0.3, 0.9, 0.2);
    const RateProfile full = full_rates(p);
    const int n = 6000;
    double cnt = 0;
    for (int i = 0; i < n; ++i) cnt += sample_inhomogeneous(p, full, derive_seed(8, i)).ground[0].size();
    const double rate = p.rho * 2.0 * p.beta;  // N=2 doubled edge
    CHECK(std::fabs(cnt / n - rate) <= 4.0 * std::sqrt(rate / n));
}

TEST_CASE("inhomogeneous sampling honors a zero profile") {
    const ModelParams p = chain(2, 1.0, 0.3, 0.9, 0.2);
    RateProfile prof = full_rates(p);
    prof.ground[0].values = {0.0};
    for (int i = 0; i < 50; ++i) CHECK(sample_inhomogeneous(p, prof, i).ground[0].empty());
}

TEST_CASE("reduced rates") {
    const ModelParams p = chain(3, 1.0, 0.3, 0.5, 0.2);

    SUBCASE("empty region keeps full rates") {
        const RateProfile r = reduced_rates(p, {});
        for (std::size_t e = 0; e < r.ground.size(); ++e) {
            CHECK(r.ground[e].at(0.3) == full_rates(p).ground[e].at(0.3));
        }
    }
    SUBCASE("full circle of a site kills its incident edges") {
        const RateProfile r = reduced_rates(p, {{{{1}}, true, 0.0, 0.0}});
        const auto es = edges(p);
        for (std::size_t e = 0; e < es.size(); ++e) {
            const bool incident = es[e].a == Site{{1}} || es[e].b == Site{{1}};
            for (double t : {0.1, 0.5, 0.9}) {
                if (incident) {
                    CHECK(r.ground[e].at(t) == 0.0);
                } else {
                    CHECK(r.ground[e].at(t) == p.rho);
                }
            }
        }
    }
    SUBCASE("segment on one endpoint suppresses the crossing window") {
        const RateProfile r = reduced_rates(p, {{{{1}}, false, 0.2, 0.5}});
        const auto es = edges(p);
        for (std::size_t e = 0; e < es.size(); ++e) {
            const bool incident = es[e].a == Site{{1}} || es[e].b == Site{{1}};
            CHECK(r.ground[e].at(0.3) == (incident ? 0.0 : p.rho));
            CHECK(r.ground[e].at(0.7) == p.rho);
            CHECK(r.ground[e].at(0.1) == p.rho);
        }
    }
    SUBCASE("overlapping segments are rejected") {
        CHECK_THROWS_AS(
            reduced_rates(p, {{{{1}}, false, 0.2, 0.5}, {{{1}}, false, 0.4, 0.6}}),
            std::invalid_argument);
    }
    SUBCASE("a reduced profile with empty region samples like the full one") {
        const RateProfile r = reduced_rates(p, {});
        const Arrivals a = sample_inhomogeneous(p, r, 11);
        const Arrivals b = sample_inhomogeneous(p, full_rates(p), 11);
        CHECK(a == b);
    }
}

TEST_CASE("combine and split") {
    const ModelParams p = chain(2, 1.0, 0.5, 0.5, 0.5);
    const Arrivals r1 = sample_arrivals(p, 21);
    const Arrivals r2 = sample_arrivals(p, 22);
    const CombinedArrivals c = combine(r1, r2, p);
    CHECK(c.n_flips() == r1.n_flips() + r2.n_flips());
    CHECK(c.n_marks() == r1.n_marks() + r2.n_marks());

    const auto [s1, s2] = split(c);
    CHECK(s1 == r1);
    CHECK(s2 == r2);

    Arrivals empty;
    empty.ground.resize(r1.ground.size());
    empty.ghost.resize(r1.ghost.size());
    empty.marks.resize(r1.marks.size());
    const CombinedArrivals conly = combine(r1, empty, p);
    for (const auto& v : conly.ground)
        for (const auto& tt : v) CHECK(tt.tag == Replica::one);

    if (r1.n_flips() + r1.n_marks() > 0) {
        CHECK_THROWS_AS(combine(r1, r1, p), std::invalid_argument);
    }
}

TEST_CASE("splitting enumeration") {
    const ModelParams p = chain(2, 1.0, 0.8, 0.8, 0.8);
    // Construct a combined configuration with exactly 3 flips + 2 marks.
    CombinedArrivals c;
    c.ground.resize(edges(p).size());
    c.ghost.resize(2);
    c.marks.resize(2);
    c.ground[0] = {{0.1, Replica::one}, {0.5, Replica::one}};
    c.ghost[1] = {{0.3, Replica::two}};
    c.marks[0] = {{0.2, Replica::one}};
    c.marks[1] = {{0.7, Replica::two}};

    const auto all = enumerate_splittings(c);
    CHECK(all.size() == 32);  // 2^5

    // all splittings distinct, and each recombines to c's times
    std::set<std::string> seen;
    for (const auto& [a, b] : all) {
        const CombinedArrivals rec = combine(a, b, p);
        CHECK(rec.n_flips() == c.n_flips());
        CHECK(rec.n_marks() == c.n_marks());
        std::string key;
        for (const auto& v : rec.ground)
            for (const auto& tt : v) key += tt.tag == Replica::one ? '1' : '2';
        for (const auto& v : rec.ghost)
            for (const auto& tt : v) key += tt.tag == Replica::one ? '1' : '2';
        for (const auto& v : rec.marks)
            for (const auto& tt : v) key += tt.tag == Replica::one ? '1' : '2';
        CHECK(seen.insert(key).second);
    }

    // combine(split(c)) reproduces c with tags
    {
        const auto [a, b] = split(c);
        const CombinedArrivals rt = combine(a, b, p);
        CHECK(rt.ground == c.ground);
        CHECK(rt.ghost == c.ghost);
        CHECK(rt.marks == c.marks);
    }

    CombinedArrivals empty;
    empty.ground.resize(edges(p).size());
    empty.ghost.resize(2);
    empty.marks.resize(2);
    CHECK(enumerate_splittings(empty).size() == 1);

    CombinedArrivals big = c;
    for (int k = 0; k < 25; ++k) big.marks[0].push_back({0.71 + 0.01 * k, Replica::one});
    CHECK_THROWS_AS(enumerate_splittings(big), std::runtime_error);
}

TEST_CASE("marks of the pair satisfy the FKG sign on covariances") {
    // F = total mark count (increasing), G = 1{no marks in a window}
    // (decreasing): their covariance must not be significantly positive.
    const ModelParams p = chain(2, 1.0, 0.0, 0.0, 0.8);
    const int n = 20000;
    double sf = 0, sg = 0, sfg = 0, sff = 0, sgg = 0;
    for (int i = 0; i < n; ++i) {
        const Arrivals a1 = sample_arrivals(p, derive_seed(31, 2 * i));
        const Arrivals a2 = sample_arrivals(p, derive_seed(31, 2 * i + 1));
        const double F = (double)(a1.n_marks() + a2.n_marks());
        bool clear = true;
        for (const auto* a : {&a1, &a2}) {
            for (double t : a->marks[0]) clear = clear && !(t < 0.25);
        }
        const double G = clear ? 1.0 : 0.0;
        sf += F;
        sg += G;
        sfg += F * G;
        sff += F * F;
        sgg += G * G;
    }
    const double cov = sfg / n - (sf / n) * (sg / n);
    const double vf = sff / n - (sf / n) * (sf / n);
    const double vg = sgg / n - (sg / n) * (sg / n);
    const double se = std::sqrt(vf * vg / n);
    CHECK(cov <= 3.0 * se);
}

TEST_CASE("arrivals JSON round trip is bit-stable") {
    const ModelParams p = chain(3, 1.3, 0.6, 0.8, 0.5);
    const Arrivals a = sample_arrivals(p, 20229);
    const Arrivals b = Arrivals::from_json(a.to_json(p), p);
    CHECK(a == b);
    CHECK(a.to_json(p) == b.to_json(p));
}
