#include <algorithm>
#include <cmath>
#include <functional>

#include "doctest.h"
#include "rcr/percolation.hpp"
#include "rcr/rng.hpp"
#include "rcr/verification.hpp"

using namespace rcr;

namespace {

CombinedArrivals marks_only(const ModelParams& p, const std::vector<std::pair<int, double>>& ms) {
    CombinedArrivals c;
    c.ground.resize(edges(p).size());
    c.ghost.resize(p.n_sites());
    c.marks.resize(p.n_sites());
    for (auto [site, t] : ms) c.marks[site].push_back({t, Replica::one});
    for (auto& v : c.marks)
        std::sort(v.begin(), v.end(),
                  [](const TaggedTime& a, const TaggedTime& b) { return a.time < b.time; });
    return c;
}

// Exhaustive minimum over simple slot-site paths.
double brute_passage(const SiteField& f, const ModelParams& p, const SlotSite& a,
                     const SlotSite& b) {
    const int nsite = p.n_sites();
    std::vector<std::vector<int>> adj(nsite);
    for (const auto& e : edges(p)) {
        adj[site_index(e.a, p)].push_back(site_index(e.b, p));
        adj[site_index(e.b, p)].push_back(site_index(e.a, p));
    }
    const double INF = 1e18;
    double best = INF;
    std::vector<char> used(f.slots * nsite, 0);
    std::function<void(int, int, double)> dfs = [&](int slot, int site, double acc) {
        if (acc >= best) return;
        if (slot == b.slot && site == b.site) {
            best = acc;
            return;
        }
        auto tryv = [&](int s2, int i2) {
            const int id = s2 * nsite + i2;
            if (used[id]) return;
            used[id] = 1;
            dfs(s2, i2, acc + f.values[s2][i2]);
            used[id] = 0;
        };
        tryv((slot + 1) % f.slots, site);
        tryv((slot - 1 + f.slots) % f.slots, site);
        for (int j : adj[site]) tryv(slot, j);
    };
    used[a.slot * nsite + a.site] = 1;
    dfs(a.slot, a.site, f.values[a.slot][a.site]);
    return best;
}

}  // namespace

TEST_CASE("discretized field basics") {
    const ModelParams p = chain_params(2, 1.0, 0.0, 0.0, 0.5);

    SUBCASE("no marks: every value is delta") {
        const SiteField f = discretize_marks(marks_only(p, {}), p, 0.25);
        CHECK(f.slots == 4);
        for (const auto& row : f.values)
            for (double v : row) CHECK(v == 0.25);
    }
    SUBCASE("a mark zeroes its slot") {
        const SiteField f = discretize_marks(marks_only(p, {{1, 0.3}}), p, 0.25);
        CHECK(f.values[1][1] == 0.0);
        CHECK(f.values[1][0] == 0.25);
        CHECK(f.values[0][1] == 0.25);
    }
    SUBCASE("marks in every slot zero the field") {
        std::vector<std::pair<int, double>> all;
        for (int k = 0; k < 4; ++k)
            for (int s = 0; s < 2; ++s) all.push_back({s, 0.25 * k + 0.01 * (s + 1)});
        const SiteField f = discretize_marks(marks_only(p, all), p, 0.25);
        for (const auto& row : f.values)
            for (double v : row) CHECK(v == 0.0);
    }
    SUBCASE("non-integral beta/delta is rejected") {
        CHECK_THROWS_AS(discretize_marks(marks_only(p, {}), p, 0.3), std::invalid_argument);
    }
    SUBCASE("void probability matches exp(-2 lambda delta)") {
        ModelParams doubled = p;
        doubled.lambda = 2.0 * p.lambda;
        const double delta = 0.25;
        const int n = 10000;
        int voids = 0;
        for (int i = 0; i < n; ++i) {
            const Arrivals a = sample_arrivals(doubled, derive_seed(77, i));
            CombinedArrivals c = marks_only(p, {});
            for (std::size_t s = 0; s < a.marks.size(); ++s)
                for (double t : a.marks[s]) c.marks[s].push_back({t, Replica::one});
            const SiteField f = discretize_marks(c, p, delta);
            voids += f.values[0][0] == delta;
        }
        const double target = std::exp(-2.0 * p.lambda * delta);
        const double se = std::sqrt(target * (1 - target) / n);
        CHECK(std::fabs((double)voids / n - target) <= 4.0 * se);
    }
}

TEST_CASE("passage time and graph distance") {
    const ModelParams p = chain_params(3, 1.0, 0.0, 0.0, 0.3);

    SUBCASE("clean field: adjacent pair costs two deltas over two points") {
        const SiteField f = discretize_marks(marks_only(p, {}), p, 0.25);
        const SlotSite a{0, 0}, b{0, 1};
        CHECK(passage_time(f, p, a, b) == doctest::Approx(0.5));
        CHECK(graph_distance(f, p, a, b) == 2);
    }
    SUBCASE("a zero-valued chain gives zero passage time") {
        // marks cover a whole route from (0,0) to (0,2)
        const SiteField f =
            discretize_marks(marks_only(p, {{0, 0.1}, {1, 0.05}, {2, 0.2}}), p, 0.25);
        CHECK(passage_time(f, p, SlotSite{0, 0}, SlotSite{0, 2}) == 0.0);
    }
    SUBCASE("bounds: T <= delta * d, with equality when no marks") {
        const SiteField clean = discretize_marks(marks_only(p, {}), p, 0.25);
        auto rng = make_rng(4242);
        for (int trial = 0; trial < 100; ++trial) {
            std::uniform_int_distribution<int> slot(0, 3), site(0, 2);
            const SlotSite a{slot(rng), site(rng)};
            SlotSite b{slot(rng), site(rng)};
            if (a.slot == b.slot && a.site == b.site) continue;
            const int d = graph_distance(clean, p, a, b);
            CHECK(passage_time(clean, p, a, b) == doctest::Approx(0.25 * d));
        }
    }
    SUBCASE("Dijkstra equals the brute-force minimum on random fields") {
        auto rng = make_rng(31415);
        std::uniform_real_distribution<double> ud(0.0, 1.0);
        for (int trial = 0; trial < 60; ++trial) {
            SiteField f = discretize_marks(marks_only(p, {}), p, 0.25);
            for (auto& row : f.values)
                for (double& v : row)
                    if (ud(rng) < 0.4) v = 0.0;
            std::uniform_int_distribution<int> slot(0, 3), site(0, 2);
            const SlotSite a{slot(rng), site(rng)};
            SlotSite b{slot(rng), site(rng)};
            if (a.slot == b.slot && a.site == b.site) continue;
            CHECK(passage_time(f, p, a, b) == doctest::Approx(brute_passage(f, p, a, b)));
        }
    }
    SUBCASE("adding marks never increases the passage time") {
        auto rng = make_rng(999);
        std::uniform_real_distribution<double> td(0.0, 1.0);
        std::uniform_int_distribution<int> site(0, 2);
        CombinedArrivals c = marks_only(p, {});
        const SlotSite a{0, 0}, b{2, 2};
        double prev = passage_time(discretize_marks(c, p, 0.25), p, a, b);
        for (int k = 0; k < 20; ++k) {
            c.marks[site(rng)].push_back({td(rng), Replica::one});
            const double now = passage_time(discretize_marks(c, p, 0.25), p, a, b);
            CHECK(now <= prev + 1e-12);
            prev = now;
        }
    }
}

TEST_CASE("percolation bound experiment") {
    SUBCASE("no marks: the strict event never fires") {
        const ModelParams p = chain_params(6, 1.0, 0.0, 0.0, 0.0);
        std::vector<std::pair<SlotSite, SlotSite>> pairs;
        for (int k = 1; k <= 3; ++k) pairs.push_back({SlotSite{0, 0}, SlotSite{0, k}});
        const PercTable t = percbound_experiment(p, 0.25, pairs, 300, 5);
        for (const auto& r : t.rows) CHECK(r.frequency == 0.0);
        CHECK(t.positive_rows == 0);
    }
    SUBCASE("fitted log-slope is negative in the sparse-mark regime") {
        const ModelParams p = chain_params(8, 1.0, 0.0, 0.0, 0.3);
        std::vector<std::pair<SlotSite, SlotSite>> pairs;
        for (int k = 1; k <= 4; ++k) pairs.push_back({SlotSite{0, 0}, SlotSite{0, k}});
        const PercTable t = percbound_experiment(p, 0.125, pairs, 6000, 6);
        REQUIRE(t.rows.size() == 4);
        CHECK(t.rows[0].d_delta == 2);
        CHECK(t.rows[3].d_delta == 5);
        REQUIRE(t.positive_rows >= 2);
        CHECK(t.fitted_slope < 0.0);
        for (const auto& r : t.rows) {
            CHECK(r.ci_low <= r.frequency);
            CHECK(r.frequency <= r.ci_high);
        }
    }
}

TEST_CASE("decay fit") {
    SUBCASE("recovers exact exponential data") {
        std::vector<std::pair<double, double>> pts;
        for (int d = 1; d <= 6; ++d) pts.push_back({(double)d, 1.7 * std::exp(-0.7 * d)});
        const DecayFit f = decay_fit(pts);
        CHECK(f.c1 == doctest::Approx(0.7).epsilon(1e-6));
        CHECK(f.intercept == doctest::Approx(std::log(1.7)).epsilon(1e-6));
        CHECK(f.r2 == doctest::Approx(1.0));
    }
    SUBCASE("constant input fits a flat line") {
        const DecayFit f = decay_fit({{1, 0.5}, {2, 0.5}, {3, 0.5}});
        CHECK(f.c1 == doctest::Approx(0.0));
    }
    SUBCASE("nonpositive values are dropped; too few throws") {
        CHECK_THROWS_AS(decay_fit({{1, 0.5}, {2, -0.1}, {3, 0.0}}), std::invalid_argument);
        const DecayFit f = decay_fit({{1, 0.5}, {2, -0.1}, {3, 0.25}, {4, 0.125}, {5, 0.0625}});
        CHECK(f.n_used == 4);
        CHECK(f.c1 > 0.0);
    }
}
