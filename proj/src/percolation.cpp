#include "rcr/percolation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <limits>
#include <queue>
#include <stdexcept>

#include "rcr/rng.hpp"

namespace rcr {

SiteField discretize_marks(const CombinedArrivals& n, const ModelParams& p, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("discretize_marks: delta must be positive");
    const double ratio = p.beta / delta;
    const int slots = (int)std::llround(ratio);
    if (slots < 1 || std::fabs(ratio - slots) > 1e-9 * slots)
        throw std::invalid_argument("discretize_marks: beta/delta must be an integer");
    SiteField f;
    f.delta = delta;
    f.slots = slots;
    f.values.assign(slots, std::vector<double>(p.n_sites(), delta));
    for (std::size_t i = 0; i < n.marks.size(); ++i) {
        for (const auto& tt : n.marks[i]) {
            int k = (int)(tt.time / delta);
            if (k >= slots) k = slots - 1;
            f.values[k][i] = 0.0;
        }
    }
    return f;
}

namespace {

std::vector<std::vector<int>> site_adjacency(const ModelParams& p) {
    std::vector<std::vector<int>> adj(p.n_sites());
    for (const auto& e : edges(p)) {
        const int ia = site_index(e.a, p), ib = site_index(e.b, p);
        adj[ia].push_back(ib);
        adj[ib].push_back(ia);
    }
    return adj;
}

}  // namespace

double passage_time(const SiteField& f, const ModelParams& p, const SlotSite& a,
                    const SlotSite& b) {
    if (a.slot == b.slot && a.site == b.site)
        throw std::invalid_argument("passage_time: endpoints must differ");
    const auto adj = site_adjacency(p);
    const int nsite = p.n_sites();
    const int n = f.slots * nsite;
    auto id = [&](int slot, int site) { return slot * nsite + site; };
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, INF);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;
    dist[id(a.slot, a.site)] = f.values[a.slot][a.site];
    pq.push({dist[id(a.slot, a.site)], id(a.slot, a.site)});
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        const int slot = v / nsite, site = v % nsite;
        auto relax = [&](int s2, int i2) {
            const double nd = d + f.values[s2][i2];
            if (nd < dist[id(s2, i2)]) {
                dist[id(s2, i2)] = nd;
                pq.push({nd, id(s2, i2)});
            }
        };
        relax((slot + 1) % f.slots, site);
        relax((slot - 1 + f.slots) % f.slots, site);
        for (int j : adj[site]) relax(slot, j);
    }
    return dist[id(b.slot, b.site)];
}

int graph_distance(const SiteField& f, const ModelParams& p, const SlotSite& a, const SlotSite& b) {
    if (a.slot == b.slot && a.site == b.site)
        throw std::invalid_argument("graph_distance: endpoints must differ");
    const auto adj = site_adjacency(p);
    const int nsite = p.n_sites();
    auto id = [&](int slot, int site) { return slot * nsite + site; };
    std::vector<int> hops(f.slots * nsite, -1);
    std::deque<int> q;
    hops[id(a.slot, a.site)] = 0;
    q.push_back(id(a.slot, a.site));
    while (!q.empty()) {
        const int v = q.front();
        q.pop_front();
        const int slot = v / nsite, site = v % nsite;
        if (slot == b.slot && site == b.site) break;
        auto visit = [&](int s2, int i2) {
            if (hops[id(s2, i2)] < 0) {
                hops[id(s2, i2)] = hops[v] + 1;
                q.push_back(id(s2, i2));
            }
        };
        visit((slot + 1) % f.slots, site);
        visit((slot - 1 + f.slots) % f.slots, site);
        for (int j : adj[site]) visit(slot, j);
    }
    const int h = hops[id(b.slot, b.site)];
    if (h < 0) throw std::runtime_error("graph_distance: endpoints not connected");
    return h + 1;  // points, both endpoints included
}

namespace {

std::pair<double, double> wilson_interval(uint64_t successes, uint64_t n) {
    if (n == 0) return {0.0, 1.0};
    const double z = 1.959963984540054;  // 95%
    const double phat = (double)successes / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

}  // namespace

PercTable percbound_experiment(const ModelParams& p, double delta,
                               const std::vector<std::pair<SlotSite, SlotSite>>& pairs,
                               uint64_t nsamples, uint64_t seed) {
    p.validate();
    if (pairs.empty()) throw std::invalid_argument("percbound: pair list is empty");

    // Combined process of two independent replicas: rate 2 lambda.
    ModelParams doubled = p;
    doubled.lambda = 2.0 * p.lambda;

    std::vector<uint64_t> hits(pairs.size(), 0);
    std::vector<int> dd(pairs.size(), 0);
    {
        // Distances do not depend on the field values.
        CombinedArrivals none;
        none.ground.resize(edges(p).size());
        none.ghost.resize(p.n_sites());
        none.marks.resize(p.n_sites());
        const SiteField f0 = discretize_marks(none, p, delta);
        for (std::size_t k = 0; k < pairs.size(); ++k)
            dd[k] = graph_distance(f0, p, pairs[k].first, pairs[k].second);
    }

    for (uint64_t i = 0; i < nsamples; ++i) {
        const Arrivals a = sample_arrivals(doubled, derive_seed(seed, i));
        CombinedArrivals c;
        c.ground.resize(a.ground.size());
        c.ghost.resize(a.ghost.size());
        c.marks.resize(a.marks.size());
        for (std::size_t s = 0; s < a.marks.size(); ++s) {
            for (double t : a.marks[s]) c.marks[s].push_back({t, Replica::one});
        }
        const SiteField f = discretize_marks(c, p, delta);
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            const double T = passage_time(f, p, pairs[k].first, pairs[k].second);
            if (T < 0.5 * delta * dd[k]) ++hits[k];
        }
    }

    PercTable table;
    std::vector<std::pair<double, double>> fit_pts;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        PercRow r;
        r.pair_id = (int)k;
        r.d_delta = dd[k];
        r.frequency = (double)hits[k] / nsamples;
        auto [lo, hi] = wilson_interval(hits[k], nsamples);
        r.ci_low = lo;
        r.ci_high = hi;
        table.rows.push_back(r);
        if (r.frequency > 0.0) fit_pts.push_back({(double)r.d_delta, r.frequency});
    }
    table.positive_rows = (int)fit_pts.size();
    if (fit_pts.size() >= 2) {
        // least squares slope of log f vs d
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (auto [x, v] : fit_pts) {
            const double y = std::log(v);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double n = (double)fit_pts.size();
        const double denom = n * sxx - sx * sx;
        table.fitted_slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    }
    return table;
}

DecayFit decay_fit(const std::vector<std::pair<double, double>>& pts) {
    std::vector<std::pair<double, double>> use;
    for (const auto& [d, v] : pts) {
        if (v > 0.0) use.push_back({d, std::log(v)});
    }
    if (use.size() < 3) throw std::invalid_argument("decay_fit: need at least 3 positive values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = (double)use.size();
    for (auto [x, y] : use) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0;
    const double ybar = sy / n;
    for (auto [x, y] : use) {
        const double fit = intercept + slope * x;
        ss_res += (y - fit) * (y - fit);
        ss_tot += (y - ybar) * (y - ybar);
    }
    DecayFit f;
    f.c1 = -slope;
    f.intercept = intercept;
    f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    f.n_used = (int)use.size();
    return f;
}

std::string perc_csv_header() { return "pair_id,d_delta,frequency,ci_low,ci_high"; }

std::string perc_csv_row(const PercRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g", r.pair_id, r.d_delta, r.frequency,
                  r.ci_low, r.ci_high);
    return buf;
}

}  // namespace rcr
