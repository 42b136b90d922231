#include "rcr/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>

#include "rcr/errors.hpp"

namespace rcr {

double path_length(const IntervalGraph& g, const PathObj& p) {
    double total = 0.0;
    for (int nid : p.nodes) {
        if (nid != PathObj::ghost_id) total += g.nodes()[nid].len;
    }
    return total;
}

std::vector<double> coarse_runs(const IntervalGraph& g, const PathObj& p) {
    std::vector<double> runs;
    int prev_site = -2;  // -2: none, -1: ghost
    for (int nid : p.nodes) {
        if (nid == PathObj::ghost_id) {
            runs.push_back(0.0);
            prev_site = -1;
            continue;
        }
        const auto& n = g.nodes()[nid];
        if (n.site == prev_site) {
            runs.back() += n.len;
        } else {
            runs.push_back(n.len);
        }
        prev_site = n.site;
    }
    return runs;
}

namespace {

// -1: p first (p precedes q), +1: q first, 0: equal through the runs.
int compare_paths(const IntervalGraph& g, const PathObj& p, const PathObj& q) {
    const double lp = path_length(g, p), lq = path_length(g, q);
    if (lp < lq) return -1;
    if (lq < lp) return 1;
    const auto rp = coarse_runs(g, p), rq = coarse_runs(g, q);
    for (std::size_t i = 0; i < std::min(rp.size(), rq.size()); ++i) {
        if (rp[i] > rq[i]) return -1;  // longer early run is more conservative
        if (rp[i] < rq[i]) return 1;
    }
    if (rp.size() != rq.size()) return rp.size() < rq.size() ? -1 : 1;
    return 0;
}

}  // namespace

bool precedes(const IntervalGraph& g, const PathObj& p, const PathObj& q) {
    return compare_paths(g, p, q) < 0;
}

namespace {

struct SearchEdge {
    int state;
    int node;  // traversed node (ghost_id for ghost)
    CutRef entry;
};

// Entry cut of the node reached by transition t, given it was entered
// from `state`'s exit cut (or from a start point).
CutRef entry_cut_of(const IntervalGraph& g, const IntervalGraph::Transition& t) {
    if (t.node == PathObj::ghost_id) return {};
    const auto& n = g.nodes()[t.node];
    const int exit_port = t.state % 2;
    const int entry_cut = (exit_port == 0) ? n.cut_end : n.cut_start;
    return {n.site, entry_cut};
}

CutRef exit_cut_of(const IntervalGraph& g, int state) {
    if (state == 2 * (int)g.nodes().size()) return {};
    const auto& n = g.nodes()[state / 2];
    return {n.site, (state % 2 == 0) ? n.cut_start : n.cut_end};
}

}  // namespace

std::vector<PathObj> shortest_unblocked_paths(const IntervalGraph& g, const GhostOrPoint& u,
                                              const GhostOrPoint& v, std::size_t cap) {
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.n_states(), INF);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<QE>> pq;

    auto weight = [&](const IntervalGraph::Transition& t) {
        return t.node == PathObj::ghost_id ? 0.0 : g.nodes()[t.node].len;
    };

    const auto starts = g.start_states(u);
    for (const auto& t : starts) {
        const double w = weight(t);
        if (w < dist[t.state]) {
            dist[t.state] = w;
            pq.push({w, t.state});
        }
    }
    std::vector<IntervalGraph::Transition> next;
    while (!pq.empty()) {
        auto [d, s] = pq.top();
        pq.pop();
        if (d > dist[s]) continue;
        g.transitions(s, next);
        for (const auto& t : next) {
            const double nd = d + weight(t);
            if (nd < dist[t.state]) {
                dist[t.state] = nd;
                pq.push({nd, t.state});
            }
        }
    }

    double best = INF;
    for (int s = 0; s < g.n_states(); ++s) {
        if (g.accepts(s, v)) best = std::min(best, dist[s]);
    }
    if (best == INF) throw no_path_error("minimal_unblocked_path: endpoints not connected");

    // Enumerate all tight walks of total weight `best`, filtered to
    // simple paths (no ground interval repeated).  Ghost-ended paths are
    // recorded only at the explicit ghost element, otherwise each would
    // appear twice (at the arrival exit and again after the ghost step).
    std::vector<PathObj> result;
    PathObj cur;
    std::vector<char> used(g.nodes().size(), 0);

    auto record = [&]() {
        result.push_back(cur);
        if (result.size() > cap)
            throw cap_exceeded_error("minimal_unblocked_path: candidate cap exceeded");
    };

    std::function<void(int, double)> dfs = [&](int state, double d) {
        const bool at_goal =
            v.is_ghost() ? state == g.ghost_state() : g.accepts(state, v);
        if (at_goal && d == best) record();
        g.transitions(state, next);
        const auto steps = next;  // transitions() reuses the buffer
        for (const auto& t : steps) {
            const double nd = d + weight(t);
            if (nd != dist[t.state] || nd > best) continue;
            if (t.node != PathObj::ghost_id && used[t.node]) continue;
            if (t.node == PathObj::ghost_id && cur.nodes.size() &&
                cur.nodes.back() == PathObj::ghost_id)
                continue;  // no two successive ghosts
            cur.nodes.push_back(t.node);
            cur.entries.push_back(entry_cut_of(g, t));
            cur.exits.push_back(exit_cut_of(g, t.state));
            if (t.node != PathObj::ghost_id) used[t.node] = 1;
            dfs(t.state, nd);
            if (t.node != PathObj::ghost_id) used[t.node] = 0;
            cur.nodes.pop_back();
            cur.entries.pop_back();
            cur.exits.pop_back();
        }
    };

    if (u.is_ghost()) {
        cur.nodes.push_back(PathObj::ghost_id);
        cur.entries.push_back({});
        cur.exits.push_back({});
    }
    for (const auto& t : starts) {
        const double w = weight(t);
        if (w != dist[t.state] || w > best) continue;
        cur.nodes.push_back(t.node);
        if (u.is_ghost()) {
            cur.entries.push_back(entry_cut_of(g, t));
        } else {
            cur.entries.push_back(g.cutref_of(*u.point));
        }
        cur.exits.push_back(exit_cut_of(g, t.state));
        used[t.node] = 1;
        dfs(t.state, w);
        used[t.node] = 0;
        cur.nodes.pop_back();
        cur.entries.pop_back();
        cur.exits.pop_back();
    }
    return result;
}

PathObj minimal_unblocked_path(const IntervalGraph& g, const GhostOrPoint& u,
                               const GhostOrPoint& v, std::size_t cap) {
    auto cands = shortest_unblocked_paths(g, u, v, cap);
    if (cands.empty()) throw no_path_error("minimal_unblocked_path: endpoints not connected");
    auto lex_less = [](const PathObj& a, const PathObj& b) { return a.nodes < b.nodes; };
    std::sort(cands.begin(), cands.end(), [&](const PathObj& a, const PathObj& b) {
        const int c = compare_paths(g, a, b);
        if (c != 0) return c < 0;
        return lex_less(a, b);
    });
    PathObj best = cands.front();
    if (cands.size() > 1 && compare_paths(g, cands[0], cands[1]) == 0) best.tie_fallback = true;
    return best;
}

namespace {

// Flip the label value on the arc [a, b) of one circle: toggle jumps at
// both endpoints and flip the base value when the arc contains time 0.
void flip_arc(CircleLabel& cl, double a, double b, double t0, double len, double beta) {
    auto toggle = [&](double t) {
        auto it = std::lower_bound(cl.jumps.begin(), cl.jumps.end(), t);
        if (it != cl.jumps.end() && *it == t) {
            cl.jumps.erase(it);
        } else {
            cl.jumps.insert(it, t);
        }
    };
    if (a != b) {
        toggle(a);
        toggle(b);
    }
    double off = (t0 == 0.0) ? 0.0 : beta - t0;  // position of time 0 in the arc
    if (off < len) cl.base = flipped(cl.base);
}

}  // namespace

PairConfig basic_transformation(const PairConfig& cfg, const IntervalGraph& g, const PathObj& path,
                                const ModelParams& p) {
    PairConfig out = cfg;
    const auto& nodes = g.nodes();

    std::set<int> ground_nodes;
    for (int nid : path.nodes) {
        if (nid == PathObj::ghost_id) continue;
        if (nodes[nid].blocked)
            throw std::invalid_argument("basic_transformation: blocked interval on path");
        if (!ground_nodes.insert(nid).second)
            throw std::invalid_argument("basic_transformation: path repeats a ground interval");
    }

    // Flip both labels on every ground interval of the path and migrate
    // marks onto the replica labeled r afterwards.
    for (int nid : ground_nodes) {
        const auto& n = nodes[nid];
        const double a = n.t0;
        double b = n.t0 + n.len;
        if (b >= p.beta) b -= p.beta;
        // exact endpoint times come from the cut table where available
        const double ea = (n.cut_start >= 0) ? g.cuts()[n.site][n.cut_start].time : a;
        const double eb = (n.cut_end >= 0) ? g.cuts()[n.site][n.cut_end].time : b;
        flip_arc(out.nu1.circles[n.site], ea, eb, n.t0, n.len, p.beta);
        flip_arc(out.nu2.circles[n.site], ea, eb, n.t0, n.len, p.beta);

        const Label new1 = flipped(n.l1), new2 = flipped(n.l2);
        // Collect combined marks inside the arc.
        std::vector<double> in_arc;
        for (const auto& src : {cfg.rep1.marks[n.site], cfg.rep2.marks[n.site]}) {
            for (double m : src) {
                double off = m - n.t0;
                if (off < 0.0) off += p.beta;
                if (off < n.len) in_arc.push_back(m);
            }
        }
        if (!in_arc.empty() && !(new1 == Label::r || new2 == Label::r))
            throw std::invalid_argument("basic_transformation: marks on an interval turning (l,l)");
        auto& dst = (new1 == Label::r) ? out.rep1.marks[n.site] : out.rep2.marks[n.site];
        auto& oth = (new1 == Label::r) ? out.rep2.marks[n.site] : out.rep1.marks[n.site];
        for (double m : in_arc) {
            auto it = std::find(oth.begin(), oth.end(), m);
            if (it != oth.end()) {
                oth.erase(it);
                dst.push_back(m);
            }
        }
    }
    for (auto& v : out.rep1.marks) std::sort(v.begin(), v.end());
    for (auto& v : out.rep2.marks) std::sort(v.begin(), v.end());

    // Reassign flip arrivals: each arrival belongs to the replica whose
    // label jumps there.
    const auto es = edges(p);
    auto jumps_at = [](const CircleLabel& cl, double t) {
        return std::binary_search(cl.jumps.begin(), cl.jumps.end(), t);
    };
    const CombinedArrivals comb = cfg.combined(p);
    for (std::size_t e = 0; e < comb.ground.size(); ++e) {
        const int ia = site_index(es[e].a, p), ib = site_index(es[e].b, p);
        out.rep1.ground[e].clear();
        out.rep2.ground[e].clear();
        for (const auto& tt : comb.ground[e]) {
            const bool j1a = jumps_at(out.nu1.circles[ia], tt.time);
            const bool j1b = jumps_at(out.nu1.circles[ib], tt.time);
            const bool j2a = jumps_at(out.nu2.circles[ia], tt.time);
            const bool j2b = jumps_at(out.nu2.circles[ib], tt.time);
            if (j1a != j1b || j2a != j2b || j1a == j2a)
                throw std::invalid_argument("basic_transformation: inconsistent flip ownership");
            (j1a ? out.rep1 : out.rep2).ground[e].push_back(tt.time);
        }
    }
    for (std::size_t i = 0; i < comb.ghost.size(); ++i) {
        out.rep1.ghost[i].clear();
        out.rep2.ghost[i].clear();
        for (const auto& tt : comb.ghost[i]) {
            const bool j1 = jumps_at(out.nu1.circles[i], tt.time);
            const bool j2 = jumps_at(out.nu2.circles[i], tt.time);
            if (j1 == j2)
                throw std::invalid_argument("basic_transformation: inconsistent ghost ownership");
            (j1 ? out.rep1 : out.rep2).ghost[i].push_back(tt.time);
        }
    }

    // Sources change by symmetric difference with the ground endpoints.
    auto endpoint_point = [&](bool front) -> std::optional<Point> {
        if (path.nodes.empty()) return std::nullopt;
        const int nid = front ? path.nodes.front() : path.nodes.back();
        if (nid == PathObj::ghost_id) return std::nullopt;
        const CutRef r = front ? path.entries.front() : path.exits.back();
        const auto& c = g.cut(r);
        if (c.kind != CutKind::special) return std::nullopt;  // ghost-side endpoint
        return g.special()[c.ref];
    };
    auto symdiff = [](SourceSet& s, const Point& pt) {
        auto it = std::find(s.points.begin(), s.points.end(), pt);
        if (it != s.points.end()) {
            s.points.erase(it);
        } else {
            s.points.push_back(pt);
        }
    };
    std::vector<Point> eps;
    if (auto e0 = endpoint_point(true)) eps.push_back(*e0);
    if (auto e1 = endpoint_point(false)) eps.push_back(*e1);
    if (eps.size() == 2 && eps[0] == eps[1]) eps.clear();  // loop: empty difference
    for (const auto& pt : eps) {
        symdiff(out.A, pt);
        symdiff(out.B, pt);
    }
    return out;
}

}  // namespace rcr
