#include "rcr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace rcr {

double SingleArc::length(double beta) const {
    double d = t1 - t0;
    if (d <= 0.0) d += beta;
    return d;
}

bool is_blocked(const IntervalGraph::Node& iv) { return iv.blocked; }

CutRef IntervalGraph::cutref_of(const Point& pt) const {
    const int si = site_index(pt.site, params_);
    for (int k = 0; k < (int)cuts_[si].size(); ++k) {
        const Cut& c = cuts_[si][k];
        if (c.kind == CutKind::special && special_[c.ref] == pt) return {si, k};
    }
    throw std::invalid_argument("geometry: point is not in the special set of this graph");
}

CutRef IntervalGraph::partner_of(const CutRef& r) const {
    const Cut& c = cut(r);
    const auto& ends = ground_ends_[c.ref];
    return (ends[0] == r) ? ends[1] : ends[0];
}

void IntervalGraph::relabel(const LabelConfig& nu1, const LabelConfig& nu2) {
    for (auto& n : nodes_) {
        double rep = n.t0 + 0.5 * n.len;
        if (rep >= params_.beta) rep -= params_.beta;
        n.l1 = nu1.value_at(n.site, rep);
        n.l2 = nu2.value_at(n.site, rep);
        n.blocked = (n.l1 == Label::r && n.l2 == Label::r && n.nmarks > 0);
    }
}

void IntervalGraph::relabel_bits(uint64_t bits1, uint64_t bits2) {
    for (std::size_t k = 0; k < nodes_.size(); ++k) {
        auto& n = nodes_[k];
        n.l1 = (bits1 >> k) & 1 ? Label::r : Label::l;
        n.l2 = (bits2 >> k) & 1 ? Label::r : Label::l;
        n.blocked = (n.l1 == Label::r && n.l2 == Label::r && n.nmarks > 0);
    }
}

namespace {

void enter_nodes_at(const IntervalGraph& g, const CutRef& q,
                    std::vector<IntervalGraph::Transition>& out) {
    const auto& c = g.cut(q);
    const int cands[2] = {c.node_below, c.node_above};
    for (int k = 0; k < 2; ++k) {
        int nid = cands[k];
        if (nid < 0) continue;
        if (k == 1 && cands[1] == cands[0]) break;  // wrapped single-cut circle
        const auto& node = g.nodes()[nid];
        if (node.blocked) continue;
        int exit_port;
        if (node.cut_start == q.idx && node.cut_end == q.idx) {
            exit_port = 0;  // wrap node: exits where it entered
        } else if (node.cut_start == q.idx) {
            exit_port = 1;
        } else {
            exit_port = 0;
        }
        out.push_back({2 * nid + exit_port, nid});
    }
}

}  // namespace

void IntervalGraph::transitions(int state, std::vector<Transition>& out,
                                const std::vector<CutRef>* avoid, bool ground_only) const {
    out.clear();
    if (state == ghost_state()) {
        for (const auto& q : ghost_ends_) enter_nodes_at(*this, q, out);
        return;
    }
    const int nid = state / 2;
    const int port = state % 2;
    const Node& X = nodes_[nid];
    const int cidx = (port == 0) ? X.cut_start : X.cut_end;
    if (cidx < 0) return;  // closed circle, no exits
    const CutRef p{X.site, cidx};
    const Cut& c = cut(p);

    bool vert_ok = (c.kind != CutKind::ground_arrival) || policy_ == PassThrough::any_endpoint;
    if (avoid && c.kind == CutKind::special) {
        for (const auto& a : *avoid) {
            if (p == a) vert_ok = false;
        }
    }
    if (vert_ok) enter_nodes_at(*this, p, out);
    if (c.kind == CutKind::ground_arrival) enter_nodes_at(*this, partner_of(p), out);
    if (c.kind == CutKind::ghost_arrival && !ground_only)
        out.push_back({ghost_state(), PathObj::ghost_id});
}

std::vector<IntervalGraph::Transition> IntervalGraph::start_states(const GhostOrPoint& from,
                                                                   const CutRef*) const {
    std::vector<Transition> out;
    if (from.is_ghost()) {
        for (const auto& q : ghost_ends_) enter_nodes_at(*this, q, out);
    } else {
        enter_nodes_at(*this, cutref_of(*from.point), out);
    }
    return out;
}

bool IntervalGraph::accepts(int state, const GhostOrPoint& to) const {
    if (state == ghost_state()) return to.is_ghost();
    const int nid = state / 2;
    const int port = state % 2;
    const Node& X = nodes_[nid];
    const int cidx = (port == 0) ? X.cut_start : X.cut_end;
    if (cidx < 0) return false;
    const Cut& c = cuts_[X.site][cidx];
    if (to.is_ghost()) return c.kind == CutKind::ghost_arrival;
    const CutRef target = cutref_of(*to.point);
    return target.site == X.site && target.idx == cidx;
}

namespace {

bool bfs_connected(const IntervalGraph& g, const GhostOrPoint& u, const GhostOrPoint& v,
                   const std::vector<CutRef>* avoid, bool ground_only) {
    std::vector<char> seen(g.n_states(), 0);
    std::deque<int> queue;
    for (const auto& t : g.start_states(u)) {
        if (seen[t.state]) continue;
        if (g.accepts(t.state, v)) return true;
        seen[t.state] = 1;
        queue.push_back(t.state);
    }
    std::vector<IntervalGraph::Transition> next;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        g.transitions(s, next, avoid, ground_only);
        for (const auto& t : next) {
            if (seen[t.state]) continue;
            if (g.accepts(t.state, v)) return true;
            seen[t.state] = 1;
            queue.push_back(t.state);
        }
    }
    return false;
}

}  // namespace

bool connected_unblocked(const IntervalGraph& g, const GhostOrPoint& u, const GhostOrPoint& v,
                         bool ground_only) {
    return bfs_connected(g, u, v, nullptr, ground_only);
}

bool connected_unblocked_avoiding(const IntervalGraph& g, const GhostOrPoint& u,
                                  const GhostOrPoint& v, const Point& avoid, bool ground_only) {
    const std::vector<CutRef> a{g.cutref_of(avoid)};
    return bfs_connected(g, u, v, &a, ground_only);
}

bool connected_unblocked_avoiding_all(const IntervalGraph& g, const GhostOrPoint& u,
                                      const GhostOrPoint& v, const std::vector<Point>& avoid,
                                      bool ground_only) {
    std::vector<CutRef> refs;
    refs.reserve(avoid.size());
    for (const auto& pt : avoid) refs.push_back(g.cutref_of(pt));
    return bfs_connected(g, u, v, &refs, ground_only);
}

std::vector<int> cluster(const IntervalGraph& g, const GhostOrPoint& start,
                         const std::optional<Point>& avoid, bool ground_only) {
    const std::vector<CutRef> aref = avoid ? std::vector<CutRef>{g.cutref_of(*avoid)}
                                           : std::vector<CutRef>{};
    const std::vector<CutRef>* a = avoid ? &aref : nullptr;
    std::vector<char> seen(g.n_states(), 0);
    std::set<int> members;
    std::deque<int> queue;
    for (const auto& t : g.start_states(start)) {
        if (seen[t.state]) continue;
        seen[t.state] = 1;
        if (t.node != PathObj::ghost_id) members.insert(t.node);
        queue.push_back(t.state);
    }
    std::vector<IntervalGraph::Transition> next;
    while (!queue.empty()) {
        int s = queue.front();
        queue.pop_front();
        g.transitions(s, next, a, ground_only);
        for (const auto& t : next) {
            if (seen[t.state]) continue;
            seen[t.state] = 1;
            if (t.node != PathObj::ghost_id) members.insert(t.node);
            queue.push_back(t.state);
        }
    }
    return {members.begin(), members.end()};
}

namespace {

// Loop existence needs genuine trail search: a breadth-first walk can
// close a "loop" by re-entering the interval it just left through the
// same endpoint, which rule (5) forbids and the path surgery cannot
// invert.  Depth-first with a used-set over ground intervals.
bool loop_dfs(const IntervalGraph& g, int state, const GhostOrPoint& target,
              const std::vector<CutRef>* avoid, std::vector<char>& used, bool last_ghost) {
    std::vector<IntervalGraph::Transition> next;
    g.transitions(state, next, avoid, false);
    for (const auto& t : next) {
        if (t.node == PathObj::ghost_id) {
            if (last_ghost) continue;
            if (loop_dfs(g, t.state, target, avoid, used, true)) return true;
            continue;
        }
        if (used[t.node]) continue;
        if (g.accepts(t.state, target)) return true;
        used[t.node] = 1;
        if (loop_dfs(g, t.state, target, avoid, used, false)) {
            used[t.node] = 0;
            return true;
        }
        used[t.node] = 0;
    }
    return false;
}

}  // namespace

bool has_unblocked_loop(const IntervalGraph& g, const Point& v, const std::optional<Point>& avoid) {
    const std::vector<CutRef> aref = avoid ? std::vector<CutRef>{g.cutref_of(*avoid)}
                                           : std::vector<CutRef>{};
    const std::vector<CutRef>* a = avoid ? &aref : nullptr;
    const GhostOrPoint vtarget = GhostOrPoint::at(v);
    std::vector<char> used(g.nodes().size(), 0);
    for (const auto& t : g.start_states(GhostOrPoint::at(v))) {
        if (g.accepts(t.state, vtarget)) return true;  // wrapped full-circle loop
        used.assign(used.size(), 0);
        used[t.node] = 1;
        if (loop_dfs(g, t.state, vtarget, a, used, false)) return true;
    }
    return false;
}

bool is_pivotal(const IntervalGraph& g, const Point& v, const Point& u) {
    const GhostOrPoint up = GhostOrPoint::at(u);
    if (!connected_unblocked(g, up, GhostOrPoint::ghost())) return false;
    return !connected_unblocked_avoiding(g, up, GhostOrPoint::ghost(), v);
}

bool is_loop_pivotal(const IntervalGraph& g, const Point& v, const Point& u) {
    if (!has_unblocked_loop(g, v)) return false;
    return !has_unblocked_loop(g, v, u);
}

IntervalGraph decompose(const CombinedArrivals& c, const LabelConfig& nu1, const LabelConfig& nu2,
                        const std::vector<Point>& G, const ModelParams& p, PassThrough policy) {
    IntervalGraph g;
    g.params_ = p;
    g.policy_ = policy;
    g.special_ = G;
    const int nsite = p.n_sites();
    const auto es = edges(p);

    struct Event {
        double time;
        CutKind kind;
        int ref;
    };
    std::vector<std::vector<Event>> events(nsite);

    // Global ids for ground and ghost arrivals, in canonical order.
    int n_ground = 0;
    for (std::size_t e = 0; e < c.ground.size(); ++e) {
        const int ia = site_index(es[e].a, p), ib = site_index(es[e].b, p);
        for (const auto& tt : c.ground[e]) {
            events[ia].push_back({tt.time, CutKind::ground_arrival, n_ground});
            events[ib].push_back({tt.time, CutKind::ground_arrival, n_ground});
            ++n_ground;
        }
    }
    int n_ghost = 0;
    for (std::size_t i = 0; i < c.ghost.size(); ++i) {
        for (const auto& tt : c.ghost[i]) {
            events[i].push_back({tt.time, CutKind::ghost_arrival, n_ghost});
            ++n_ghost;
        }
    }
    for (std::size_t k = 0; k < G.size(); ++k) {
        events[site_index(G[k].site, p)].push_back({G[k].time, CutKind::special, (int)k});
    }

    g.cuts_.resize(nsite);
    g.ground_ends_.assign(n_ground, {CutRef{}, CutRef{}});
    g.ghost_ends_.assign(n_ghost, CutRef{});
    g.marks_.resize(nsite);
    for (int si = 0; si < nsite; ++si) {
        auto& ev = events[si];
        std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.time < b.time; });
        for (std::size_t k = 0; k + 1 < ev.size(); ++k) {
            if (ev[k].time == ev[k + 1].time)
                throw std::invalid_argument("decompose: coincident cut points on a circle");
        }
        auto& cl = g.cuts_[si];
        cl.reserve(ev.size());
        for (const auto& e : ev) cl.push_back({e.time, e.kind, e.ref, -1, -1});
    }

    // Nodes: one per cut (arc to the next cut), or a closed circle.
    for (int si = 0; si < nsite; ++si) {
        auto& cl = g.cuts_[si];
        const int k = (int)cl.size();
        if (k == 0) {
            g.nodes_.push_back({si, -1, -1, 0.0, p.beta, Label::r, Label::r, 0, false});
            continue;
        }
        const int base = (int)g.nodes_.size();
        for (int j = 0; j < k; ++j) {
            const double t0 = cl[j].time;
            const double t1 = cl[(j + 1) % k].time;
            double len = t1 - t0;
            if (len <= 0.0) len += p.beta;
            g.nodes_.push_back({si, j, (j + 1) % k, t0, len, Label::r, Label::r, 0, false});
        }
        for (int j = 0; j < k; ++j) {
            cl[j].node_above = base + j;
            cl[j].node_below = base + (j - 1 + k) % k;
        }
    }

    // Arrival endpoint tables.
    for (int si = 0; si < nsite; ++si) {
        const auto& cl = g.cuts_[si];
        for (int j = 0; j < (int)cl.size(); ++j) {
            if (cl[j].kind == CutKind::ground_arrival) {
                auto& ends = g.ground_ends_[cl[j].ref];
                if (ends[0].site < 0)
                    ends[0] = {si, j};
                else
                    ends[1] = {si, j};
            } else if (cl[j].kind == CutKind::ghost_arrival) {
                g.ghost_ends_[cl[j].ref] = {si, j};
            }
        }
    }

    // Combined marks per site and per-node counts.
    for (std::size_t i = 0; i < c.marks.size(); ++i) {
        for (const auto& tt : c.marks[i]) g.marks_[i].push_back(tt.time);
        std::sort(g.marks_[i].begin(), g.marks_[i].end());
    }
    for (auto& n : g.nodes_) {
        const auto& ms = g.marks_[n.site];
        int cnt = 0;
        for (double m : ms) {
            double off = m - n.t0;
            if (off < 0.0) off += p.beta;
            if (off < n.len) ++cnt;
        }
        n.nmarks = cnt;
    }

    // Labels must jump only at cut points, otherwise arcs are not
    // label-constant.
    for (int si = 0; si < nsite; ++si) {
        std::vector<double> cut_times;
        for (const auto& cc : g.cuts_[si]) cut_times.push_back(cc.time);
        std::sort(cut_times.begin(), cut_times.end());
        for (const auto* nu : {&nu1, &nu2}) {
            for (double j : nu->circles[si].jumps) {
                if (!std::binary_search(cut_times.begin(), cut_times.end(), j))
                    throw std::invalid_argument("decompose: label jump off the interval skeleton");
            }
        }
    }

    g.relabel(nu1, nu2);
    return g;
}

std::string dump_json(const IntervalGraph& g) {
    nlohmann::ordered_json j;
    auto narr = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < g.nodes().size(); ++k) {
        const auto& n = g.nodes()[k];
        narr.push_back({{"id", k},
                        {"site", n.site},
                        {"t0", n.t0},
                        {"len", n.len},
                        {"labels", std::string(1, n.l1 == Label::r ? 'r' : 'l') +
                                       std::string(1, n.l2 == Label::r ? 'r' : 'l')},
                        {"nmarks", n.nmarks},
                        {"blocked", n.blocked}});
    }
    j["nodes"] = narr;
    auto carr = nlohmann::ordered_json::array();
    for (int si = 0; si < (int)g.cuts().size(); ++si) {
        for (const auto& c : g.cuts()[si]) {
            const char* kind = c.kind == CutKind::ground_arrival ? "ground"
                               : c.kind == CutKind::ghost_arrival ? "ghost"
                                                                  : "special";
            carr.push_back({{"site", si},
                            {"time", c.time},
                            {"kind", kind},
                            {"below", c.node_below},
                            {"above", c.node_above}});
        }
    }
    j["cuts"] = carr;
    return j.dump(2);
}

LeftPath left_ground_path(const Arrivals& arr, const LabelConfig& nu, const Point& u,
                          const ModelParams& p) {
    const auto inc = build_incidence(p);
    const auto es = edges(p);
    const double beta = p.beta;

    // Per-circle jump lists come from the label itself; compatibility
    // makes them the forced jump set.
    auto jumps_of = [&](int si) -> const std::vector<double>& { return nu.circles[si].jumps; };

    auto interval_label = [&](int si, int k) {
        const auto& J = jumps_of(si);
        const int m = (int)J.size();
        double t0 = J[k], t1 = J[(k + 1) % m];
        double len = t1 - t0;
        if (len <= 0.0) len += beta;
        double rep = t0 + 0.5 * len;
        if (rep >= beta) rep -= beta;
        return nu.value_at(si, rep);
    };

    // Classify an exit point: ghost arrival, or ground arrival with the
    // partner circle.
    auto classify = [&](int si, double t) -> std::pair<int, int> {
        // returns {-2, 0} for ghost, {-1, 0} unknown, else {edge, partner site}
        const auto& gh = arr.ghost[si];
        if (std::binary_search(gh.begin(), gh.end(), t)) return {-2, 0};
        for (int e : inc[si]) {
            const auto& ts = arr.ground[e];
            if (std::binary_search(ts.begin(), ts.end(), t)) {
                const int ia = site_index(es[e].a, p), ib = site_index(es[e].b, p);
                return {e, ia == si ? ib : ia};
            }
        }
        return {-1, 0};
    };

    const int usite = site_index(u.site, p);
    const auto& J0 = jumps_of(usite);
    auto it = std::find(J0.begin(), J0.end(), u.time);
    if (it == J0.end())
        throw std::invalid_argument("left_ground_path: label does not jump at the source point");
    const int m0 = (int)J0.size();
    const int ku = (int)(it - J0.begin());

    // Of the two intervals adjacent to u, exactly one carries l.
    int site = usite;
    int k;  // interval index on the current circle
    if (interval_label(usite, ku) == Label::l) {
        k = ku;
    } else {
        k = (ku - 1 + m0) % m0;
        if (interval_label(usite, k) != Label::l)
            throw std::runtime_error("left_ground_path: no l-labeled interval at the source");
    }
    // Exit through the far endpoint: the end farther from u.
    bool exit_forward = (k == ku);  // entered at the interval's start

    LeftPath path;
    std::set<std::pair<int, int>> visited;
    while (true) {
        if (!visited.insert({site, k}).second)
            throw std::runtime_error("left_ground_path: walk revisited an interval");
        const auto& J = jumps_of(site);
        const int m = (int)J.size();
        if (interval_label(site, k) != Label::l)
            throw std::runtime_error("left_ground_path: walk entered a non-l interval");
        path.arcs.push_back({site, J[k], J[(k + 1) % m]});
        const double exit_t = exit_forward ? J[(k + 1) % m] : J[k];
        auto [cls, partner] = classify(site, exit_t);
        if (cls == -2) {
            path.ends_at_ghost = true;
            return path;
        }
        if (cls == -1)
            throw std::runtime_error("left_ground_path: exit point is not an arrival");
        // Hop to the partner circle; enter its l-labeled side of exit_t.
        const auto& Jp = jumps_of(partner);
        auto pit = std::find(Jp.begin(), Jp.end(), exit_t);
        if (pit == Jp.end())
            throw std::runtime_error("left_ground_path: partner circle misses the flip jump");
        const int mp = (int)Jp.size();
        const int kp = (int)(pit - Jp.begin());
        if (interval_label(partner, kp) == Label::l) {
            site = partner;
            k = kp;
            exit_forward = true;
        } else {
            site = partner;
            k = (kp - 1 + mp) % mp;
            if (interval_label(site, k) != Label::l)
                throw std::runtime_error("left_ground_path: no l continuation at flip");
            exit_forward = false;
        }
    }
}

}  // namespace rcr
