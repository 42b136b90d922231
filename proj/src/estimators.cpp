#include "rcr/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "rcr/errors.hpp"
#include "rcr/rng.hpp"

namespace rcr {

const char* obs_kind_name(ObsKind k) {
    switch (k) {
        case ObsKind::sz: return "sz";
        case ObsKind::szsz: return "szsz";
        case ObsKind::sigx: return "sigx";
        case ObsKind::sigxsigx: return "sigxsigx";
        case ObsKind::szsigx: return "szsigx";
        case ObsKind::trunc_zz: return "trunc_zz";
        case ObsKind::trunc_xx: return "trunc_xx";
        case ObsKind::trunc_zx: return "trunc_zx";
        case ObsKind::triple: return "triple";
        case ObsKind::crossmany: return "crossmany";
        case ObsKind::partition: return "partition";
    }
    return "?";
}

ObsKind obs_kind_from_name(const std::string& s) {
    for (ObsKind k : {ObsKind::sz, ObsKind::szsz, ObsKind::sigx, ObsKind::sigxsigx,
                      ObsKind::szsigx, ObsKind::trunc_zz, ObsKind::trunc_xx, ObsKind::trunc_zx,
                      ObsKind::triple, ObsKind::crossmany, ObsKind::partition}) {
        if (s == obs_kind_name(k)) return k;
    }
    throw std::invalid_argument("observable: unknown kind '" + s + "'");
}

namespace {

constexpr int kJackknifeBlocks = 50;

// Threaded deterministic block accumulation: sample i contributes to
// block i * B / n; blocks are combined in index order.
Estimate run_ratio(uint64_t nsamples, uint64_t seed, int nthreads, const std::string& name,
                   const std::function<std::pair<double, double>(uint64_t)>& draw,
                   bool plain_mean = false, double sign = 1.0) {
    if (nsamples == 0) throw std::invalid_argument("estimate: nsamples must be positive");
    const int B = (int)std::min<uint64_t>(kJackknifeBlocks, nsamples);
    std::vector<double> bnum(B, 0.0), bden(B, 0.0);

    std::atomic<int> next_block{0};
    auto worker = [&]() {
        while (true) {
            const int b = next_block.fetch_add(1);
            if (b >= B) break;
            const uint64_t lo = nsamples * b / B, hi = nsamples * (b + 1) / B;
            double ns = 0.0, ds = 0.0;
            for (uint64_t i = lo; i < hi; ++i) {
                auto [n, d] = draw(i);
                ns += n;
                ds += d;
            }
            bnum[b] = ns;
            bden[b] = ds;
        }
    };
    const int nt = std::max(1, std::min<int>(nthreads, B));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    double tn = 0.0, td = 0.0;
    for (int b = 0; b < B; ++b) {
        tn += bnum[b];
        td += bden[b];
    }
    if (plain_mean) {
        td = (double)nsamples;
        for (int b = 0; b < B; ++b) bden[b] = (double)(nsamples * (b + 1) / B - nsamples * b / B);
    }
    if (td == 0.0) throw std::runtime_error("estimate: denominator mean is zero");

    Estimate e;
    e.nsamples = nsamples;
    e.seed = seed;
    e.observable = name;
    e.mean = sign * tn / td;

    // Delete-one-block jackknife of the ratio.
    std::vector<double> theta(B);
    double tbar = 0.0;
    for (int b = 0; b < B; ++b) {
        const double dd = td - bden[b];
        if (dd == 0.0) throw std::runtime_error("estimate: jackknife block denominator is zero");
        theta[b] = sign * (tn - bnum[b]) / dd;
        tbar += theta[b];
    }
    tbar /= B;
    double ss = 0.0;
    for (int b = 0; b < B; ++b) ss += (theta[b] - tbar) * (theta[b] - tbar);
    e.stderr_ = std::sqrt(ss * (B - 1) / B);
    return e;
}

std::string points_str(const std::vector<Point>& pts) {
    std::ostringstream os;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (k) os << ';';
        os << '(';
        for (std::size_t c = 0; c < pts[k].site.coords.size(); ++c) {
            if (c) os << ' ';
            os << pts[k].site.coords[c];
        }
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", pts[k].time);
        os << "):" << buf;
    }
    return os.str();
}

void require_point_count(const Observable& obs, std::size_t n) {
    if (obs.points.size() != n)
        throw std::invalid_argument("observable: wrong number of points for kind");
}

}  // namespace

Estimate estimate(const ModelParams& p, const Observable& obs, uint64_t nsamples, uint64_t seed,
                  int nthreads) {
    p.validate();
    const ObsKind kind = obs.kind;
    SourceSet A;
    std::vector<Point> rpts;
    switch (kind) {
        case ObsKind::sz:
            require_point_count(obs, 1);
            A.points = obs.points;
            break;
        case ObsKind::szsz:
            require_point_count(obs, 2);
            A.points = obs.points;
            break;
        case ObsKind::sigx:
            require_point_count(obs, 1);
            rpts = obs.points;
            break;
        case ObsKind::sigxsigx:
            require_point_count(obs, 2);
            rpts = obs.points;
            break;
        case ObsKind::szsigx:
            require_point_count(obs, 2);
            if (obs.points[0] == obs.points[1])
                throw std::invalid_argument("szsigx: u must differ from v");
            A.points = {obs.points[0]};
            rpts = {obs.points[1]};
            break;
        case ObsKind::partition:
            break;
        default:
            throw std::invalid_argument("estimate: kind requires the two-replica estimator");
    }

    auto draw = [&](uint64_t i) -> std::pair<double, double> {
        const Arrivals arr = sample_arrivals(p, derive_seed(seed, i));
        if (kind == ObsKind::partition) {
            return {(double)count_compatible(arr, {}, p), 1.0};
        }
        const double den = (double)count_compatible(arr, {}, p);
        const double num = (double)count_compatible_with_r_constraints(arr, A, rpts, p);
        return {num, den};
    };
    const std::string name = std::string(obs_kind_name(kind)) + " " + points_str(obs.points);
    return run_ratio(nsamples, seed, nthreads, name, draw, kind == ObsKind::partition);
}

namespace {

// Shared two-replica sampling loop: per draw, enumerate all compatible
// label pairs and accumulate an indicator; the denominator estimates
// Z^2 as the product of the replicas' unconstrained counts.
Estimate pair_estimate(const ModelParams& p, const SourceSet& A1, const SourceSet& A2,
                       const std::vector<Point>& G, const std::string& name,
                       const std::function<double(const IntervalGraph&, const LabelConfig&,
                                                  const LabelConfig&)>& eval,
                       uint64_t nsamples, uint64_t seed, int nthreads, double sign) {
    p.validate();
    if (p.n_sites() > 8)
        throw cap_exceeded_error("pair estimator: circle count over the enumeration cap (8)");

    auto draw = [&](uint64_t i) -> std::pair<double, double> {
        const Arrivals a1 = sample_arrivals(p, derive_seed(seed, 2 * i));
        const Arrivals a2 = sample_arrivals(p, derive_seed(seed, 2 * i + 1));
        const double den =
            (double)count_compatible(a1, {}, p) * (double)count_compatible(a2, {}, p);

        const auto c1 = all_circle_candidates(a1, A1, p);
        const auto c2 = all_circle_candidates(a2, A2, p);
        bool feasible = true;
        for (const auto& c : c1) feasible = feasible && !c.empty();
        for (const auto& c : c2) feasible = feasible && !c.empty();
        if (!feasible) return {0.0, den};

        LabelConfig nu1, nu2;
        nu1.circles.resize(p.n_sites());
        nu2.circles.resize(p.n_sites());
        for (int s = 0; s < p.n_sites(); ++s) {
            nu1.circles[s] = c1[s][0];
            nu2.circles[s] = c2[s][0];
        }
        const CombinedArrivals comb = combine(a1, a2, p);
        IntervalGraph g = decompose(comb, nu1, nu2, G, p);

        double num = 0.0;
        std::vector<std::size_t> i1(p.n_sites(), 0);
        while (true) {
            for (int s = 0; s < p.n_sites(); ++s) nu1.circles[s] = c1[s][i1[s]];
            std::vector<std::size_t> i2(p.n_sites(), 0);
            while (true) {
                for (int s = 0; s < p.n_sites(); ++s) nu2.circles[s] = c2[s][i2[s]];
                g.relabel(nu1, nu2);
                num += eval(g, nu1, nu2);
                int s = p.n_sites() - 1;
                while (s >= 0 && ++i2[s] == c2[s].size()) i2[s--] = 0;
                if (s < 0) break;
            }
            int s = p.n_sites() - 1;
            while (s >= 0 && ++i1[s] == c1[s].size()) i1[s--] = 0;
            if (s < 0) break;
        }
        return {num, den};
    };
    return run_ratio(nsamples, seed, nthreads, name, draw, false, sign);
}

}  // namespace

Estimate estimate_truncated_switch(const ModelParams& p, const Observable& obs, uint64_t nsamples,
                                   uint64_t seed, int nthreads) {
    require_point_count(obs, 2);
    const Point u = obs.points[0], v = obs.points[1];
    if (u == v) throw std::invalid_argument("truncated estimator: u must differ from v");
    const std::vector<Point> G{u, v};
    const std::string name = std::string(obs_kind_name(obs.kind)) + " " + points_str(obs.points);

    switch (obs.kind) {
        case ObsKind::trunc_zz:
            return pair_estimate(
                p, SourceSet{}, SourceSet{{u, v}}, G, name,
                [&u](const IntervalGraph& g, const LabelConfig&, const LabelConfig&) {
                    return connected_unblocked(g, GhostOrPoint::at(u), GhostOrPoint::ghost())
                               ? 0.0
                               : 1.0;
                },
                nsamples, seed, nthreads, 1.0);
        case ObsKind::trunc_xx:
            return pair_estimate(
                p, SourceSet{}, SourceSet{}, G, name,
                [&u, &v, &p](const IntervalGraph& g, const LabelConfig& n1, const LabelConfig& n2) {
                    const int su = site_index(u.site, p), sv = site_index(v.site, p);
                    if (n1.value_at(su, u.time) != Label::r || n2.value_at(su, u.time) != Label::l)
                        return 0.0;
                    if (n1.value_at(sv, v.time) != Label::r || n2.value_at(sv, v.time) != Label::l)
                        return 0.0;
                    return is_loop_pivotal(g, v, u) ? 1.0 : 0.0;
                },
                nsamples, seed, nthreads, 1.0);
        case ObsKind::trunc_zx:
            return pair_estimate(
                p, SourceSet{{u}}, SourceSet{}, G, name,
                [&u, &v, &p](const IntervalGraph& g, const LabelConfig&, const LabelConfig& n2) {
                    const int sv = site_index(v.site, p);
                    if (n2.value_at(sv, v.time) != Label::r) return 0.0;
                    return is_pivotal(g, v, u) ? 1.0 : 0.0;
                },
                nsamples, seed, nthreads, -1.0);
        default:
            throw std::invalid_argument("estimate_truncated_switch: kind must be trunc_*");
    }
}

Estimate estimate_difference_form_xx(const ModelParams& p, const Point& u, const Point& v,
                                     uint64_t nsamples, uint64_t seed, int nthreads) {
    if (u == v) throw std::invalid_argument("difference form: u must differ from v");
    const std::vector<Point> G{u, v};
    return pair_estimate(
        p, SourceSet{}, SourceSet{}, G, "xx_difference " + points_str({u, v}),
        [&u, &v, &p](const IntervalGraph&, const LabelConfig& n1, const LabelConfig& n2) {
            const int su = site_index(u.site, p), sv = site_index(v.site, p);
            if (n1.value_at(su, u.time) != Label::r || n2.value_at(su, u.time) != Label::l)
                return 0.0;
            const Label a1 = n1.value_at(sv, v.time), a2 = n2.value_at(sv, v.time);
            if (a1 == Label::r && a2 == Label::l) return 1.0;
            if (a1 == Label::l && a2 == Label::r) return -1.0;
            return 0.0;
        },
        nsamples, seed, nthreads, 1.0);
}

Estimate estimate_triple(const ModelParams& p, const Point& w, const Point& z, uint64_t nsamples,
                         uint64_t seed, int nthreads) {
    Point origin{site_from_index(0, p), 0.0};
    if (origin == w || origin == z || w == z)
        throw std::invalid_argument("triple: points {0, w, z} must be distinct");
    const std::vector<Point> G{origin, w, z};
    return pair_estimate(
        p, SourceSet{{origin, w, z}}, SourceSet{}, G, "triple " + points_str({w, z}),
        [origin](const IntervalGraph& g, const LabelConfig&, const LabelConfig&) {
            return connected_unblocked(g, GhostOrPoint::at(origin), GhostOrPoint::ghost()) ? 0.0
                                                                                           : 1.0;
        },
        nsamples, seed, nthreads, 1.0);
}

Estimate estimate_crossmany(const ModelParams& p, const Point& u, const std::vector<Point>& vlist,
                            uint64_t nsamples, uint64_t seed, int nthreads) {
    if (vlist.empty()) throw std::invalid_argument("crossmany: vlist must be nonempty");
    for (std::size_t k = 0; k + 1 < vlist.size(); ++k) {
        if (!(vlist[k].time < vlist[k + 1].time))
            throw std::invalid_argument("crossmany: vlist must be strictly time-ordered");
    }
    std::vector<Point> G{u};
    G.insert(G.end(), vlist.begin(), vlist.end());
    return pair_estimate(
        p, SourceSet{{u}}, SourceSet{}, G, "crossmany " + points_str(G),
        [&u, &vlist, &p](const IntervalGraph& g, const LabelConfig&, const LabelConfig& n2) {
            for (const auto& vq : vlist) {
                if (n2.value_at(site_index(vq.site, p), vq.time) != Label::r) return 0.0;
            }
            // the whole set is pivotal: u reaches the ghost, but not by
            // any path avoiding every insertion point
            if (!connected_unblocked(g, GhostOrPoint::at(u), GhostOrPoint::ghost())) return 0.0;
            if (connected_unblocked_avoiding_all(g, GhostOrPoint::at(u), GhostOrPoint::ghost(),
                                                 vlist))
                return 0.0;
            return 1.0;
        },
        nsamples, seed, nthreads, -1.0);
}

// ---------------------------------------------------------------------
// Exact switching-identity counting.

namespace {

struct FlipEntry {
    bool ground;
    std::size_t container;  // edge index or site
    double time;
    int site_a, site_b;  // both endpoints for ground; site_a for ghost
};

/// Exact count of (flip splitting, label pair, mark splitting) triples
/// with the replica sources fixed and an event on the label pair.
uint64_t count_side(const CombinedArrivals& c, const ModelParams& p, const std::vector<Point>& G,
                    const std::vector<Point>& src1, const std::vector<Point>& src2,
                    PassThrough policy,
                    const std::function<bool(IntervalGraph&, uint64_t, uint64_t)>& event) {
    const int nsite = p.n_sites();
    const auto es = edges(p);

    LabelConfig empty;
    empty.circles.resize(nsite);
    IntervalGraph g = decompose(c, empty, empty, G, p, policy);
    const auto& nodes = g.nodes();
    if (nodes.size() > 64)
        throw cap_exceeded_error("switching_identity_check: too many intervals");

    // Per-circle node lists and representative times.
    std::vector<std::vector<int>> circle_nodes(nsite);
    for (int n = 0; n < (int)nodes.size(); ++n) circle_nodes[nodes[n].site].push_back(n);
    std::vector<double> rep(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
        double r = nodes[n].t0 + 0.5 * nodes[n].len;
        if (r >= p.beta) r -= p.beta;
        rep[n] = r;
    }

    // Node containing each combined mark.
    std::vector<std::pair<int, double>> mark_nodes;  // (node, time)
    for (std::size_t i = 0; i < c.marks.size(); ++i) {
        for (const auto& tt : c.marks[i]) {
            for (int n : circle_nodes[i]) {
                double off = tt.time - nodes[n].t0;
                if (off < 0.0) off += p.beta;
                if (off < nodes[n].len) {
                    mark_nodes.push_back({n, tt.time});
                    break;
                }
            }
        }
    }

    std::vector<FlipEntry> flips;
    for (std::size_t e = 0; e < c.ground.size(); ++e) {
        for (const auto& tt : c.ground[e])
            flips.push_back({true, e, tt.time, site_index(es[e].a, p), site_index(es[e].b, p)});
    }
    for (std::size_t i = 0; i < c.ghost.size(); ++i) {
        for (const auto& tt : c.ghost[i]) flips.push_back({false, i, tt.time, (int)i, (int)i});
    }
    if (flips.size() > 24)
        throw cap_exceeded_error("switching_identity_check: flip count over cap");

    std::vector<std::vector<double>> s1(nsite), s2(nsite);
    for (const auto& pt : src1) s1[site_index(pt.site, p)].push_back(pt.time);
    for (const auto& pt : src2) s2[site_index(pt.site, p)].push_back(pt.time);

    std::unordered_map<uint64_t, std::pair<uint64_t, bool>> memo;
    // Bits are per-node "label is r" masks over at most 32 nodes per
    // replica; combine into one key.
    if (nodes.size() > 32)
        throw cap_exceeded_error("switching_identity_check: too many intervals for memo key");

    uint64_t total = 0;
    std::vector<std::vector<double>> j1(nsite), j2(nsite);

    // Candidate masks for one circle given its jump set: bit set when
    // the node's label is r, for base value r; the other candidate is
    // the complement restricted to the circle.
    auto circle_masks = [&](int si, const std::vector<double>& jumps, const std::vector<double>& srcs,
                            uint64_t& mask_r, uint64_t& circle_mask) -> bool {
        std::vector<double> all = jumps;
        all.insert(all.end(), srcs.begin(), srcs.end());
        if (all.size() % 2 != 0) return false;
        std::sort(all.begin(), all.end());
        mask_r = 0;
        circle_mask = 0;
        for (int n : circle_nodes[si]) {
            circle_mask |= 1ull << n;
            std::size_t cnt = 0;
            for (double t : all) {
                if (t > 0.0 && t <= rep[n]) ++cnt;
            }
            if (cnt % 2 == 0) mask_r |= 1ull << n;
        }
        return true;
    };

    std::function<void(std::size_t)> assign = [&](std::size_t k) {
        if (k < flips.size()) {
            const auto& f = flips[k];
            auto push = [&](std::vector<std::vector<double>>& j) {
                j[f.site_a].push_back(f.time);
                if (f.ground) j[f.site_b].push_back(f.time);
            };
            auto pop = [&](std::vector<std::vector<double>>& j) {
                j[f.site_a].pop_back();
                if (f.ground) j[f.site_b].pop_back();
            };
            push(j1);
            assign(k + 1);
            pop(j1);
            push(j2);
            assign(k + 1);
            pop(j2);
            return;
        }
        // Leaf: per-circle parity and candidate masks.
        std::vector<uint64_t> m1r(nsite), m2r(nsite), cm(nsite);
        for (int si = 0; si < nsite; ++si) {
            uint64_t cmask;
            if (!circle_masks(si, j1[si], s1[si], m1r[si], cmask)) return;
            if (!circle_masks(si, j2[si], s2[si], m2r[si], cmask)) return;
            cm[si] = cmask;
        }
        // Enumerate the two base choices per circle per replica.
        std::vector<uint64_t> b1(1, 0);
        for (int si = 0; si < nsite; ++si) {
            std::vector<uint64_t> nxt;
            nxt.reserve(b1.size() * 2);
            for (uint64_t b : b1) {
                nxt.push_back(b | m1r[si]);
                nxt.push_back(b | (cm[si] & ~m1r[si]));
            }
            b1 = std::move(nxt);
        }
        std::vector<uint64_t> b2(1, 0);
        for (int si = 0; si < nsite; ++si) {
            std::vector<uint64_t> nxt;
            nxt.reserve(b2.size() * 2);
            for (uint64_t b : b2) {
                nxt.push_back(b | m2r[si]);
                nxt.push_back(b | (cm[si] & ~m2r[si]));
            }
            b2 = std::move(nxt);
        }
        for (uint64_t bits1 : b1) {
            for (uint64_t bits2 : b2) {
                const uint64_t key = splitmix64(bits1) ^ (bits2 * 0x9E3779B97F4A7C15ull);
                auto it = memo.find(key);
                if (it == memo.end()) {
                    uint64_t factor = 1;
                    for (const auto& [mn, mt] : mark_nodes) {
                        (void)mt;
                        const uint64_t bit = 1ull << mn;
                        const uint64_t cnt = ((bits1 & bit) ? 1 : 0) + ((bits2 & bit) ? 1 : 0);
                        factor *= cnt;
                        if (factor == 0) break;
                    }
                    bool ev = false;
                    if (factor > 0) ev = event(g, bits1, bits2);
                    it = memo.emplace(key, std::make_pair(factor, ev)).first;
                }
                if (it->second.second) total += it->second.first;
            }
        }
    };
    assign(0);
    return total;
}

}  // namespace

std::pair<uint64_t, uint64_t> switching_identity_check(const CombinedArrivals& c, const Point& u,
                                                       const Point& v, SwitchVariant variant,
                                                       const ModelParams& p, PassThrough policy) {
    const std::vector<Point> G{u, v};

    // Label value at a special point: the label of the arc starting there.
    auto value_at = [&](IntervalGraph& g, uint64_t bits, const Point& pt) {
        const CutRef r = g.cutref_of(pt);
        const int node = g.cut(r).node_above;
        return (bits >> node) & 1 ? Label::r : Label::l;
    };

    switch (variant) {
        case SwitchVariant::zz: {
            const uint64_t lhs = count_side(
                c, p, G, {u}, {v}, policy,
                [](IntervalGraph&, uint64_t, uint64_t) { return true; });
            const uint64_t rhs = count_side(
                c, p, G, {}, {u, v}, policy,
                [&](IntervalGraph& g, uint64_t bits1, uint64_t bits2) {
                    g.relabel_bits(bits1, bits2);
                    return connected_unblocked(g, GhostOrPoint::at(u), GhostOrPoint::ghost());
                });
            return {lhs, rhs};
        }
        case SwitchVariant::xx: {
            const uint64_t lhs = count_side(
                c, p, G, {}, {}, policy,
                [&](IntervalGraph& g, uint64_t bits1, uint64_t bits2) {
                    return value_at(g, bits1, u) == Label::r && value_at(g, bits2, u) == Label::l &&
                           value_at(g, bits1, v) == Label::l && value_at(g, bits2, v) == Label::r;
                });
            const uint64_t rhs = count_side(
                c, p, G, {}, {}, policy,
                [&](IntervalGraph& g, uint64_t bits1, uint64_t bits2) {
                    if (!(value_at(g, bits1, u) == Label::r && value_at(g, bits2, u) == Label::l &&
                          value_at(g, bits1, v) == Label::r && value_at(g, bits2, v) == Label::l))
                        return false;
                    g.relabel_bits(bits1, bits2);
                    return has_unblocked_loop(g, v, u);
                });
            return {lhs, rhs};
        }
        case SwitchVariant::zx: {
            const uint64_t lhs = count_side(
                c, p, G, {u}, {}, policy,
                [&](IntervalGraph& g, uint64_t bits1, uint64_t) {
                    return value_at(g, bits1, v) == Label::r;
                });
            const uint64_t rhs = count_side(
                c, p, G, {u}, {}, policy,
                [&](IntervalGraph& g, uint64_t bits1, uint64_t bits2) {
                    if (value_at(g, bits2, v) != Label::r) return false;
                    g.relabel_bits(bits1, bits2);
                    return connected_unblocked_avoiding(g, GhostOrPoint::at(u),
                                                        GhostOrPoint::ghost(), v);
                });
            return {lhs, rhs};
        }
    }
    throw std::logic_error("switching_identity_check: bad variant");
}

// ---------------------------------------------------------------------

namespace {

Estimate inhomogeneous_m(const ModelParams& p, const RateProfile& profile, const Point& u,
                         uint64_t nsamples, uint64_t seed, int nthreads, const char* tag) {
    auto draw = [&](uint64_t i) -> std::pair<double, double> {
        const Arrivals arr = sample_inhomogeneous(p, profile, derive_seed(seed, i));
        const double den = (double)count_compatible(arr, {}, p);
        const double num = (double)count_compatible(arr, SourceSet{{u}}, p);
        return {num, den};
    };
    return run_ratio(nsamples, seed, nthreads, std::string("M_u ") + tag, draw);
}

}  // namespace

MonotonicityReport monotonicity_check(const ModelParams& p, const RateProfile& profile_low,
                                      const RateProfile& profile_high, const Point& u,
                                      uint64_t nsamples, uint64_t seed, int nthreads) {
    MonotonicityReport r;
    r.low = inhomogeneous_m(p, profile_low, u, nsamples, splitmix64(seed), nthreads, "low");
    r.high = inhomogeneous_m(p, profile_high, u, nsamples, splitmix64(seed ^ 0x5A5Aull), nthreads,
                             "high");
    r.difference = r.high.mean - r.low.mean;
    r.combined_stderr = std::sqrt(r.low.stderr_ * r.low.stderr_ + r.high.stderr_ * r.high.stderr_);
    r.pass = r.difference >= -3.0 * r.combined_stderr;
    return r;
}

uint64_t restricted_label_count(const Arrivals& arr, const ModelParams& p,
                                const std::vector<GroundSegment>& region,
                                const std::vector<Point>& sources,
                                const std::vector<Point>& r_times) {
    const auto inc = build_incidence(p);
    uint64_t total = 1;

    for (int si = 0; si < p.n_sites(); ++si) {
        // Forced jumps on this circle restricted to the domain.
        std::vector<double> jumps;
        for (int e : inc[si]) jumps.insert(jumps.end(), arr.ground[e].begin(), arr.ground[e].end());
        jumps.insert(jumps.end(), arr.ghost[si].begin(), arr.ghost[si].end());
        for (const auto& pt : sources) {
            if (site_index(pt.site, p) == si) jumps.push_back(pt.time);
        }
        std::sort(jumps.begin(), jumps.end());

        std::vector<const GroundSegment*> segs;
        bool full = false;
        for (const auto& s : region) {
            if (site_index(s.site, p) != si) continue;
            if (s.full_circle) full = true;
            segs.push_back(&s);
        }
        if (full) continue;  // whole circle removed from the domain

        if (segs.empty()) {
            std::vector<double> rts;
            for (const auto& pt : r_times) {
                if (site_index(pt.site, p) == si) rts.push_back(pt.time);
            }
            const auto cands = circle_candidates(jumps, arr.marks[si], rts);
            total *= cands.size();
            if (total == 0) return 0;
            continue;
        }

        std::sort(segs.begin(), segs.end(),
                  [](const GroundSegment* a, const GroundSegment* b) { return a->t0 < b->t0; });
        // Domain arcs between consecutive removed segments.
        for (std::size_t k = 0; k < segs.size(); ++k) {
            const double a = segs[k]->t1;
            const double b = segs[(k + 1) % segs.size()]->t0;
            double alen = b - a;
            if (alen <= 0.0) alen += p.beta;
            if (segs.size() == 1 && segs[0]->t0 == 0.0 && segs[0]->t1 == p.beta) continue;
            auto off = [&](double t) {
                double o = t - a;
                if (o < 0.0) o += p.beta;
                return o;
            };
            std::vector<double> js;
            for (double t : jumps) {
                if (off(t) < alen) js.push_back(off(t));
            }
            std::sort(js.begin(), js.end());
            // value at arc offset o for base value first := base xor
            // parity of jumps at offsets in (0, o]
            auto value = [&](Label base, double o) {
                std::size_t cnt = 0;
                for (double j : js) {
                    if (j > 0.0 && j <= o) ++cnt;
                }
                return cnt % 2 == 0 ? base : flipped(base);
            };
            int count = 0;
            for (Label base : {Label::r, Label::l}) {
                bool ok = true;
                for (double m : arr.marks[si]) {
                    if (off(m) < alen && value(base, off(m)) != Label::r) ok = false;
                }
                for (const auto& pt : r_times) {
                    if (site_index(pt.site, p) != si || !ok) continue;
                    double o = off(pt.time);
                    if (o < alen) {
                        if (value(base, o) != Label::r) ok = false;
                    } else if (pt.time == b || (b == 0.0 && pt.time == p.beta)) {
                        // right endpoint: limit from inside the arc
                        if (value(base, alen) != Label::r) ok = false;
                    }
                }
                if (ok) ++count;
            }
            total *= count;
            if (total == 0) return 0;
        }
    }
    return total;
}

CondExpReport condexp_check(const ModelParams& p, const std::vector<GroundSegment>& region,
                            const Point& u, const std::vector<Point>& vlist, uint64_t nsamples,
                            uint64_t seed, int nthreads) {
    if (segment_contains(region, p, u.site, u.time))
        throw std::invalid_argument("condexp_check: u must lie in the complement of the region");
    // The inequality pins the label to r at every arc-segment endpoint;
    // without that pinning the two regions do not decouple.
    for (const auto& s : region) {
        if (s.full_circle) continue;
        const Point a{s.site, s.t0};
        const Point b{s.site, s.t1 < p.beta ? s.t1 : 0.0};
        for (const auto& pt : {a, b}) {
            if (std::find(vlist.begin(), vlist.end(), pt) == vlist.end())
                throw std::invalid_argument(
                    "condexp_check: vlist must contain both endpoints of every arc segment");
        }
    }
    const RateProfile reduced = reduced_rates(p, region);

    auto lhs_draw = [&](uint64_t i) -> std::pair<double, double> {
        const Arrivals arr = sample_inhomogeneous(p, reduced, derive_seed(seed, i));
        return {(double)restricted_label_count(arr, p, region, {u}, vlist), 1.0};
    };
    auto rhs_draw = [&](uint64_t i) -> std::pair<double, double> {
        const Arrivals arr = sample_inhomogeneous(p, reduced, derive_seed(seed, i));
        return {(double)restricted_label_count(arr, p, region, {}, vlist), 1.0};
    };
    CondExpReport r;
    Estimate lhs = run_ratio(nsamples, seed, nthreads, "condexp lhs", lhs_draw, true);
    Estimate rhs = run_ratio(nsamples, seed, nthreads, "condexp rhs", rhs_draw, true);

    Observable m_obs{ObsKind::sz, {u}};
    Estimate m = estimate(p, m_obs, nsamples, splitmix64(seed ^ 0xC0DEull), nthreads);

    r.lhs = lhs.mean;
    r.lhs_stderr = lhs.stderr_;
    r.m_estimate = m.mean;
    r.m_stderr = m.stderr_;
    r.rhs = m.mean * rhs.mean;
    r.rhs_stderr = std::sqrt(m.mean * m.mean * rhs.stderr_ * rhs.stderr_ +
                             rhs.mean * rhs.mean * m.stderr_ * m.stderr_);
    r.slack = r.rhs - r.lhs;
    r.combined_stderr = std::sqrt(r.rhs_stderr * r.rhs_stderr + r.lhs_stderr * r.lhs_stderr);
    r.pass = r.slack >= -3.0 * r.combined_stderr;
    return r;
}

std::string estimate_csv_header() {
    return "observable,points,mean,stderr,nsamples,seed,params_hash";
}

std::string estimate_csv_row(const Estimate& e, const ModelParams& p) {
    std::ostringstream os;
    const auto pos = e.observable.find(' ');
    const std::string kind = e.observable.substr(0, pos);
    const std::string pts = pos == std::string::npos ? "" : e.observable.substr(pos + 1);
    char num[64];
    os << kind << "," << pts << ",";
    std::snprintf(num, sizeof num, "%.17g", e.mean);
    os << num << ",";
    std::snprintf(num, sizeof num, "%.17g", e.stderr_);
    os << num << "," << e.nsamples << "," << e.seed << "," << p.hash();
    return os.str();
}

}  // namespace rcr
