#include "rcr/labels.hpp"

#include <algorithm>
#include <stdexcept>

#include "rcr/errors.hpp"

namespace rcr {

Label CircleLabel::value_at(double t) const {
    // Parity of jumps in (0, t]; a jump exactly at 0 belongs to the arc
    // starting at 0 and is excluded.
    std::size_t c = 0;
    for (double j : jumps) {
        if (j > 0.0 && j <= t) ++c;
    }
    return (c % 2 == 0) ? base : flipped(base);
}

std::vector<std::vector<int>> build_incidence(const ModelParams& p) {
    const auto es = edges(p);
    std::vector<std::vector<int>> inc(p.n_sites());
    for (std::size_t e = 0; e < es.size(); ++e) {
        inc[site_index(es[e].a, p)].push_back((int)e);
        inc[site_index(es[e].b, p)].push_back((int)e);
    }
    return inc;
}

std::vector<double> forced_jumps(const Arrivals& arr, const SourceSet& A, const Site& site,
                                 const ModelParams& p) {
    const auto inc = build_incidence(p);
    std::vector<double> out;
    const int si = site_index(site, p);
    for (int e : inc[si])
        out.insert(out.end(), arr.ground[e].begin(), arr.ground[e].end());
    out.insert(out.end(), arr.ghost[si].begin(), arr.ghost[si].end());
    std::sort(out.begin(), out.end());
    for (const auto& pt : A.points) {
        if (site_index(pt.site, p) != si) continue;
        auto it = std::lower_bound(out.begin(), out.end(), pt.time);
        if (it != out.end() && *it == pt.time)
            throw std::invalid_argument("forced_jumps: source point collides with an arrival");
        out.insert(it, pt.time);
    }
    return out;
}

std::vector<CircleLabel> circle_candidates(const std::vector<double>& jumps,
                                           const std::vector<double>& circle_marks,
                                           const std::vector<double>& r_times) {
    std::vector<CircleLabel> out;
    if (jumps.size() % 2 != 0) return out;
    for (Label base : {Label::r, Label::l}) {
        CircleLabel cand{jumps, base};
        bool ok = true;
        for (double m : circle_marks) {
            if (cand.value_at(m) != Label::r) {
                ok = false;
                break;
            }
        }
        if (ok) {
            for (double t : r_times) {
                if (cand.value_at(t) != Label::r) {
                    ok = false;
                    break;
                }
            }
        }
        if (ok) out.push_back(std::move(cand));
    }
    return out;
}

std::vector<std::vector<CircleLabel>> all_circle_candidates(const Arrivals& arr,
                                                            const SourceSet& A,
                                                            const ModelParams& p,
                                                            const std::vector<Point>& rpoints) {
    const auto inc = build_incidence(p);
    std::vector<std::vector<CircleLabel>> out(p.n_sites());
    for (int si = 0; si < p.n_sites(); ++si) {
        std::vector<double> jumps;
        for (int e : inc[si])
            jumps.insert(jumps.end(), arr.ground[e].begin(), arr.ground[e].end());
        jumps.insert(jumps.end(), arr.ghost[si].begin(), arr.ghost[si].end());
        std::sort(jumps.begin(), jumps.end());
        for (const auto& pt : A.points) {
            if (site_index(pt.site, p) != si) continue;
            auto it = std::lower_bound(jumps.begin(), jumps.end(), pt.time);
            if (it != jumps.end() && *it == pt.time)
                throw std::invalid_argument("labels: source point collides with an arrival");
            jumps.insert(it, pt.time);
        }
        std::vector<double> rts;
        for (const auto& pt : rpoints) {
            if (site_index(pt.site, p) != si) continue;
            if (std::binary_search(jumps.begin(), jumps.end(), pt.time))
                throw std::invalid_argument("labels: r-constraint collides with a jump point");
            rts.push_back(pt.time);
        }
        out[si] = circle_candidates(jumps, arr.marks[si], rts);
    }
    return out;
}

uint64_t count_compatible(const Arrivals& arr, const SourceSet& A, const ModelParams& p) {
    uint64_t total = 1;
    for (const auto& cands : all_circle_candidates(arr, A, p)) {
        total *= cands.size();
        if (total == 0) return 0;
    }
    return total;
}

uint64_t count_compatible_with_r_constraints(const Arrivals& arr, const SourceSet& A,
                                             const std::vector<Point>& rpoints,
                                             const ModelParams& p) {
    uint64_t total = 1;
    for (const auto& cands : all_circle_candidates(arr, A, p, rpoints)) {
        total *= cands.size();
        if (total == 0) return 0;
    }
    return total;
}

std::vector<LabelConfig> enumerate_compatible(const Arrivals& arr, const SourceSet& A,
                                              const ModelParams& p, int cap) {
    if (p.n_sites() > cap) throw cap_exceeded_error("enumerate_compatible: circle count over cap");
    const auto cands = all_circle_candidates(arr, A, p);
    std::vector<LabelConfig> out;
    for (const auto& c : cands) {
        if (c.empty()) return out;  // zero total
    }
    LabelConfig cur;
    cur.circles.resize(p.n_sites());
    std::vector<std::size_t> pick(p.n_sites(), 0);
    while (true) {
        for (int si = 0; si < p.n_sites(); ++si) cur.circles[si] = cands[si][pick[si]];
        out.push_back(cur);
        int si = p.n_sites() - 1;
        while (si >= 0) {
            if (++pick[si] < cands[si].size()) break;
            pick[si] = 0;
            --si;
        }
        if (si < 0) break;
    }
    return out;
}

bool is_compatible(const Arrivals& arr, const SourceSet& A, const LabelConfig& nu,
                   const ModelParams& p) {
    for (int si = 0; si < p.n_sites(); ++si) {
        std::vector<double> expect;
        try {
            expect = forced_jumps(arr, A, site_from_index(si, p), p);
        } catch (const std::invalid_argument&) {
            return false;
        }
        if (nu.circles[si].jumps != expect) return false;
        if (expect.size() % 2 != 0) return false;
        for (double m : arr.marks[si]) {
            if (nu.circles[si].value_at(m) != Label::r) return false;
        }
    }
    return true;
}

}  // namespace rcr
