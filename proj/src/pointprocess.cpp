#include "rcr/pointprocess.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "rcr/rng.hpp"

namespace rcr {

std::size_t Arrivals::n_flips() const {
    std::size_t n = 0;
    for (const auto& v : ground) n += v.size();
    for (const auto& v : ghost) n += v.size();
    return n;
}

std::size_t Arrivals::n_marks() const {
    std::size_t n = 0;
    for (const auto& v : marks) n += v.size();
    return n;
}

std::size_t CombinedArrivals::n_flips() const {
    std::size_t n = 0;
    for (const auto& v : ground) n += v.size();
    for (const auto& v : ghost) n += v.size();
    return n;
}

std::size_t CombinedArrivals::n_marks() const {
    std::size_t n = 0;
    for (const auto& v : marks) n += v.size();
    return n;
}

void Arrivals::validate(const ModelParams& p) const {
    std::set<double> seen;
    auto check = [&](const std::vector<double>& ts) {
        double prev = -1.0;
        for (double t : ts) {
            if (!(t >= 0.0 && t < p.beta))
                throw std::invalid_argument("arrivals: time outside [0, beta)");
            if (t <= prev) throw std::invalid_argument("arrivals: times not strictly increasing");
            if (!seen.insert(t).second)
                throw std::invalid_argument("arrivals: duplicate time in configuration");
            prev = t;
        }
    };
    for (const auto& v : ground) check(v);
    for (const auto& v : ghost) check(v);
    for (const auto& v : marks) check(v);
}

double PiecewiseRate::at(double t) const {
    // last breakpoint <= t
    auto it = std::upper_bound(times.begin(), times.end(), t);
    std::size_t k = static_cast<std::size_t>(it - times.begin());
    if (k == 0) return values.empty() ? 0.0 : values.front();
    return values[k - 1];
}

double PiecewiseRate::max_value() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, v);
    return m;
}

namespace {

std::vector<double> sample_poisson_circle(double rate, double beta, std::mt19937_64& rng) {
    std::vector<double> out;
    if (rate <= 0.0) return out;
    std::poisson_distribution<int> pd(rate * beta);
    int n = pd(rng);
    out.reserve(n);
    std::uniform_real_distribution<double> ud(0.0, beta);
    for (int k = 0; k < n; ++k) out.push_back(ud(rng));
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> sample_thinned_circle(const PiecewiseRate& rate, double beta,
                                          std::mt19937_64& rng) {
    const double rmax = rate.max_value();
    std::vector<double> out;
    if (rmax <= 0.0) return out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto proposals = sample_poisson_circle(rmax, beta, rng);
    for (double t : proposals) {
        if (unit(rng) * rmax < rate.at(t)) out.push_back(t);
    }
    return out;
}

}  // namespace

Arrivals sample_arrivals(const ModelParams& p, uint64_t seed) {
    auto rng = make_rng(seed);
    const auto es = edges(p);
    Arrivals a;
    a.ground.resize(es.size());
    a.ghost.resize(p.n_sites());
    a.marks.resize(p.n_sites());
    for (std::size_t e = 0; e < es.size(); ++e)
        a.ground[e] = sample_poisson_circle(p.rho * es[e].coupling, p.beta, rng);
    for (int i = 0; i < p.n_sites(); ++i)
        a.ghost[i] = sample_poisson_circle(p.h, p.beta, rng);
    for (int i = 0; i < p.n_sites(); ++i)
        a.marks[i] = sample_poisson_circle(p.lambda, p.beta, rng);
    return a;
}

Arrivals sample_inhomogeneous(const ModelParams& p, const RateProfile& profile, uint64_t seed) {
    auto rng = make_rng(seed);
    const auto es = edges(p);
    if (profile.ground.size() != es.size())
        throw std::invalid_argument("profile: ground rate count does not match edge count");
    Arrivals a;
    a.ground.resize(es.size());
    a.ghost.resize(p.n_sites());
    a.marks.resize(p.n_sites());
    for (std::size_t e = 0; e < es.size(); ++e)
        a.ground[e] = sample_thinned_circle(profile.ground[e], p.beta, rng);
    for (int i = 0; i < p.n_sites(); ++i)
        a.ghost[i] = sample_poisson_circle(profile.ghost_rate, p.beta, rng);
    for (int i = 0; i < p.n_sites(); ++i)
        a.marks[i] = sample_poisson_circle(profile.mark_rate, p.beta, rng);
    return a;
}

RateProfile full_rates(const ModelParams& p) {
    RateProfile r;
    const auto es = edges(p);
    r.ground.resize(es.size());
    for (std::size_t e = 0; e < es.size(); ++e) {
        r.ground[e].times = {0.0};
        r.ground[e].values = {p.rho * es[e].coupling};
    }
    r.ghost_rate = p.h;
    r.mark_rate = p.lambda;
    return r;
}

bool segment_contains(const std::vector<GroundSegment>& region, const ModelParams& p,
                      const Site& site, double t) {
    (void)p;
    for (const auto& s : region) {
        if (!(s.site == site)) continue;
        if (s.full_circle) return true;
        if (t >= s.t0 && t < s.t1) return true;
    }
    return false;
}

RateProfile reduced_rates(const ModelParams& p, const std::vector<GroundSegment>& region) {
    // Reject overlapping segments.
    for (std::size_t i = 0; i < region.size(); ++i) {
        for (std::size_t j = i + 1; j < region.size(); ++j) {
            if (!(region[i].site == region[j].site)) continue;
            const auto& a = region[i];
            const auto& b = region[j];
            if (a.full_circle || b.full_circle)
                throw std::invalid_argument("region: overlapping segments");
            if (a.t0 < b.t1 && b.t0 < a.t1)
                throw std::invalid_argument("region: overlapping segments");
        }
    }
    for (const auto& s : region) {
        if (!s.full_circle && !(s.t0 >= 0.0 && s.t0 < s.t1 && s.t1 <= p.beta))
            throw std::invalid_argument("region: bad segment endpoints");
    }

    RateProfile r = full_rates(p);
    const auto es = edges(p);
    for (std::size_t e = 0; e < es.size(); ++e) {
        const double full = p.rho * es[e].coupling;
        // Breakpoints where membership of either endpoint may change.
        std::vector<double> cuts{0.0};
        for (const auto& s : region) {
            if (!(s.site == es[e].a) && !(s.site == es[e].b)) continue;
            if (s.full_circle) continue;
            cuts.push_back(s.t0);
            if (s.t1 < p.beta) cuts.push_back(s.t1);
        }
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
        PiecewiseRate pr;
        pr.times.clear();
        pr.values.clear();
        for (std::size_t k = 0; k < cuts.size(); ++k) {
            double t0 = cuts[k];
            double t1 = (k + 1 < cuts.size()) ? cuts[k + 1] : p.beta;
            double mid = 0.5 * (t0 + t1);
            bool ina = segment_contains(region, p, es[e].a, mid);
            bool inb = segment_contains(region, p, es[e].b, mid);
            pr.times.push_back(t0);
            pr.values.push_back(ina == inb ? full : 0.0);
        }
        r.ground[e] = std::move(pr);
    }
    return r;
}

namespace {

std::vector<TaggedTime> merge_tagged(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<TaggedTime> out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            out.push_back({a[i++], Replica::one});
        } else {
            if (i < a.size() && a[i] == b[j])
                throw std::invalid_argument("combine: exact time collision between replicas");
            out.push_back({b[j++], Replica::two});
        }
    }
    return out;
}

}  // namespace

CombinedArrivals combine(const Arrivals& r1, const Arrivals& r2, const ModelParams& p) {
    (void)p;
    if (r1.ground.size() != r2.ground.size() || r1.ghost.size() != r2.ghost.size() ||
        r1.marks.size() != r2.marks.size())
        throw std::invalid_argument("combine: replica shapes differ");
    CombinedArrivals c;
    c.ground.resize(r1.ground.size());
    c.ghost.resize(r1.ghost.size());
    c.marks.resize(r1.marks.size());
    for (std::size_t e = 0; e < r1.ground.size(); ++e)
        c.ground[e] = merge_tagged(r1.ground[e], r2.ground[e]);
    for (std::size_t i = 0; i < r1.ghost.size(); ++i)
        c.ghost[i] = merge_tagged(r1.ghost[i], r2.ghost[i]);
    for (std::size_t i = 0; i < r1.marks.size(); ++i)
        c.marks[i] = merge_tagged(r1.marks[i], r2.marks[i]);
    return c;
}

std::pair<Arrivals, Arrivals> split(const CombinedArrivals& c) {
    Arrivals r1, r2;
    auto strip = [](const std::vector<std::vector<TaggedTime>>& src,
                    std::vector<std::vector<double>>& d1, std::vector<std::vector<double>>& d2) {
        d1.resize(src.size());
        d2.resize(src.size());
        for (std::size_t k = 0; k < src.size(); ++k) {
            for (const auto& tt : src[k])
                (tt.tag == Replica::one ? d1[k] : d2[k]).push_back(tt.time);
        }
    };
    strip(c.ground, r1.ground, r2.ground);
    strip(c.ghost, r1.ghost, r2.ghost);
    strip(c.marks, r1.marks, r2.marks);
    return {std::move(r1), std::move(r2)};
}

void for_each_splitting(const CombinedArrivals& c,
                        const std::function<void(const Arrivals&, const Arrivals&)>& fn, int cap) {
    const std::size_t total = c.n_flips() + c.n_marks();
    if (total > static_cast<std::size_t>(cap))
        throw std::runtime_error("enumerate_splittings: arrival count exceeds cap");

    // Flattened references to every arrival slot, in a fixed order.
    struct Slot {
        int kind;  // 0 ground, 1 ghost, 2 mark
        std::size_t idx, pos;
    };
    std::vector<Slot> slots;
    for (std::size_t e = 0; e < c.ground.size(); ++e)
        for (std::size_t k = 0; k < c.ground[e].size(); ++k) slots.push_back({0, e, k});
    for (std::size_t i = 0; i < c.ghost.size(); ++i)
        for (std::size_t k = 0; k < c.ghost[i].size(); ++k) slots.push_back({1, i, k});
    for (std::size_t i = 0; i < c.marks.size(); ++i)
        for (std::size_t k = 0; k < c.marks[i].size(); ++k) slots.push_back({2, i, k});

    CombinedArrivals work = c;
    auto get = [&work](const Slot& s) -> TaggedTime& {
        if (s.kind == 0) return work.ground[s.idx][s.pos];
        if (s.kind == 1) return work.ghost[s.idx][s.pos];
        return work.marks[s.idx][s.pos];
    };

    const uint64_t count = 1ull << total;
    for (uint64_t mask = 0; mask < count; ++mask) {
        for (std::size_t b = 0; b < total; ++b)
            get(slots[b]).tag = (mask >> b) & 1 ? Replica::two : Replica::one;
        auto [r1, r2] = split(work);
        fn(r1, r2);
    }
}

std::vector<std::pair<Arrivals, Arrivals>> enumerate_splittings(const CombinedArrivals& c,
                                                                int cap) {
    std::vector<std::pair<Arrivals, Arrivals>> out;
    for_each_splitting(
        c, [&out](const Arrivals& a, const Arrivals& b) { out.emplace_back(a, b); }, cap);
    return out;
}

namespace {

std::string dtos(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t);
    return buf;
}

nlohmann::ordered_json times_json(const std::vector<double>& ts) {
    auto arr = nlohmann::ordered_json::array();
    for (double t : ts) arr.push_back(dtos(t));
    return arr;
}

std::vector<double> times_from_json(const nlohmann::json& arr) {
    std::vector<double> out;
    for (const auto& s : arr) out.push_back(std::strtod(s.get<std::string>().c_str(), nullptr));
    return out;
}

}  // namespace

std::string Arrivals::to_json(const ModelParams& p) const {
    const auto es = edges(p);
    nlohmann::ordered_json j;
    auto garr = nlohmann::ordered_json::array();
    for (std::size_t e = 0; e < ground.size(); ++e) {
        Displacement disp(p.d);
        for (int k = 0; k < p.d; ++k)
            disp[k] = ((es[e].b.coords[k] - es[e].a.coords[k]) % p.N + p.N) % p.N;
        garr.push_back({{"base", es[e].a.coords},
                        {"displacement", disp},
                        {"times", times_json(ground[e])}});
    }
    j["ground"] = garr;
    auto harr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ghost.size(); ++i)
        harr.push_back({{"site", site_from_index((int)i, p).coords}, {"times", times_json(ghost[i])}});
    j["ghost"] = harr;
    auto marr = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < marks.size(); ++i)
        marr.push_back({{"site", site_from_index((int)i, p).coords}, {"times", times_json(marks[i])}});
    j["marks"] = marr;
    return j.dump();
}

Arrivals Arrivals::from_json(const std::string& text, const ModelParams& p) {
    const auto es = edges(p);
    auto j = nlohmann::json::parse(text);
    Arrivals a;
    a.ground.resize(es.size());
    a.ghost.resize(p.n_sites());
    a.marks.resize(p.n_sites());
    for (const auto& e : j.at("ground")) {
        Site base{e.at("base").get<std::vector<int>>()};
        Displacement disp = e.at("displacement").get<Displacement>();
        Site other = base;
        for (int k = 0; k < p.d; ++k) other.coords[k] = (other.coords[k] + disp[k]) % p.N;
        int ia = site_index(base, p), ib = site_index(other, p);
        bool found = false;
        for (std::size_t idx = 0; idx < es.size(); ++idx) {
            int ea = site_index(es[idx].a, p), eb = site_index(es[idx].b, p);
            if ((ea == ia && eb == ib) || (ea == ib && eb == ia)) {
                a.ground[idx] = times_from_json(e.at("times"));
                found = true;
                break;
            }
        }
        if (!found) throw std::invalid_argument("arrivals: unknown edge in JSON");
    }
    for (const auto& e : j.at("ghost")) {
        Site s{e.at("site").get<std::vector<int>>()};
        a.ghost[site_index(s, p)] = times_from_json(e.at("times"));
    }
    for (const auto& e : j.at("marks")) {
        Site s{e.at("site").get<std::vector<int>>()};
        a.marks[site_index(s, p)] = times_from_json(e.at("times"));
    }
    return a;
}

}  // namespace rcr
