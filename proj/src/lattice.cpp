#include "rcr/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace rcr {

int ModelParams::n_sites() const {
    int n = 1;
    for (int k = 0; k < d; ++k) n *= N;
    return n;
}

void ModelParams::validate() const {
    if (d < 1) throw std::invalid_argument("d: must be a positive integer");
    if (N < 1) throw std::invalid_argument("N: must be a positive integer");
    if (!(beta > 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("beta: must be finite and > 0");
    if (h < 0.0) throw std::invalid_argument("h: must be nonnegative");
    if (rho < 0.0) throw std::invalid_argument("rho: must be nonnegative");
    if (lambda < 0.0) throw std::invalid_argument("lambda: must be nonnegative");
    for (const auto& [v, J] : couplings) {
        if ((int)v.size() != d)
            throw std::invalid_argument("couplings: displacement dimension mismatch");
        if (std::all_of(v.begin(), v.end(), [](int c) { return c == 0; }))
            throw std::invalid_argument("couplings: zero displacement not allowed");
        if (J < 0.0) throw std::invalid_argument("couplings: J must be nonnegative");
        Displacement neg(v.size());
        for (size_t k = 0; k < v.size(); ++k) neg[k] = -v[k];
        auto it = couplings.find(neg);
        if (it == couplings.end() || it->second != J)
            throw std::invalid_argument("couplings: map must be symmetric under negation");
    }
}

int site_index(const Site& s, const ModelParams& p) {
    int idx = 0;
    for (int k = 0; k < p.d; ++k) idx = idx * p.N + s.coords[k];
    return idx;
}

Site site_from_index(int idx, const ModelParams& p) {
    Site s;
    s.coords.assign(p.d, 0);
    for (int k = p.d - 1; k >= 0; --k) {
        s.coords[k] = idx % p.N;
        idx /= p.N;
    }
    return s;
}

std::vector<Site> all_sites(const ModelParams& p) {
    std::vector<Site> out;
    out.reserve(p.n_sites());
    for (int i = 0; i < p.n_sites(); ++i) out.push_back(site_from_index(i, p));
    return out;
}

double jbar(const ModelParams& p) {
    double s = 0.0;
    for (const auto& [v, J] : p.couplings) s += J;
    return s;
}

std::vector<GroundEdge> edges(const ModelParams& p) {
    // Accumulate torus couplings per unordered pair.
    std::map<std::pair<int, int>, double> acc;
    for (const auto& site : all_sites(p)) {
        int i = site_index(site, p);
        for (const auto& [v, J] : p.couplings) {
            if (J <= 0.0) continue;
            Site t = site;
            for (int k = 0; k < p.d; ++k) {
                t.coords[k] = ((t.coords[k] + v[k]) % p.N + p.N) % p.N;
            }
            int j = site_index(t, p);
            if (i == j) continue;  // displacement wraps to self, constant term
            auto key = std::minmax(i, j);
            // J(v) and J(-v) both map onto this pair; count each ordered
            // direction once so the pair total is J^N_{ij}.
            if (i < j) acc[{key.first, key.second}] += J;
        }
    }
    std::vector<GroundEdge> out;
    out.reserve(acc.size());
    for (const auto& [key, J] : acc) {
        out.push_back({site_from_index(key.first, p), site_from_index(key.second, p), J});
    }
    return out;
}

EdgeSet edge_set(const ModelParams& p) {
    return {edges(p), all_sites(p)};
}

double circle_distance(double t, double s, double beta) {
    double d = std::fabs(t - s);
    return std::min(d, beta - d);
}

int torus_site_distance(const Site& a, const Site& b, const ModelParams& p) {
    int dist = 0;
    for (int k = 0; k < p.d; ++k) {
        int d = std::abs(a.coords[k] - b.coords[k]);
        dist += std::min(d, p.N - d);
    }
    return dist;
}

double spacetime_distance(const Point& u, const Point& v, const ModelParams& p) {
    return torus_site_distance(u.site, v.site, p) + circle_distance(u.time, v.time, p.beta);
}

std::string ModelParams::to_json() const {
    nlohmann::ordered_json j;
    j["d"] = d;
    j["N"] = N;
    j["beta"] = beta;
    j["h"] = h;
    j["rho"] = rho;
    j["lambda"] = lambda;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& [v, J] : couplings) {
        arr.push_back({{"displacement", v}, {"J", J}});
    }
    j["couplings"] = arr;
    return j.dump();
}

ModelParams ModelParams::from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("params: invalid JSON: ") + e.what());
    }
    ModelParams p;
    try {
        p.d = j.at("d").get<int>();
        p.N = j.at("N").get<int>();
        p.beta = j.at("beta").get<double>();
        p.h = j.at("h").get<double>();
        p.rho = j.at("rho").get<double>();
        p.lambda = j.at("lambda").get<double>();
        if (j.contains("couplings")) {
            for (const auto& e : j.at("couplings")) {
                Displacement v = e.at("displacement").get<Displacement>();
                p.couplings[v] = e.at("J").get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("params: missing or bad field: ") + e.what());
    }
    p.validate();
    return p;
}

std::string ModelParams::hash() const {
    const std::string s = to_json();
    uint64_t h64 = 1469598103934665603ull;
    for (unsigned char c : s) {
        h64 ^= c;
        h64 *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h64;
    return os.str();
}

}  // namespace rcr
