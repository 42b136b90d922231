#pragma once

// Model parameters, torus geometry and space-time points shared by all
// other modules.  Everything here is immutable after construction and
// freely shareable across threads.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rcr {

/// d-tuple of integer coordinates, each reduced modulo N.
struct Site {
    std::vector<int> coords;

    friend bool operator==(const Site& a, const Site& b) { return a.coords == b.coords; }
    friend bool operator<(const Site& a, const Site& b) { return a.coords < b.coords; }
};

/// Displacement on the integer lattice (not reduced mod N).
using Displacement = std::vector<int>;

struct ModelParams {
    int d = 1;
    int N = 1;
    double beta = 1.0;
    // Finite-support coupling map on Z^d displacements, symmetric under
    // negation.  Keys are never the zero displacement.
    std::map<Displacement, double> couplings;
    double h = 0.0;
    double rho = 0.0;
    double lambda = 0.0;

    int n_sites() const;
    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    std::string to_json() const;
    static ModelParams from_json(const std::string& text);
    /// FNV-1a hash of the canonical JSON form, hex-encoded.
    std::string hash() const;
};

/// Point on a space-time circle: a site plus a time in [0, beta).
struct Point {
    Site site;
    double time = 0.0;

    friend bool operator==(const Point& a, const Point& b) {
        return a.site == b.site && a.time == b.time;
    }
    friend bool operator<(const Point& a, const Point& b) {
        if (a.site < b.site) return true;
        if (b.site < a.site) return false;
        return a.time < b.time;
    }
};

/// Either a ground point or the ghost site.
struct GhostOrPoint {
    std::optional<Point> point;  // empty = ghost

    static GhostOrPoint ghost() { return {}; }
    static GhostOrPoint at(Point p) { return {std::move(p)}; }
    bool is_ghost() const { return !point.has_value(); }
};

/// Unordered ground edge {a, b}; `coupling` is the torus coupling
/// J^N_{ab} = sum of J(v) over displacements v with a + v = b (mod N).
struct GroundEdge {
    Site a, b;
    double coupling = 0.0;
};

/// Linear index of a site, row-major over coordinates.
int site_index(const Site& s, const ModelParams& p);
Site site_from_index(int idx, const ModelParams& p);
std::vector<Site> all_sites(const ModelParams& p);

/// Sum of J(v) over the coupling support.
double jbar(const ModelParams& p);

/// All ground edges with positive torus coupling, each unordered pair
/// listed once.  Wraparound contributions (e.g. N=2) accumulate into a
/// single edge's coupling so total flip intensity stays rho * sum_j J_ij.
std::vector<GroundEdge> edges(const ModelParams& p);

/// Ground edges plus the ghost edges (one per site).
struct EdgeSet {
    std::vector<GroundEdge> ground;
    std::vector<Site> ghost;
};
EdgeSet edge_set(const ModelParams& p);

/// Torus graph distance between sites plus circular time distance
/// min(|t-s|, beta-|t-s|).
double spacetime_distance(const Point& u, const Point& v, const ModelParams& p);

/// Torus graph distance between sites (shortest path over ground edges
/// of unit step per coordinate, i.e. L1 with wraparound).
int torus_site_distance(const Site& a, const Site& b, const ModelParams& p);

/// Circular distance on the time circle of circumference beta.
double circle_distance(double t, double s, double beta);

}  // namespace rcr
