#pragma once

// Interval decomposition of space-time relative to a special point set,
// path connectivity over unblocked intervals, clusters and pivotality
// for two-replica configurations, and the single-replica left path.
//
// Paths traverse each interval from one endpoint to the other; at a
// shared endpoint the continuation is lateral (to the partner circle of
// a ground flip), vertical (same circle), or through the ghost site.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcr/labels.hpp"
#include "rcr/lattice.hpp"
#include "rcr/pointprocess.hpp"

namespace rcr {

/// Whether a path may continue vertically (same circle) through an
/// endpoint generated by a ground flip arrival.  `any_endpoint` admits
/// the single-replica left path as a pair path, which the switching
/// bijections rely on; `ghost_or_special` is the narrower reading that
/// only lets paths pass where the endpoint is a special point or a
/// ghost flip.
enum class PassThrough { any_endpoint, ghost_or_special };

enum class CutKind : uint8_t { ground_arrival, ghost_arrival, special };

/// Endpoint identity: position `idx` in the cut list of `site`'s
/// circle.  Adjacency checks are id-based, never float-equality-based.
struct CutRef {
    int site = -1;
    int idx = -1;
    friend bool operator==(const CutRef& a, const CutRef& b) {
        return a.site == b.site && a.idx == b.idx;
    }
};

/// Ordered sequence of interval-or-ghost elements.  `nodes[k] == ghost_id`
/// marks a ghost visit; entries/exits give the traversal endpoints of
/// ground elements.
struct PathObj {
    static constexpr int ghost_id = -1;
    std::vector<int> nodes;
    std::vector<CutRef> entries;
    std::vector<CutRef> exits;
    /// Set when the selection order had to fall back to node-id
    /// comparison because two candidates tied in every run length.
    bool tie_fallback = false;

    std::size_t size() const { return nodes.size(); }
};

class IntervalGraph {
  public:
    struct Cut {
        double time;
        CutKind kind;
        int ref;  // arrival id or index into special set
        int node_below, node_above;
    };

    struct Node {
        int site;                 // circle index
        int cut_start, cut_end;   // indices into cuts[site]; -1 for a closed circle
        double t0, len;
        Label l1 = Label::r, l2 = Label::r;
        int nmarks = 0;
        bool blocked = false;
    };

    const ModelParams& params() const { return params_; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<std::vector<Cut>>& cuts() const { return cuts_; }
    const std::vector<Point>& special() const { return special_; }
    PassThrough policy() const { return policy_; }
    void set_policy(PassThrough p) { policy_ = p; }

    CutRef cutref_of(const Point& pt) const;  // throws if pt not in the special set
    const Cut& cut(const CutRef& r) const { return cuts_[r.site][r.idx]; }
    /// Second endpoint of the ground arrival that generated this cut.
    CutRef partner_of(const CutRef& r) const;

    /// Recompute per-node labels and blocked flags for a new label pair
    /// on the same skeleton.  Queries stay pure; this is the one
    /// mutating entry point (used by estimators iterating label pairs).
    void relabel(const LabelConfig& nu1, const LabelConfig& nu2);

    /// Same from packed per-node masks (bit k set = node k labeled r);
    /// used by the exact switching checker.
    void relabel_bits(uint64_t bits1, uint64_t bits2);

    // --- low-level traversal states (used by path search) -------------
    // state = 2*node + port (0: exit at cut_start, 1: exit at cut_end);
    // ghost state = 2*nodes.size().
    int ghost_state() const { return 2 * (int)nodes_.size(); }
    int n_states() const { return ghost_state() + 1; }
    struct Transition {
        int state;
        int node;  // node traversed to get there (ghost_id for the ghost)
    };
    /// All continuations from `state`, skipping blocked nodes.  `avoid`
    /// bans vertical passage at those special points; ground_only bans
    /// entering the ghost.
    void transitions(int state, std::vector<Transition>& out,
                     const std::vector<CutRef>* avoid = nullptr, bool ground_only = false) const;
    /// Entry states for a path starting at `from` (ghost or special point).
    std::vector<Transition> start_states(const GhostOrPoint& from, const CutRef* avoid = nullptr) const;
    /// True when `state` means the path just arrived at `to`.
    bool accepts(int state, const GhostOrPoint& to) const;

    friend IntervalGraph decompose(const CombinedArrivals& c, const LabelConfig& nu1,
                                   const LabelConfig& nu2, const std::vector<Point>& G,
                                   const ModelParams& p, PassThrough policy);

  private:
    ModelParams params_;
    std::vector<Node> nodes_;
    std::vector<std::vector<Cut>> cuts_;
    std::vector<std::array<CutRef, 2>> ground_ends_;  // ground arrival id -> two endpoints
    std::vector<CutRef> ghost_ends_;                  // ghost arrival id -> endpoint
    std::vector<Point> special_;
    std::vector<std::vector<double>> marks_;  // combined mark times per site
    PassThrough policy_ = PassThrough::any_endpoint;
};

/// Build the interval graph of a combined configuration, a compatible
/// label pair and a special set G.  Throws std::invalid_argument when a
/// label jumps off the interval skeleton (incompatible labels).
IntervalGraph decompose(const CombinedArrivals& c, const LabelConfig& nu1, const LabelConfig& nu2,
                        const std::vector<Point>& G, const ModelParams& p,
                        PassThrough policy = PassThrough::any_endpoint);

/// Blocked = both labels r and at least one combined mark inside.
bool is_blocked(const IntervalGraph::Node& iv);

/// True iff a path of non-blocked intervals joins u to v.  ground_only
/// forbids interior ghost visits (ghost may still be the final stop).
bool connected_unblocked(const IntervalGraph& g, const GhostOrPoint& u, const GhostOrPoint& v,
                         bool ground_only = false);

/// Same, but paths may not pass through `avoid` (or any listed point).
bool connected_unblocked_avoiding(const IntervalGraph& g, const GhostOrPoint& u,
                                  const GhostOrPoint& v, const Point& avoid,
                                  bool ground_only = false);
bool connected_unblocked_avoiding_all(const IntervalGraph& g, const GhostOrPoint& u,
                                      const GhostOrPoint& v, const std::vector<Point>& avoid,
                                      bool ground_only = false);

/// All intervals reachable by unblocked paths from `start`, never
/// passing through `avoid` when given.
std::vector<int> cluster(const IntervalGraph& g, const GhostOrPoint& start,
                         const std::optional<Point>& avoid = std::nullopt,
                         bool ground_only = false);

/// Every unblocked path from u to the ghost passes through v (false
/// when u is not connected to the ghost at all).
bool is_pivotal(const IntervalGraph& g, const Point& v, const Point& u);

/// Some unblocked loop passes through v and every such loop passes
/// through u (false when no loop through v exists).
bool is_loop_pivotal(const IntervalGraph& g, const Point& v, const Point& u);

/// An unblocked loop through v exists, optionally avoiding a point.
bool has_unblocked_loop(const IntervalGraph& g, const Point& v,
                        const std::optional<Point>& avoid = std::nullopt);

/// Debug dump (nodes, arcs, adjacency, blocked flags) as a JSON text.
std::string dump_json(const IntervalGraph& g);

// --- single-replica left path ---------------------------------------

struct SingleArc {
    int site;
    double t0, t1;  // arc [t0, t1) with wraparound when t1 <= t0
    double length(double beta) const;
};

/// The unique ground left path from u to the ghost: start on the
/// l-labeled interval adjacent to u, exit each interval through its far
/// endpoint, hop circles at ground flips, stop at a ghost flip.
struct LeftPath {
    std::vector<SingleArc> arcs;  // the ground intervals, in walk order
    bool ends_at_ghost = true;
};

LeftPath left_ground_path(const Arrivals& arr, const LabelConfig& nu, const Point& u,
                          const ModelParams& p);

}  // namespace rcr
