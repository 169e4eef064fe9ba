#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include "celltrack/grid.hpp"

namespace celltrack {

enum class Multiplicity : std::uint8_t { zero, one, many };
enum class EdgeKind : std::uint8_t { normal, merge, split };

const char* to_string(Multiplicity m);
const char* to_string(EdgeKind k);

struct NodeKey {
    int frame = 0;
    Label label = 0;
    friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
};

/// The per-node part of a CellRegion that the graph keeps (pixels stay in the label rasters).
struct RegionSummary {
    int area = 0;
    Point medoid;
    RealPoint centroid;
    double axis_angle = 0.0;
    double axis_length = 0.0;
    double eccentricity = 0.0;
    bool touches_edge = false;
};

RegionSummary summarize(const CellRegion& r);

struct TrackNode {
    NodeKey key;
    RegionSummary region;
    Multiplicity forward = Multiplicity::one;
    Multiplicity backward = Multiplicity::one;
};

struct TrackEdge {
    NodeKey from;
    NodeKey to;
    EdgeKind kind = EdgeKind::normal;
    bool conflict = false;  ///< part of both a merge star and a split star
};

/// Acyclic temporal link graph. Edges always point forward in time; containers
/// are ordered so iteration is deterministic.
class TrackGraph {
public:
    void add_node(TrackNode node);
    bool has_node(const NodeKey& k) const { return nodes_.count(k) != 0; }
    const TrackNode& node(const NodeKey& k) const;
    TrackNode& node(const NodeKey& k);

    /// Adds from -> to; both nodes must exist and to.frame > from.frame. Duplicates are ignored.
    void add_edge(const NodeKey& from, const NodeKey& to);
    void remove_edge(const NodeKey& from, const NodeKey& to);
    bool has_edge(const NodeKey& from, const NodeKey& to) const;
    void remove_node(const NodeKey& k);
    void remove_frame(int frame);

    const std::vector<NodeKey>& successors(const NodeKey& k) const;
    const std::vector<NodeKey>& predecessors(const NodeKey& k) const;

    /// Sets merge/split/normal kinds from current degrees.
    void classify_edges();

    const std::map<NodeKey, TrackNode>& nodes() const { return nodes_; }
    std::vector<TrackEdge> edges() const;
    std::vector<NodeKey> nodes_in_frame(int frame) const;
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t edge_count() const { return edges_.size(); }
    int first_frame() const;
    int last_frame() const;

    /// Weakly connected component index per node, numbered in node order.
    std::map<NodeKey, int> lineages() const;

private:
    struct EdgeInfo {
        EdgeKind kind = EdgeKind::normal;
        bool conflict = false;
    };
    std::map<NodeKey, TrackNode> nodes_;
    std::map<std::pair<NodeKey, NodeKey>, EdgeInfo> edges_;
    std::map<NodeKey, std::vector<NodeKey>> succ_;
    std::map<NodeKey, std::vector<NodeKey>> pred_;
};

/// Node map for one frame built from its regions; multiplicities default to one.
void add_frame_nodes(TrackGraph& g, const std::vector<CellRegion>& regions);

}  // namespace celltrack
