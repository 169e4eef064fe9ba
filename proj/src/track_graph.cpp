#include "celltrack/track_graph.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace celltrack {

namespace {
const std::vector<NodeKey> kNoKeys;

void insert_sorted(std::vector<NodeKey>& v, const NodeKey& k) {
    auto it = std::lower_bound(v.begin(), v.end(), k);
    if (it == v.end() || *it != k) v.insert(it, k);
}

void erase_sorted(std::vector<NodeKey>& v, const NodeKey& k) {
    auto it = std::lower_bound(v.begin(), v.end(), k);
    if (it != v.end() && *it == k) v.erase(it);
}

std::string key_str(const NodeKey& k) {
    return "(" + std::to_string(k.frame) + "," + std::to_string(k.label) + ")";
}
}  // namespace

const char* to_string(Multiplicity m) {
    switch (m) {
        case Multiplicity::zero: return "zero";
        case Multiplicity::one: return "one";
        case Multiplicity::many: return "many";
    }
    return "?";
}

const char* to_string(EdgeKind k) {
    switch (k) {
        case EdgeKind::normal: return "normal";
        case EdgeKind::merge: return "merge";
        case EdgeKind::split: return "split";
    }
    return "?";
}

RegionSummary summarize(const CellRegion& r) {
    RegionSummary s;
    s.area = r.area;
    s.medoid = r.medoid;
    s.centroid = r.centroid;
    s.axis_angle = r.major_axis_angle;
    s.axis_length = r.major_axis_length;
    s.eccentricity = r.eccentricity;
    s.touches_edge = r.touches_edge;
    return s;
}

void TrackGraph::add_node(TrackNode node) {
    const NodeKey k = node.key;
    nodes_[k] = std::move(node);
}

const TrackNode& TrackGraph::node(const NodeKey& k) const {
    auto it = nodes_.find(k);
    if (it == nodes_.end()) throw DataError("unknown node " + key_str(k));
    return it->second;
}

TrackNode& TrackGraph::node(const NodeKey& k) {
    auto it = nodes_.find(k);
    if (it == nodes_.end()) throw DataError("unknown node " + key_str(k));
    return it->second;
}

void TrackGraph::add_edge(const NodeKey& from, const NodeKey& to) {
    if (!has_node(from) || !has_node(to)) throw DataError("edge " + key_str(from) + "->" + key_str(to) + " references a missing node");
    if (to.frame <= from.frame) throw DataError("edge " + key_str(from) + "->" + key_str(to) + " does not go forward in time");
    if (!edges_.emplace(std::make_pair(from, to), EdgeInfo{}).second) return;
    insert_sorted(succ_[from], to);
    insert_sorted(pred_[to], from);
}

void TrackGraph::remove_edge(const NodeKey& from, const NodeKey& to) {
    if (edges_.erase({from, to}) == 0) return;
    erase_sorted(succ_[from], to);
    erase_sorted(pred_[to], from);
}

bool TrackGraph::has_edge(const NodeKey& from, const NodeKey& to) const { return edges_.count({from, to}) != 0; }

void TrackGraph::remove_node(const NodeKey& k) {
    if (auto it = succ_.find(k); it != succ_.end()) {
        for (const NodeKey& t : std::vector<NodeKey>(it->second)) remove_edge(k, t);
        succ_.erase(k);
    }
    if (auto it = pred_.find(k); it != pred_.end()) {
        for (const NodeKey& s : std::vector<NodeKey>(it->second)) remove_edge(s, k);
        pred_.erase(k);
    }
    nodes_.erase(k);
}

void TrackGraph::remove_frame(int frame) {
    for (const NodeKey& k : nodes_in_frame(frame)) remove_node(k);
}

const std::vector<NodeKey>& TrackGraph::successors(const NodeKey& k) const {
    auto it = succ_.find(k);
    return it == succ_.end() ? kNoKeys : it->second;
}

const std::vector<NodeKey>& TrackGraph::predecessors(const NodeKey& k) const {
    auto it = pred_.find(k);
    return it == pred_.end() ? kNoKeys : it->second;
}

void TrackGraph::classify_edges() {
    for (auto& [fromto, info] : edges_) {
        const bool merge = predecessors(fromto.second).size() >= 2;
        const bool split = successors(fromto.first).size() >= 2;
        info.conflict = merge && split;
        info.kind = merge ? EdgeKind::merge : split ? EdgeKind::split : EdgeKind::normal;
    }
}

std::vector<TrackEdge> TrackGraph::edges() const {
    std::vector<TrackEdge> out;
    out.reserve(edges_.size());
    for (const auto& [fromto, info] : edges_) out.push_back({fromto.first, fromto.second, info.kind, info.conflict});
    return out;
}

std::vector<NodeKey> TrackGraph::nodes_in_frame(int frame) const {
    std::vector<NodeKey> out;
    for (auto it = nodes_.lower_bound({frame, 0}); it != nodes_.end() && it->first.frame == frame; ++it)
        out.push_back(it->first);
    return out;
}

int TrackGraph::first_frame() const { return nodes_.empty() ? 0 : nodes_.begin()->first.frame; }
int TrackGraph::last_frame() const { return nodes_.empty() ? -1 : nodes_.rbegin()->first.frame; }

std::map<NodeKey, int> TrackGraph::lineages() const {
    std::vector<NodeKey> keys;
    keys.reserve(nodes_.size());
    std::map<NodeKey, int> index;
    for (const auto& [k, n] : nodes_) {
        index[k] = static_cast<int>(keys.size());
        keys.push_back(k);
    }
    std::vector<int> parent(keys.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    for (const auto& [fromto, info] : edges_) {
        const int a = find(index[fromto.first]);
        const int b = find(index[fromto.second]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<NodeKey, int> out;
    std::vector<int> component(keys.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const int root = find(static_cast<int>(i));
        if (component[root] < 0) component[root] = next++;
        out[keys[i]] = component[root];
    }
    return out;
}

void add_frame_nodes(TrackGraph& g, const std::vector<CellRegion>& regions) {
    for (const auto& r : regions) {
        TrackNode n;
        n.key = {r.frame_index, r.label};
        n.region = summarize(r);
        g.add_node(n);
    }
}

}  // namespace celltrack
