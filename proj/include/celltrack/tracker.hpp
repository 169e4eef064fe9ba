#pragma once

#include <vector>

#include "celltrack/grid.hpp"
#include "celltrack/proxy.hpp"
#include "celltrack/track_graph.hpp"

namespace celltrack {

/// Median of the values of `plane` over the region's pixels (mean of the two
/// middle values for even counts).
double region_median(const FloatRaster& plane, const CellRegion& region);

/// Category with the highest median probability; ties resolve one > zero > many.
Multiplicity assign_multiplicity(const CellRegion& region, const MultiplicityMap& map);

/// Links every frame-a cell of forward category one to the frame-b cell under
/// its medoid shifted by the median forward displacement.
std::vector<Link> forward_track(const std::vector<CellRegion>& cells_a, const LabelFrame& frame_b,
                                const ProxyPair& pair);

/// Links frame-b cells without an incoming link and of backward category one
/// to the frame-a cell under their backward-shifted medoid.
std::vector<Link> backward_track(const std::vector<CellRegion>& cells_b, const LabelFrame& frame_a,
                                 const ProxyPair& pair, const std::vector<Link>& existing);

/// Runs both passes for the pair (a, b), stores multiplicities on the nodes and
/// adds the edges. Nodes for both frames must already be in the graph.
void track_pair(TrackGraph& graph, const std::vector<CellRegion>& cells_a, const LabelFrame& frame_a,
                const std::vector<CellRegion>& cells_b, const LabelFrame& frame_b, const ProxyPair& pair);

/// Builds the whole graph; pairs[i] holds the proxies of (frames[i], frames[i+1]).
TrackGraph track_video(const std::vector<LabelFrame>& frames, const std::vector<ProxyPair>& pairs);

/// Recomputes node multiplicities of an existing graph (e.g. one read from a
/// track file) from the pair proxies, leaving its edges untouched.
void assign_multiplicities(TrackGraph& graph, const std::vector<LabelFrame>& frames,
                           const std::vector<ProxyPair>& pairs);

}  // namespace celltrack
