#include "celltrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace celltrack {

double region_median(const FloatRaster& plane, const CellRegion& region) {
    std::vector<double> v;
    v.reserve(region.pixels.size());
    for (const Point& p : region.pixels) v.push_back(plane(p.x, p.y));
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double hi = v[mid];
    if (v.size() % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

Multiplicity assign_multiplicity(const CellRegion& region, const MultiplicityMap& map) {
    const double zero = region_median(map.p_zero, region);
    const double one = region_median(map.p_one, region);
    const double many = region_median(map.p_many, region);
    if (one >= zero && one >= many) return Multiplicity::one;
    if (zero >= many) return Multiplicity::zero;
    return Multiplicity::many;
}

namespace {

Label label_at_shift(const CellRegion& r, const FloatRaster& dx, const FloatRaster& dy, const LabelFrame& target) {
    const double x = r.medoid.x + region_median(dx, r);
    const double y = r.medoid.y + region_median(dy, r);
    if (!std::isfinite(x) || !std::isfinite(y)) return 0;
    const long ix = std::lround(x);
    const long iy = std::lround(y);
    if (ix < 0 || iy < 0 || ix >= target.width() || iy >= target.height()) return 0;
    return target.raster(static_cast<int>(ix), static_cast<int>(iy));
}

void check_shape(const LabelFrame& f, const ProxyPair& pair, const char* who) {
    if (!f.raster.same_shape(pair.fwd_dx)) throw DataError(std::string(who) + ": proxies and labels differ in size");
}

}  // namespace

std::vector<Link> forward_track(const std::vector<CellRegion>& cells_a, const LabelFrame& frame_b,
                                const ProxyPair& pair) {
    check_shape(frame_b, pair, "forward_track");
    std::vector<Link> out;
    for (const auto& r : cells_a) {
        if (assign_multiplicity(r, pair.fwd_mult) != Multiplicity::one) continue;
        const Label to = label_at_shift(r, pair.fwd_dx, pair.fwd_dy, frame_b);
        if (to) out.push_back({r.label, to});
    }
    return out;
}

std::vector<Link> backward_track(const std::vector<CellRegion>& cells_b, const LabelFrame& frame_a,
                                 const ProxyPair& pair, const std::vector<Link>& existing) {
    check_shape(frame_a, pair, "backward_track");
    std::set<Label> linked;
    for (const Link& l : existing) linked.insert(l.to);
    std::vector<Link> out;
    for (const auto& r : cells_b) {
        if (linked.count(r.label)) continue;
        if (assign_multiplicity(r, pair.bwd_mult) != Multiplicity::one) continue;
        const Label from = label_at_shift(r, pair.bwd_dx, pair.bwd_dy, frame_a);
        if (from) out.push_back({from, r.label});
    }
    return out;
}

void track_pair(TrackGraph& graph, const std::vector<CellRegion>& cells_a, const LabelFrame& frame_a,
                const std::vector<CellRegion>& cells_b, const LabelFrame& frame_b, const ProxyPair& pair) {
    for (const auto& r : cells_a) graph.node({frame_a.frame_index, r.label}).forward = assign_multiplicity(r, pair.fwd_mult);
    for (const auto& r : cells_b)
        graph.node({frame_b.frame_index, r.label}).backward = assign_multiplicity(r, pair.bwd_mult);
    std::vector<Link> links = forward_track(cells_a, frame_b, pair);
    const std::vector<Link> back = backward_track(cells_b, frame_a, pair, links);
    links.insert(links.end(), back.begin(), back.end());
    for (const Link& l : links) graph.add_edge({frame_a.frame_index, l.from}, {frame_b.frame_index, l.to});
}

TrackGraph track_video(const std::vector<LabelFrame>& frames, const std::vector<ProxyPair>& pairs) {
    if (!frames.empty() && pairs.size() + 1 != frames.size())
        throw DataError("track_video: expected " + std::to_string(frames.size() - 1) + " frame pairs, got " +
                        std::to_string(pairs.size()));
    TrackGraph g;
    std::vector<std::vector<CellRegion>> regions(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        regions[i] = region_properties(frames[i]);
        add_frame_nodes(g, regions[i]);
    }
    for (std::size_t i = 0; i + 1 < frames.size(); ++i)
        track_pair(g, regions[i], frames[i], regions[i + 1], frames[i + 1], pairs[i]);
    g.classify_edges();
    return g;
}

void assign_multiplicities(TrackGraph& graph, const std::vector<LabelFrame>& frames,
                           const std::vector<ProxyPair>& pairs) {
    if (!frames.empty() && pairs.size() + 1 != frames.size())
        throw DataError("assign_multiplicities: expected " + std::to_string(frames.size() - 1) + " frame pairs, got " +
                        std::to_string(pairs.size()));
    std::vector<CellRegion> next;
    for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
        const auto cur = i == 0 ? region_properties(frames[i]) : std::move(next);
        next = region_properties(frames[i + 1]);
        for (const auto& r : cur) graph.node({frames[i].frame_index, r.label}).forward = assign_multiplicity(r, pairs[i].fwd_mult);
        for (const auto& r : next)
            graph.node({frames[i + 1].frame_index, r.label}).backward = assign_multiplicity(r, pairs[i].bwd_mult);
    }
}

}  // namespace celltrack
