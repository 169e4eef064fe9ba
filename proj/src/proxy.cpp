#include "celltrack/proxy.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace celltrack {

FrameWindow make_window(int center, int n_frames, int gap, int video_length) {
    if (video_length < 1) throw DataError("make_window: video length must be >= 1");
    if (n_frames < 3 || n_frames % 2 == 0) throw DataError("make_window: N must be odd and >= 3");
    if (gap < 1) throw DataError("make_window: gap must be >= 1");
    FrameWindow w;
    w.n_frames = n_frames;
    w.gap = gap;
    w.center = center;
    const int m = (n_frames - 3) / 2;
    auto clamp = [&](int f) { return std::clamp(f, 0, video_length - 1); };
    for (int i = m; i >= 1; --i) w.frames.push_back(clamp(center - 1 - i * gap));
    w.frames.push_back(clamp(center - 1));
    w.frames.push_back(clamp(center));
    w.frames.push_back(clamp(center + 1));
    for (int i = 1; i <= m; ++i) w.frames.push_back(clamp(center + 1 + i * gap));
    return w;
}

std::vector<FramePair> make_pairs(const FrameWindow& window) {
    const auto& f = window.frames;
    const int n = static_cast<int>(f.size());
    const int mid = n / 2;  // position of t; t-1 and t+1 sit next to it
    std::vector<FramePair> pairs;
    for (int i = 0; i + 1 < n; ++i) pairs.push_back({f[i], f[i + 1]});
    for (int i = 0; i < n; ++i) {
        if (i >= mid - 1 && i <= mid + 1) continue;
        pairs.push_back({f[mid], f[i]});
    }
    return pairs;
}

ProxyFrame make_proxy_frame(const LabelFrame& frame, MedoidMetric metric) {
    return make_proxy_frame(frame, region_properties(frame, metric));
}

ProxyFrame make_proxy_frame(const LabelFrame& frame, const std::vector<CellRegion>& regions) {
    ProxyFrame p{raster_cast<float>(compute_edm(frame)), FloatRaster(frame.width(), frame.height(), 0.0f)};
    for (const auto& r : regions) {
        const auto d = compute_geodesic_distance(r, r.medoid);
        for (std::size_t i = 0; i < r.pixels.size(); ++i) p.gdcm(r.pixels[i].x, r.pixels[i].y) = static_cast<float>(d[i]);
    }
    return p;
}

ProxyPair make_proxy_pair(const LabelFrame& frame_a, const LabelFrame& frame_b, const std::vector<Link>& links) {
    return make_proxy_pair(frame_a, region_properties(frame_a), frame_b, region_properties(frame_b), links);
}

namespace {

void write_one_hot(MultiplicityMap& m, const CellRegion& r, std::size_t count) {
    const int cat = count == 0 ? 0 : count == 1 ? 1 : 2;
    for (const Point& p : r.pixels) {
        m.p_zero(p.x, p.y) = cat == 0 ? 1.0f : 0.0f;
        m.p_one(p.x, p.y) = cat == 1 ? 1.0f : 0.0f;
        m.p_many(p.x, p.y) = cat == 2 ? 1.0f : 0.0f;
    }
}

void fill(FloatRaster& dx, FloatRaster& dy, const CellRegion& r, int vx, int vy) {
    for (const Point& p : r.pixels) {
        dx(p.x, p.y) = static_cast<float>(vx);
        dy(p.x, p.y) = static_cast<float>(vy);
    }
}

}  // namespace

ProxyPair make_proxy_pair(const LabelFrame& frame_a, const std::vector<CellRegion>& regions_a,
                          const LabelFrame& frame_b, const std::vector<CellRegion>& regions_b,
                          const std::vector<Link>& links) {
    if (!frame_a.raster.same_shape(frame_b.raster)) throw DataError("make_proxy_pair: frames differ in size");
    std::map<Label, const CellRegion*> ra, rb;
    for (const auto& r : regions_a) ra[r.label] = &r;
    for (const auto& r : regions_b) rb[r.label] = &r;
    std::map<Label, std::vector<Label>> next, prev;
    for (const Link& l : links) {
        if (!ra.count(l.from) || !rb.count(l.to))
            throw DataError("make_proxy_pair: dangling link " + std::to_string(l.from) + "->" + std::to_string(l.to) +
                            " between frames " + std::to_string(frame_a.frame_index) + " and " +
                            std::to_string(frame_b.frame_index));
        next[l.from].push_back(l.to);
        prev[l.to].push_back(l.from);
    }
    ProxyPair p(frame_a.width(), frame_a.height());
    for (const auto& r : regions_a) {
        const auto it = next.find(r.label);
        const std::size_t count = it == next.end() ? 0 : it->second.size();
        write_one_hot(p.fwd_mult, r, count);
        if (count == 1) {
            const CellRegion& to = *rb[it->second.front()];
            fill(p.fwd_dx, p.fwd_dy, r, to.medoid.x - r.medoid.x, to.medoid.y - r.medoid.y);
        }
    }
    for (const auto& r : regions_b) {
        const auto it = prev.find(r.label);
        const std::size_t count = it == prev.end() ? 0 : it->second.size();
        write_one_hot(p.bwd_mult, r, count);
        if (count == 1) {
            const CellRegion& from = *ra[it->second.front()];
            fill(p.bwd_dx, p.bwd_dy, r, from.medoid.x - r.medoid.x, from.medoid.y - r.medoid.y);
        }
    }
    return p;
}

std::vector<Link> links_between(const TrackGraph& graph, int frame_a, int frame_b) {
    if (frame_b <= frame_a) throw DataError("links_between: frames must be increasing");
    std::vector<Link> out;
    for (const NodeKey& start : graph.nodes_in_frame(frame_a)) {
        std::vector<NodeKey> stack{start};
        std::vector<Label> reached;
        while (!stack.empty()) {
            const NodeKey k = stack.back();
            stack.pop_back();
            if (k.frame == frame_b) {
                reached.push_back(k.label);
                continue;
            }
            for (const NodeKey& s : graph.successors(k))
                if (s.frame <= frame_b) stack.push_back(s);
        }
        std::sort(reached.begin(), reached.end());
        reached.erase(std::unique(reached.begin(), reached.end()), reached.end());
        for (Label l : reached) out.push_back({start.label, l});
    }
    return out;
}

}  // namespace celltrack
