#pragma once

#include <vector>

#include "celltrack/grid.hpp"
#include "celltrack/track_graph.hpp"

namespace celltrack {

/// N considered frames around a center frame t: the three central frames plus
/// m = (N-3)/2 frames on each side spaced by `gap`. Indices outside the video
/// are clamped, so boundary frames may repeat.
struct FrameWindow {
    int n_frames = 3;
    int gap = 1;
    int center = 0;
    std::vector<int> frames;  ///< ascending positions, size n_frames

    /// Frames covered from the first to the last considered frame: (N-3)*gap + 3.
    int span() const { return (n_frames - 3) * gap + 3; }
};

struct FramePair {
    int a = 0;
    int b = 0;
    friend bool operator==(const FramePair&, const FramePair&) = default;
};

FrameWindow make_window(int center, int n_frames, int gap, int video_length);

/// 2N-4 pairs: N-1 between consecutive window frames, then (t, w) for every
/// window frame w other than t-1, t and t+1.
std::vector<FramePair> make_pairs(const FrameWindow& window);

/// Per-pixel (P=0, P=1, P>1) probability planes.
struct MultiplicityMap {
    FloatRaster p_zero;
    FloatRaster p_one;
    FloatRaster p_many;

    MultiplicityMap() = default;
    MultiplicityMap(int w, int h) : p_zero(w, h, 0.0f), p_one(w, h, 0.0f), p_many(w, h, 0.0f) {}
};

struct ProxyFrame {
    FloatRaster edm;
    FloatRaster gdcm;
};

/// Forward maps live on frame a's cells (value = center_b - center_a); backward
/// maps live on frame b's cells (value = center_a - center_b).
struct ProxyPair {
    FloatRaster fwd_dx, fwd_dy, bwd_dx, bwd_dy;
    MultiplicityMap fwd_mult, bwd_mult;

    ProxyPair() = default;
    ProxyPair(int w, int h)
        : fwd_dx(w, h, 0.0f), fwd_dy(w, h, 0.0f), bwd_dx(w, h, 0.0f), bwd_dy(w, h, 0.0f), fwd_mult(w, h),
          bwd_mult(w, h) {}
};

struct Link {
    Label from = 0;  ///< label in the earlier frame
    Label to = 0;    ///< label in the later frame
    friend auto operator<=>(const Link&, const Link&) = default;
};

ProxyFrame make_proxy_frame(const LabelFrame& frame, MedoidMetric metric = MedoidMetric::euclidean);
ProxyFrame make_proxy_frame(const LabelFrame& frame, const std::vector<CellRegion>& regions);

ProxyPair make_proxy_pair(const LabelFrame& frame_a, const LabelFrame& frame_b, const std::vector<Link>& links);
ProxyPair make_proxy_pair(const LabelFrame& frame_a, const std::vector<CellRegion>& regions_a,
                          const LabelFrame& frame_b, const std::vector<CellRegion>& regions_b,
                          const std::vector<Link>& links);

/// Links between frames a < b: u at a is linked to v at b when v descends from u.
std::vector<Link> links_between(const TrackGraph& graph, int frame_a, int frame_b);

}  // namespace celltrack
