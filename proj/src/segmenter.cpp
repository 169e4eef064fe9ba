#include "celltrack/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

namespace celltrack {

void SegmentationParams::validate() const {
    if (!(center_sigma_min > 0.0) || center_sigma_max < center_sigma_min)
        throw DataError("segmentation: invalid center sigma bounds");
    if (!(center_sigma_fraction > 0.0)) throw DataError("segmentation: center_sigma_fraction must be positive");
    if (!(amplitude_ratio_threshold > 0.0) || amplitude_ratio_threshold > 1.0)
        throw DataError("segmentation: amplitude_ratio_threshold must lie in (0, 1]");
    if (!(center_size_min_fraction > 0.0) || center_size_max_fraction < center_size_min_fraction)
        throw DataError("segmentation: invalid center size bounds");
    if (expected_center_size < 0.0) throw DataError("segmentation: expected_center_size must be >= 0");
    if (!(center_eccentricity_max > 0.0)) throw DataError("segmentation: center_eccentricity_max must be positive");
}

LabelFrame segment_edm(const RealRaster& edm, const SegmentationParams& params) {
    const LabelFrame seeds = regional_maxima(edm, params.edm_threshold);
    return watershed(edm, seeds, params.edm_threshold);
}

double estimate_center_sigma(const RealRaster& edm, const SegmentationParams& params) {
    double thickness = params.thickness_override;
    if (!(thickness > 0.0)) {
        double sum = 0.0;
        std::size_t n = 0;
        for (double v : edm.values())
            if (v > params.edm_threshold) {
                sum += v;
                ++n;
            }
        thickness = n ? 2.0 * sum / static_cast<double>(n) : 0.0;
    }
    return std::clamp(params.center_sigma_fraction * thickness, params.center_sigma_min, params.center_sigma_max);
}

namespace {

double gaussian_of(double d, double sigma) {
    return std::exp(-(d * d) / (2.0 * sigma * sigma)) / (std::sqrt(2.0 * M_PI) * sigma);
}

// Center regions: watershed basins of -LoG(g) grown from its regional maxima
// over foreground pixels where -LoG(g) > 0.
LabelFrame center_basins(const RealRaster& g, const Raster2D<std::uint8_t>& foreground, double sigma) {
    const RealRaster lap = laplacian(gaussian_blur(g, sigma));
    RealRaster land(g.width(), g.height(), -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < land.size(); ++i)
        if (foreground[i]) land[i] = -lap[i];
    return watershed(land, regional_maxima(land, 0.0), 0.0);
}

}  // namespace

double ideal_center_area(double sigma) {
    const int r = static_cast<int>(std::ceil(8.0 * sigma)) + 2;
    const int n = 2 * r + 1;
    RealRaster g(n, n, 0.0);
    Raster2D<std::uint8_t> fg(n, n, 1);
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) g(x, y) = gaussian_of(std::hypot(x - r, y - r), sigma);
    const LabelFrame basins = center_basins(g, fg, sigma);
    const Label core = basins.raster(r, r);
    if (core == 0) return 1.0;
    int area = 0;
    for (Label v : basins.raster.values()) area += v == core ? 1 : 0;
    return area;
}

CenterSet detect_centers(const RealRaster& gdcm, const Raster2D<std::uint8_t>& foreground,
                         const SegmentationParams& params, double sigma) {
    if (!gdcm.same_shape(foreground)) throw DataError("detect_centers: gdcm and foreground differ in size");
    CenterSet out;
    out.sigma = sigma;
    out.expected_size = params.expected_center_size > 0.0 ? params.expected_center_size : ideal_center_area(sigma);
    RealRaster g(gdcm.width(), gdcm.height(), 0.0);
    for (std::size_t i = 0; i < g.size(); ++i)
        if (foreground[i]) g[i] = gaussian_of(gdcm[i], sigma);
    const LabelFrame basins = center_basins(g, foreground, sigma);
    const auto regions = region_properties(basins);

    const double lo = params.center_size_min_fraction * out.expected_size;
    const double hi = params.center_size_max_fraction * out.expected_size;
    std::vector<Label> remap(static_cast<std::size_t>(basins.max_label()) + 1, 0);
    out.amplitude.push_back(0.0);
    Label next = 0;
    for (const auto& r : regions) {
        if (r.area < lo || r.area > hi) continue;
        if (r.eccentricity > params.center_eccentricity_max) continue;
        remap[r.label] = ++next;
        double amp = 0.0;
        for (const Point& p : r.pixels) amp = std::max(amp, g(p.x, p.y));
        out.amplitude.push_back(amp);
    }
    out.centers = LabelFrame(gdcm.width(), gdcm.height(), 0);
    for (std::size_t i = 0; i < g.size(); ++i) out.centers.raster[i] = remap[basins.raster[i]];
    return out;
}

LabelFrame merge_fragments(const LabelFrame& fragments, const CenterSet& centers, const SegmentationParams& params,
                           int* merges) {
    const auto& lab = fragments.raster;
    if (!lab.same_shape(centers.centers.raster)) throw DataError("merge_fragments: fragments and centers differ in size");
    const Label maxl = fragments.max_label();
    const std::size_t n = static_cast<std::size_t>(maxl) + 1;

    // Each center belongs to the fragment it overlaps most (ties: lower label).
    std::map<std::pair<Label, Label>, int> overlap;
    for (std::size_t i = 0; i < lab.size(); ++i) {
        const Label c = centers.centers.raster[i];
        if (c && lab[i]) ++overlap[{c, lab[i]}];
    }
    std::vector<char> has_center(n, 0);
    std::vector<double> amp(n, 0.0);
    {
        std::map<Label, std::pair<int, Label>> best;
        for (const auto& [key, cnt] : overlap) {
            auto& b = best[key.first];
            if (cnt > b.first) b = {cnt, key.second};
        }
        for (const auto& [c, b] : best) {
            has_center[b.second] = 1;
            amp[b.second] = std::max(amp[b.second], centers.amplitude.at(c));
        }
    }

    std::vector<std::set<Label>> adj(n);
    const int w = lab.width();
    const int h = lab.height();
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const Label a = lab(x, y);
            if (!a) continue;
            if (x + 1 < w) {
                const Label b = lab(x + 1, y);
                if (b && b != a) {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
            if (y + 1 < h) {
                const Label b = lab(x, y + 1);
                if (b && b != a) {
                    adj[a].insert(b);
                    adj[b].insert(a);
                }
            }
        }

    std::vector<Label> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<Label>(i);
    auto should_merge = [&](Label a, Label b) {
        if (!has_center[a] || !has_center[b]) return true;
        const double lo = std::min(amp[a], amp[b]);
        const double hi = std::max(amp[a], amp[b]);
        return hi <= 0.0 || lo / hi < params.amplitude_ratio_threshold;
    };
    std::set<std::pair<Label, Label>> candidates;
    for (Label a = 1; a <= maxl; ++a)
        for (Label b : adj[a])
            if (a < b && should_merge(a, b)) candidates.insert({a, b});

    int count = 0;
    while (!candidates.empty()) {
        const auto [a, b] = *candidates.begin();
        candidates.erase(candidates.begin());
        if (parent[a] != a || parent[b] != b || !adj[a].count(b) || !should_merge(a, b)) continue;
        parent[b] = a;
        ++count;
        adj[a].erase(b);
        for (Label c : adj[b]) {
            if (c == a) continue;
            adj[c].erase(b);
            adj[c].insert(a);
            adj[a].insert(c);
        }
        adj[b].clear();
        has_center[a] = has_center[a] || has_center[b];
        amp[a] = std::max(amp[a], amp[b]);
        for (Label c : adj[a]) {
            const Label lo = std::min(a, c);
            const Label hi = std::max(a, c);
            if (should_merge(lo, hi)) candidates.insert({lo, hi});
        }
    }
    if (merges) *merges = count;

    auto root = [&](Label v) {
        while (parent[v] != v) v = parent[v];
        return v;
    };
    LabelFrame out(w, h, fragments.frame_index);
    for (std::size_t i = 0; i < lab.size(); ++i) out.raster[i] = lab[i] ? root(lab[i]) : 0;
    return out;
}

LabelFrame segment_frame(const ProxyFrame& proxies, const SegmentationParams& params, int frame_index) {
    if (!proxies.edm.same_shape(proxies.gdcm)) throw DataError("segment_frame: EDM and GDCM differ in size");
    const RealRaster edm = raster_cast<double>(proxies.edm);
    LabelFrame fragments = segment_edm(edm, params);
    fragments.frame_index = frame_index;
    Raster2D<std::uint8_t> fg(edm.width(), edm.height(), 0);
    for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = edm[i] > params.edm_threshold ? 1 : 0;
    const double sigma = estimate_center_sigma(edm, params);
    const CenterSet centers = detect_centers(raster_cast<double>(proxies.gdcm), fg, params, sigma);
    LabelFrame merged = merge_fragments(fragments, centers, params);
    LabelFrame out = relabel_components(merged);
    out.frame_index = frame_index;
    return out;
}

}  // namespace celltrack
