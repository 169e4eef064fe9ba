#pragma once

#include <cstdint>
#include <vector>

#include "celltrack/grid.hpp"
#include "celltrack/proxy.hpp"

namespace celltrack {

struct SegmentationParams {
    double edm_threshold = 0.5;            ///< foreground cut on the EDM, px
    double center_sigma_fraction = 0.25;   ///< sigma as a fraction of object thickness
    double center_sigma_min = 1.0;
    double center_sigma_max = 3.0;
    double thickness_override = 0.0;       ///< > 0 replaces the 2 x mean-EDM thickness estimate
    double amplitude_ratio_threshold = 0.5;
    double expected_center_size = 0.0;     ///< px; 0 derives it from sigma
    double center_size_min_fraction = 0.5;
    double center_size_max_fraction = 2.0;
    double center_eccentricity_max = 0.9;

    void validate() const;
};

struct CenterSet {
    LabelFrame centers;              ///< surviving centers, labeled 1..K
    std::vector<double> amplitude;   ///< indexed by center label; [0] unused
    double sigma = 1.0;
    double expected_size = 0.0;
};

/// Seeded watershed of the EDM from its regional maxima. May over-segment.
LabelFrame segment_edm(const RealRaster& edm, const SegmentationParams& params);

/// Center scale: clamp(fraction x thickness, bounds), thickness = 2 x mean positive EDM.
double estimate_center_sigma(const RealRaster& edm, const SegmentationParams& params);

/// Area of the negative Laplacian-of-Gaussian core of an isolated ideal center at this scale.
double ideal_center_area(double sigma);

/// Gaussian transform of the GDCM followed by a watershed on the negated LoG
/// response; centers with aberrant size or eccentricity are discarded.
CenterSet detect_centers(const RealRaster& gdcm, const Raster2D<std::uint8_t>& foreground,
                         const SegmentationParams& params, double sigma);

/// Merges touching fragments until no pair lacks a center or has a low center
/// amplitude ratio. `merges` receives the number of merges performed.
LabelFrame merge_fragments(const LabelFrame& fragments, const CenterSet& centers, const SegmentationParams& params,
                           int* merges = nullptr);

/// Full per-frame instance extraction; output is relabeled to 1..K in scan order.
LabelFrame segment_frame(const ProxyFrame& proxies, const SegmentationParams& params, int frame_index = 0);

}  // namespace celltrack
