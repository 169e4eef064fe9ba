#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "celltrack/raster.hpp"

namespace celltrack {

struct RealPoint {
    double x = 0.0;
    double y = 0.0;
};

/// Summary of one labeled instance. Pixels and contour are kept in raster-scan order.
struct CellRegion {
    Label label = 0;
    int frame_index = 0;
    std::vector<Point> pixels;
    int area = 0;
    Point medoid;
    RealPoint centroid;
    double major_axis_angle = 0.0;  ///< radians in [0, pi), measured in image coordinates
    double major_axis_length = 0.0;
    double eccentricity = 0.0;
    std::vector<Point> contour;
    bool touches_edge = false;
};

enum class MedoidMetric { euclidean, geodesic };

/// Splits every label into its 4-connected components and renumbers them 1..K
/// in order of first appearance during a raster scan.
LabelFrame relabel_components(const LabelFrame& frame);

/// Per-pixel distance to the nearest pixel that is background or belongs to a
/// different cell; -1 on background. Exact Euclidean distance between pixel centers.
RealRaster compute_edm(const LabelFrame& frame);

/// Shortest in-region path length from `source`, using 8-connected steps of
/// cost 1 (axial) and sqrt(2) (diagonal). Values are parallel to region.pixels.
/// Throws DataError when the source is not a region pixel.
std::vector<double> compute_geodesic_distance(const CellRegion& region, Point source);

/// Region pixel minimizing the summed distance to all other region pixels;
/// ties go to the smallest (y, x).
Point compute_medoid(const CellRegion& region, MedoidMetric metric = MedoidMetric::euclidean);
Point compute_medoid(const std::vector<Point>& pixels, MedoidMetric metric = MedoidMetric::euclidean);

/// Seeded priority-flood on `landscape` (highest values flood first, ties in
/// scan order), restricted to pixels with landscape > mask_threshold. 4-connected.
LabelFrame watershed(const RealRaster& landscape, const LabelFrame& seeds, double mask_threshold);

/// 8-connected plateaus strictly higher than every surrounding pixel,
/// restricted to landscape > mask_threshold. Labels are numbered in scan order.
LabelFrame regional_maxima(const RealRaster& landscape, double mask_threshold);

/// One CellRegion per nonzero label, ordered by label.
std::vector<CellRegion> region_properties(const LabelFrame& frame,
                                          MedoidMetric metric = MedoidMetric::euclidean);

/// Builds a region from an explicit pixel list (any order).
CellRegion make_region(std::vector<Point> pixels, Label label, int frame_index, int width, int height,
                       MedoidMetric metric = MedoidMetric::euclidean);

/// Minimum Euclidean distance between contour pixels of a and b.
double contour_distance(const CellRegion& a, const CellRegion& b);

/// Separable Gaussian smoothing with clamped borders.
RealRaster gaussian_blur(const RealRaster& in, double sigma);

/// 3x3 five-point discrete Laplacian with clamped borders.
RealRaster laplacian(const RealRaster& in);

}  // namespace celltrack
