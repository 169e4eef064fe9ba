#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "celltrack/grid.hpp"
#include "celltrack/proxy.hpp"
#include "celltrack/track_graph.hpp"

namespace celltrack {

struct MatchParams {
    double absolute_overlap = -1.0;  ///< C in px; negative means 0.5 x mean reference area
    int mitosis_frame_tolerance = 1;
    bool edge_exclusion = true;

    void validate() const;
};

/// Overlap relation between the reference and result cells of one frame.
struct FrameMatch {
    int frame = 0;
    std::map<Label, std::vector<Label>> ref_to_res;  ///< every reference cell, possibly with no match
    std::map<Label, std::vector<Label>> res_to_ref;  ///< every result cell, possibly with no match
    std::map<std::pair<Label, Label>, RealPoint> part_centroid;  ///< centroid of R n S for matched (R, S)
    std::map<Label, RealPoint> ref_centroid, res_centroid;
    std::set<Label> ref_edge, res_edge;  ///< cells touching the raster border
};

/// (R, S) match iff |R n S| > 0.5 min(|R|, |S|) or |R n S| > C.
FrameMatch match_cells(const LabelFrame& ref, const LabelFrame& res, double absolute_overlap);

struct SegmentationCounts {
    int false_positives = 0;
    int false_negatives = 0;
    int over = 0;
    int under = 0;
    int total() const { return false_positives + false_negatives + over + under; }
};

SegmentationCounts count_segmentation_errors(const FrameMatch& m, bool edge_exclusion);

/// A node of the transformed result graph for one frame pair.
struct PairNode {
    int side = 0;             ///< 0 = frame t, 1 = frame t+1
    Label ref = 0;            ///< matched reference cell, 0 for false positives
    std::vector<Label> res;   ///< result cells it was built from
    RealPoint centroid;
};

struct PairLink {
    int from = 0;  ///< node index on side 0
    int to = 0;    ///< node index on side 1
    bool automatic = false;  ///< added by a split; never a false positive
};

struct TransformedPair {
    std::vector<PairNode> nodes;
    std::vector<PairLink> links;
    /// Reference cells (side, label) of merged fragments left without a link
    /// toward the other frame while the reference cell is linked.
    std::vector<std::pair<int, Label>> unlinked_fragments;
};

/// Splits under-segmented cells at t+1 then t, merges over-segmented cells at t then t+1.
TransformedPair transform_pair(const FrameMatch& at, const FrameMatch& at1, const std::vector<Link>& result_links,
                               const std::vector<Link>& reference_links);

struct LinkErrors {
    std::vector<Link> false_positives;  ///< as reference label pairs
    std::vector<Link> false_negatives;
    std::vector<std::pair<int, Label>> extra_false_negatives;  ///< from unlinked merged fragments
    int count() const {
        return static_cast<int>(false_positives.size() + false_negatives.size() + extra_false_negatives.size());
    }
};

LinkErrors count_link_errors(const TransformedPair& tp, const FrameMatch& at, const FrameMatch& at1,
                             const std::vector<Link>& reference_links, bool edge_exclusion);

/// Optimal assignment of rows to columns minimizing total cost; result[r] is the
/// column of row r or -1 when there are more rows than columns.
std::vector<int> linear_assignment(const std::vector<std::vector<double>>& cost);

struct FrameCounts {
    int frame = 0;
    SegmentationCounts seg;
    int reference_cells = 0;
};

struct PairCounts {
    int frame_a = 0;
    int frame_b = 0;
    int false_positive_links = 0;
    int false_negative_links = 0;
    int reference_links = 0;
};

struct MetricsReport {
    int false_positive_cells = 0;
    int false_negative_cells = 0;
    int over_segmentations = 0;
    int under_segmentations = 0;
    int false_positive_links = 0;
    int false_negative_links = 0;
    int complete_lineages = 0;
    int total_lineages = 0;
    int reference_cells = 0;
    int reference_links = 0;
    double absolute_overlap = 0.0;
    bool edge_exclusion = true;
    std::vector<FrameCounts> frames;
    std::vector<PairCounts> pairs;

    int segmentation_errors() const {
        return false_positive_cells + false_negative_cells + over_segmentations + under_segmentations;
    }
    int link_errors() const { return false_positive_links + false_negative_links; }
    double segmentation_error_rate() const;
    double link_error_rate() const;
    double incomplete_lineage_rate() const;
};

/// Full evaluation of a result video against a reference video (same length and grid).
MetricsReport evaluate(const std::vector<LabelFrame>& ref_frames, const TrackGraph& ref_graph,
                       const std::vector<LabelFrame>& res_frames, const TrackGraph& res_graph,
                       const MatchParams& params, int threads = 1);

std::string format_report(const MetricsReport& r);
std::string format_report_csv(const MetricsReport& r);

}  // namespace celltrack
