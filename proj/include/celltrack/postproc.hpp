#pragma once

#include <string>
#include <vector>

#include "celltrack/grid.hpp"
#include "celltrack/proxy.hpp"
#include "celltrack/simkit.hpp"
#include "celltrack/track_graph.hpp"

namespace celltrack {

struct CorrectionParams {
    double contact_distance = 2.0;        ///< px between contours
    bool rod_mode = false;                ///< also require end-to-end alignment
    double alignment_angle_max = 0.35;    ///< radians
    double rod_axis_min_eccentricity = 0.9;  ///< rounder cells carry no usable axis
    int max_rounds = 20;

    void validate() const;
};

enum class StarKind { merge, split };

/// merge: spokes (frame t) -> hub (t+1); split: hub (t) -> spokes (t+1).
struct SuspectStar {
    StarKind kind = StarKind::merge;
    NodeKey hub;
    std::vector<NodeKey> spokes;
};

/// Merge and split stars whose multiplicities do not confirm a fusion or a
/// division, ordered by (earlier frame, hub label, kind).
std::vector<SuspectStar> find_suspect_links(const TrackGraph& graph);

enum class EditAction { merge, split };

struct Edit {
    EditAction action = EditAction::merge;
    int frame = 0;
    std::vector<Label> labels;  ///< merge: labels fused together; split: the object
    int parts = 1;              ///< split: number of fragments
    std::vector<std::vector<Point>> fragments;  ///< split: precomputed fragment pixels
    std::string reason;
};

struct EditScript {
    std::vector<Edit> edits;
    std::string error;  ///< non-empty when the star could not be resolved
    bool ok() const { return error.empty(); }
};

/// Labels, regions and links of a video under correction, with the proxies it was built from.
struct VideoState {
    std::vector<LabelFrame> frames;
    std::vector<std::vector<CellRegion>> regions;  ///< per frame, ordered by label
    TrackGraph graph;
    const ProxyVideo* proxies = nullptr;

    VideoState(std::vector<LabelFrame> frames, TrackGraph graph, const ProxyVideo& proxies, int threads = 1);
    int position(int frame_index) const;
    const CellRegion& region(const NodeKey& k) const;
};

EditScript resolve_merge_star(const SuspectStar& star, const VideoState& state, const CorrectionParams& params);
EditScript resolve_split_star(const SuspectStar& star, const VideoState& state, const CorrectionParams& params);

/// Splits `object` into `parts` fragments by a watershed on `edm` seeded with
/// the maxima of highest dynamics, or with eroded cores when there are too few.
/// Returns an empty vector on failure.
std::vector<std::vector<Point>> split_object(const CellRegion& object, const FloatRaster& edm, int parts);

/// True when the graph of pairwise contacts between the cells is connected.
bool in_contact(const std::vector<const CellRegion*>& cells, const CorrectionParams& params);

struct CorrectionEntry {
    int round = 0;
    int frame = 0;
    std::vector<Label> labels;  ///< labels before the edit
    std::string action;         ///< merge, split, unresolved or deferred
    std::string reason;
};

struct CorrectionReport {
    std::vector<CorrectionEntry> entries;
    int rounds = 0;
    int merges = 0;
    int splits = 0;
    int unresolved = 0;
};

/// Rewrites labels for the edits (frames relabeled in scan order) and re-tracks
/// every pair touching an edited frame. Edits touching a label already edited
/// in this batch are skipped and returned.
std::vector<Edit> apply_corrections(VideoState& state, const std::vector<Edit>& edits);

struct CorrectionResult {
    std::vector<LabelFrame> frames;
    TrackGraph graph;
    CorrectionReport report;
};

/// Repeats find / resolve / apply until no star yields an edit or max_rounds is reached.
CorrectionResult correct_video(std::vector<LabelFrame> frames, TrackGraph graph, const ProxyVideo& proxies,
                               const CorrectionParams& params, int threads = 1);

std::string format_correction_report(const CorrectionReport& report);

}  // namespace celltrack
