#pragma once

#include <string>

#include "celltrack/metrics.hpp"
#include "celltrack/postproc.hpp"
#include "celltrack/segmenter.hpp"
#include "celltrack/simkit.hpp"

namespace celltrack {

struct WindowConfig {
    int n_frames = 3;  ///< odd, >= 3
    int gap = 1;
};

struct AnalysisConfig {
    double px_size = 1.0;
    double dt = 1.0;
    int max_lag = 100;
    double speed_bin_size = 1.0;  ///< px
    bool weight_by_duration = true;
    double normalization_frames = 1000.0;
    int angle_bins = 9;
    double boundary_margin = 3.0;  ///< px
    int image_width = 0;           ///< 0 takes the simulation width
    int image_height = 0;
    int video_length = 0;          ///< 0 takes the last frame in the tracks + 1
};

/// Every tunable of the pipeline. Serialized as JSON; a missing key keeps its
/// default, an unknown key is an error.
struct PipelineConfig {
    SegmentationParams segmentation;
    CorrectionParams correction;
    MatchParams matching;
    WindowConfig window;
    SimConfig simulation;
    CorruptionConfig corruption;
    AnalysisConfig analysis;

    void validate() const;
};

PipelineConfig parse_config(const std::string& text);
/// Canonical text: two-space indented JSON with keys in declaration order.
std::string format_config(const PipelineConfig& config);
PipelineConfig load_config(const std::string& path);

}  // namespace celltrack
