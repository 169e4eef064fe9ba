#pragma once

#include <string>
#include <vector>

#include "celltrack/track_graph.hpp"

namespace celltrack {

struct TrackSample {
    int frame = 0;
    Label label = 0;
    double x = 0.0;
    double y = 0.0;
    double area = 0.0;
    double axis_length = 0.0;
    double axis_angle = 0.0;  ///< radians, image coordinates
};

struct Track {
    int id = 0;
    int lineage_id = 0;
    std::vector<int> parents;  ///< ids of the tracks linked into the first sample
    std::vector<TrackSample> samples;

    /// Throws DataError unless samples exist and frames strictly increase.
    void validate() const;
    int first_frame() const { return samples.front().frame; }
    int last_frame() const { return samples.back().frame; }
    int duration() const { return last_frame() - first_frame() + 1; }
};

/// Cuts the graph into unbranched chains. A chain ends where a node has a
/// number of successors other than one or its successor has several
/// predecessors. Ids start at 1 in (frame, label) order of the first node;
/// lineage ids are the weakly connected components.
std::vector<Track> tracks_from_graph(const TrackGraph& graph);

struct MsdCurve {
    std::vector<int> lag;            ///< frames
    std::vector<double> lag_time;    ///< lag * dt
    std::vector<double> msd;         ///< (px * px_size)^2
    std::vector<long long> samples;  ///< displacement pairs behind each point
    std::string warning;             ///< set when lags were truncated to the longest track
};

/// Mean over all tracks and overlapping time origins of |r(t+lag) - r(t)|^2,
/// every displacement weighted equally. Lags with no displacement are dropped.
MsdCurve msd(const std::vector<Track>& tracks, int max_lag, double px_size = 1.0, double dt = 1.0);
MsdCurve msd(const std::vector<Track>& tracks, const std::vector<int>& lags, double px_size = 1.0, double dt = 1.0);

/// About `per_decade` integer lags per decade in [1, max_lag], ascending and unique.
std::vector<int> log_spaced_lags(int max_lag, int per_decade);

/// Least-squares slope of log(msd) against log(lag) over points with lag in [lag_min, lag_max].
double loglog_slope(const MsdCurve& curve, int lag_min, int lag_max);

struct SpeedLengthParams {
    double bin_size = 1.0;  ///< px of cell length
    bool weight_by_duration = true;
    double px_size = 1.0;
    double dt = 1.0;
    double normalization_frames = 1000.0;  ///< a track this long counts as 1

    void validate() const;
};

struct SpeedLengthBin {
    double length_min = 0.0;  ///< px_size units
    double length_max = 0.0;
    double mean_speed = 0.0;  ///< px_size / dt units
    double sem = 0.0;
    double count = 0.0;       ///< summed duration / normalization_frames
    int tracks = 0;
};

/// Per-track mean speed binned by per-track mean axis length. Tracks with a
/// single sample carry no speed and are ignored; empty bins are omitted.
std::vector<SpeedLengthBin> speed_by_length(const std::vector<Track>& tracks, const SpeedLengthParams& params);

struct AngleParams {
    int bins = 9;  ///< over [0, 90] degrees
    double px_size = 1.0;
    double dt = 1.0;

    void validate() const;
};

struct AngleHistogram {
    std::vector<double> bin_lower;  ///< degrees
    std::vector<long long> counts;
    std::vector<double> mean_speed;  ///< 0 for empty bins
    std::vector<double> speed_sem;
    long long samples = 0;
    long long skipped = 0;  ///< zero-velocity samples
};

/// Acute angle between each sample's velocity (central difference, one-sided at
/// track ends) and its major axis.
AngleHistogram velocity_axis_angles(const std::vector<Track>& tracks, const AngleParams& params);

struct TrackStatistics {
    int tracks = 0;
    int complete = 0;  ///< present in every frame of the video
    int incomplete = 0;
    int ends_at_last_frame = 0;
    int ends_with_children = 0;  ///< division or fusion continues the cell
    int ends_near_edge = 0;
    int suspicious_ends = 0;
};

/// Classifies track ends. An end is suspicious when it is before the last
/// frame, no other track continues it and the final position is farther than
/// `margin` px from every border of a width x height image.
TrackStatistics track_statistics(const std::vector<Track>& tracks, int video_length, int width, int height,
                                 double margin);

std::string format_msd_csv(const MsdCurve& c);
std::string format_speed_csv(const std::vector<SpeedLengthBin>& bins);
std::string format_angle_csv(const AngleHistogram& h);
std::string format_track_statistics_csv(const TrackStatistics& s);

}  // namespace celltrack
