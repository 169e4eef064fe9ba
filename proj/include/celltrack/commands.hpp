#pragma once

#include <iosfwd>
#include <string>

#include "celltrack/config.hpp"
#include "celltrack/metrics.hpp"

namespace celltrack {

struct RunOptions {
    int threads = 1;
    std::ostream* log = nullptr;  ///< progress lines when set
};

/// out_dir/labels, out_dir/proxies (corrupted as configured, seeded by the
/// simulation seed), out_dir/tracks.csv (reference), out_dir/injected.csv.
void run_simulate(const PipelineConfig& config, const std::string& out_dir, const RunOptions& opt);

/// Frame proxies for every frame and pair proxies for every pair of every
/// window (n_frames, gap) centered on a video frame.
void run_gen_targets(const std::string& labels_dir, const std::string& links_csv, int n_frames, int gap,
                     const std::string& out_dir, const RunOptions& opt);

/// labels_*.pgm in out_dir from the frame proxies.
void run_segment(const std::string& proxies_dir, const PipelineConfig& config, const std::string& out_dir,
                 const RunOptions& opt);

void run_track(const std::string& labels_dir, const std::string& proxies_dir, const PipelineConfig& config,
               const std::string& out_csv, const RunOptions& opt);

/// Corrected labels_*.pgm, tracks.csv and corrections.csv in out_dir.
void run_correct(const std::string& labels_dir, const std::string& track_csv, const std::string& proxies_dir,
                 const PipelineConfig& config, const std::string& out_dir, const RunOptions& opt);

/// Writes the report to `out` (CSV when the name ends in .csv, else key: value lines).
MetricsReport run_evaluate(const std::string& ref_labels, const std::string& ref_csv, const std::string& res_labels,
                           const std::string& res_csv, const PipelineConfig& config, const std::string& out,
                           const RunOptions& opt);

/// msd.csv, speed_length.csv, angles.csv and track_statistics.csv in out_dir.
void run_analyze(const std::string& track_csv, const PipelineConfig& config, const std::string& out_dir,
                 const RunOptions& opt);

}  // namespace celltrack
