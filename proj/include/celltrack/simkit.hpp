#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "celltrack/proxy.hpp"
#include "celltrack/track_graph.hpp"

namespace celltrack {

enum class CellShape { rod, blob };

const char* to_string(CellShape s);
CellShape parse_cell_shape(const std::string& s);

struct SimConfig {
    int width = 256;
    int height = 256;
    int n_frames = 200;
    int n_cells = 100;
    CellShape shape = CellShape::rod;
    double rod_length_mean = 16.0;  ///< px, tip to tip
    double rod_length_sd = 2.0;
    double rod_width = 7.0;
    double rod_max_length = 26.0;
    double blob_radius_mean = 7.0;
    double blob_radius_sd = 1.0;
    double blob_deformation = 0.12;  ///< amplitude of the boundary harmonics, relative to the radius
    double speed_mean = 1.0;         ///< px/frame
    double speed_sd = 0.3;
    double persistence = 0.9;        ///< 1 keeps the heading forever, 0 redraws it each frame
    double growth_rate = 0.2;        ///< px/frame of rod length or 0.1x that of blob radius
    double division_probability = 0.005;
    int division_min_age = 20;
    int edge_margin = 3;  ///< cells never come closer than this to the raster border
    std::uint64_t seed = 1;

    void validate() const;
};

struct CorruptionConfig {
    double proxy_noise_sigma = 0.0;           ///< additive noise on EDM and GDCM
    double under_seg_rate = 0.0;              ///< per cell and frame: fuse with a touching neighbour
    double over_seg_rate = 0.0;               ///< per cell and frame: cut across the major axis
    double displacement_jitter_sigma = 0.0;   ///< px, one offset per cell and pair
    double multiplicity_flip_rate = 0.0;      ///< per cell and direction
    double displacement_capture_radius = 0.0; ///< px; > 0 zeroes predicted displacements longer than this
    double contact_distance = 2.0;            ///< fusion partners must be this close

    void validate() const;
};

struct SimVideo {
    std::vector<LabelFrame> frames;
    TrackGraph graph;
};

/// Per-video proxies; pairs[i] covers (frames[i], frames[i+1]).
struct ProxyVideo {
    std::vector<ProxyFrame> frames;
    std::vector<ProxyPair> pairs;
};

enum class InjectedKind { under_segmentation, over_segmentation };

struct InjectedError {
    int frame = 0;
    InjectedKind kind = InjectedKind::over_segmentation;
    std::vector<Label> labels;  ///< ground-truth labels involved
};

/// Runs the cell simulation. Throws DataError when the initial cells cannot be placed.
SimVideo simulate(const SimConfig& config);

/// Ground-truth proxies of a labeled, linked video. `threads` workers build frames and pairs.
ProxyVideo make_proxy_video(const std::vector<LabelFrame>& frames, const TrackGraph& graph, int threads = 1,
                            MedoidMetric metric = MedoidMetric::euclidean);

/// Keeps every `factor`-th frame; links follow descent across skipped frames.
SimVideo subsample(const SimVideo& video, int factor);

/// Applies noise and injected segmentation errors to `proxies` in place.
/// Injection sites are chosen sequentially from `seed`; per-frame noise uses (seed, frame).
std::vector<InjectedError> corrupt_proxies(const SimVideo& truth, ProxyVideo& proxies, const CorruptionConfig& config,
                                           std::uint64_t seed, int threads = 1);

}  // namespace celltrack
