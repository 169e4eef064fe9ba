#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "celltrack/analysis.hpp"
#include "celltrack/simkit.hpp"

namespace celltrack {

/// Named float32 planes of one grid. On disk: "FPLN", u8 version 1, u32 width,
/// u32 height, u16 channel count, per channel a u16 byte length and UTF-8 name,
/// then every channel as row-major float32; all integers little-endian.
struct FloatPlaneFile {
    int width = 0;
    int height = 0;
    std::vector<std::string> names;
    std::vector<std::vector<float>> channels;

    void add(const std::string& name, const FloatRaster& plane);
    /// Channel by name as doubles; throws DataError when missing.
    FloatRaster plane(const std::string& name) const;
};

std::string encode_fpln(const FloatPlaneFile& f);
/// Throws DataError naming the byte offset of the first inconsistency.
FloatPlaneFile decode_fpln(const std::string& bytes);

/// Binary PGM (P5) with maxval 65535, big-endian samples. Labels above 65535 throw.
std::string encode_label_pgm(const LabelFrame& frame);
LabelFrame decode_label_pgm(const std::string& bytes, int frame_index = 0);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& bytes);

/// labels_00000.pgm, labels_00001.pgm, ... named by frame_index.
void write_label_frames(const std::string& dir, const std::vector<LabelFrame>& frames);
/// Every labels_*.pgm of the directory in index order; indices must be consecutive.
std::vector<LabelFrame> read_label_frames(const std::string& dir);

/// frame_00000.fpln (edm, gdcm) per frame and pair_00000_00001.fpln per pair,
/// pairs[i] joining first_frame + i and first_frame + i + 1.
void write_proxy_video(const std::string& dir, const ProxyVideo& video, int first_frame = 0);
ProxyVideo read_proxy_video(const std::string& dir, int* first_frame = nullptr);

FloatPlaneFile proxy_frame_planes(const ProxyFrame& f);
ProxyFrame proxy_frame_from_planes(const FloatPlaneFile& f);
FloatPlaneFile proxy_pair_planes(const ProxyPair& p);
ProxyPair proxy_pair_from_planes(const FloatPlaneFile& f);
std::string proxy_frame_filename(int frame);
std::string proxy_pair_filename(int a, int b);

inline constexpr const char* kTrackCsvHeader =
    "track_id,lineage_id,frame,label,x,y,area,axis_len,axis_angle,parent_track_id";

/// One row per sample ordered by track id then frame; parents joined by ';'.
std::string format_tracks_csv(const std::vector<Track>& tracks);
/// Throws DataError naming the CSV row (1-based, header is row 1).
std::vector<Track> parse_tracks_csv(const std::string& text);

/// Nodes from the label rasters, edges along each track and from every parent's
/// last sample to the child's first. Every CSV sample must exist in the rasters.
TrackGraph graph_from_tracks(const std::vector<Track>& tracks, const std::vector<LabelFrame>& frames);

}  // namespace celltrack
