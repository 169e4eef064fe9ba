#include "celltrack/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <ostream>
#include <set>

#include "celltrack/io.hpp"
#include "celltrack/parallel.hpp"
#include "celltrack/tracker.hpp"

namespace celltrack {

namespace fs = std::filesystem;

namespace {

void note(const RunOptions& opt, const std::string& msg) {
    if (opt.log) *opt.log << msg << '\n';
}

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

int first_index(const std::vector<LabelFrame>& frames) { return frames.empty() ? 0 : frames.front().frame_index; }

// Labels and proxies must describe the same frames on the same grid.
void check_alignment(const std::vector<LabelFrame>& frames, const ProxyVideo& proxies, int proxy_first) {
    if (frames.size() != proxies.frames.size() || first_index(frames) != proxy_first)
        throw DataError("labels cover " + std::to_string(frames.size()) + " frames from " +
                        std::to_string(first_index(frames)) + ", proxies " + std::to_string(proxies.frames.size()) +
                        " from " + std::to_string(proxy_first));
    if (!frames.empty() && !frames.front().raster.same_shape(proxies.frames.front().edm))
        throw DataError("label and proxy grid sizes differ");
}

}  // namespace

void run_simulate(const PipelineConfig& config, const std::string& out_dir, const RunOptions& opt) {
    config.validate();
    const fs::path out(out_dir);
    const SimVideo sim = simulate(config.simulation);
    note(opt, "simulated " + std::to_string(sim.frames.size()) + " frames, " + std::to_string(sim.graph.node_count()) +
                  " cells");
    ProxyVideo proxies = make_proxy_video(sim.frames, sim.graph, opt.threads);
    const auto injected = corrupt_proxies(sim, proxies, config.corruption, config.simulation.seed, opt.threads);
    write_label_frames(join(out, "labels"), sim.frames);
    write_proxy_video(join(out, "proxies"), proxies, first_index(sim.frames));
    write_file(join(out, "tracks.csv"), format_tracks_csv(tracks_from_graph(sim.graph)));
    std::string inj = "frame,kind,labels\n";
    for (const auto& e : injected) {
        std::string labels;
        for (Label l : e.labels) labels += (labels.empty() ? "" : ";") + std::to_string(l);
        inj += std::to_string(e.frame) + "," +
               (e.kind == InjectedKind::under_segmentation ? "under_segmentation" : "over_segmentation") + "," +
               labels + "\n";
    }
    write_file(join(out, "injected.csv"), inj);
    note(opt, std::to_string(injected.size()) + " segmentation errors injected");
}

void run_gen_targets(const std::string& labels_dir, const std::string& links_csv, int n_frames, int gap,
                     const std::string& out_dir, const RunOptions& opt) {
    if (n_frames < 3 || n_frames % 2 == 0) throw DataError("window size must be odd and >= 3");
    if (gap < 1) throw DataError("window gap must be >= 1");
    const auto frames = read_label_frames(labels_dir);
    const TrackGraph graph = graph_from_tracks(parse_tracks_csv(read_file(links_csv)), frames);
    const int t0 = first_index(frames);
    const int n = static_cast<int>(frames.size());

    std::set<std::pair<int, int>> wanted;  // positions in `frames`
    for (int t = 0; t < n; ++t) {
        // A pair file holds both directions, so (t, w) and (w, t) share one.
        for (const auto& p : make_pairs(make_window(t, n_frames, gap, n)))
            if (p.a != p.b) wanted.insert({std::min(p.a, p.b), std::max(p.a, p.b)});
    }
    const std::vector<std::pair<int, int>> pairs(wanted.begin(), wanted.end());

    std::vector<std::vector<CellRegion>> regions(frames.size());
    std::vector<ProxyFrame> fp(frames.size());
    parallel_for(n, opt.threads, [&](int i) {
        regions[i] = region_properties(frames[i]);
        fp[i] = make_proxy_frame(frames[i], regions[i]);
    });
    std::vector<ProxyPair> pp(pairs.size());
    parallel_for(static_cast<int>(pairs.size()), opt.threads, [&](int i) {
        const auto [a, b] = pairs[i];
        const auto links = links_between(graph, frames[a].frame_index, frames[b].frame_index);
        pp[i] = make_proxy_pair(frames[a], regions[a], frames[b], regions[b], links);
    });

    const fs::path out(out_dir);
    fs::create_directories(out);
    for (int i = 0; i < n; ++i) write_file(join(out, proxy_frame_filename(t0 + i)), encode_fpln(proxy_frame_planes(fp[i])));
    for (std::size_t i = 0; i < pairs.size(); ++i)
        write_file(join(out, proxy_pair_filename(t0 + pairs[i].first, t0 + pairs[i].second)),
                   encode_fpln(proxy_pair_planes(pp[i])));
    note(opt, "wrote " + std::to_string(n) + " frame and " + std::to_string(pairs.size()) + " pair proxies");
}

void run_segment(const std::string& proxies_dir, const PipelineConfig& config, const std::string& out_dir,
                 const RunOptions& opt) {
    config.validate();
    int t0 = 0;
    const ProxyVideo proxies = read_proxy_video(proxies_dir, &t0);
    std::vector<LabelFrame> frames(proxies.frames.size());
    parallel_for(static_cast<int>(frames.size()), opt.threads, [&](int i) {
        frames[i] = segment_frame(proxies.frames[i], config.segmentation, t0 + i);
    });
    write_label_frames(out_dir, frames);
    note(opt, "segmented " + std::to_string(frames.size()) + " frames");
}

void run_track(const std::string& labels_dir, const std::string& proxies_dir, const PipelineConfig& config,
               const std::string& out_csv, const RunOptions& opt) {
    config.validate();
    const auto frames = read_label_frames(labels_dir);
    int t0 = 0;
    const ProxyVideo proxies = read_proxy_video(proxies_dir, &t0);
    check_alignment(frames, proxies, t0);
    const TrackGraph g = track_video(frames, proxies.pairs);
    const auto tracks = tracks_from_graph(g);
    write_file(out_csv, format_tracks_csv(tracks));
    note(opt, "tracked " + std::to_string(g.node_count()) + " cells into " + std::to_string(tracks.size()) + " tracks");
}

void run_correct(const std::string& labels_dir, const std::string& track_csv, const std::string& proxies_dir,
                 const PipelineConfig& config, const std::string& out_dir, const RunOptions& opt) {
    config.validate();
    auto frames = read_label_frames(labels_dir);
    int t0 = 0;
    const ProxyVideo proxies = read_proxy_video(proxies_dir, &t0);
    check_alignment(frames, proxies, t0);
    TrackGraph g = graph_from_tracks(parse_tracks_csv(read_file(track_csv)), frames);
    assign_multiplicities(g, frames, proxies.pairs);
    auto res = correct_video(std::move(frames), std::move(g), proxies, config.correction, opt.threads);
    const fs::path out(out_dir);
    write_label_frames(out_dir, res.frames);
    write_file(join(out, "tracks.csv"), format_tracks_csv(tracks_from_graph(res.graph)));
    write_file(join(out, "corrections.csv"), format_correction_report(res.report));
    note(opt, "corrections: " + std::to_string(res.report.merges) + " merges, " + std::to_string(res.report.splits) +
                  " splits, " + std::to_string(res.report.unresolved) + " unresolved in " +
                  std::to_string(res.report.rounds) + " rounds");
}

MetricsReport run_evaluate(const std::string& ref_labels, const std::string& ref_csv, const std::string& res_labels,
                           const std::string& res_csv, const PipelineConfig& config, const std::string& out,
                           const RunOptions& opt) {
    config.validate();
    const auto rf = read_label_frames(ref_labels);
    const auto sf = read_label_frames(res_labels);
    if (rf.front().width() != sf.front().width() || rf.front().height() != sf.front().height())
        throw DataError("reference grid " + std::to_string(rf.front().width()) + "x" +
                        std::to_string(rf.front().height()) + " differs from result grid " +
                        std::to_string(sf.front().width()) + "x" + std::to_string(sf.front().height()));
    const TrackGraph rg = graph_from_tracks(parse_tracks_csv(read_file(ref_csv)), rf);
    const TrackGraph sg = graph_from_tracks(parse_tracks_csv(read_file(res_csv)), sf);
    const MetricsReport rep = evaluate(rf, rg, sf, sg, config.matching, opt.threads);
    const bool csv = out.size() >= 4 && out.compare(out.size() - 4, 4, ".csv") == 0;
    write_file(out, csv ? format_report_csv(rep) : format_report(rep));
    note(opt, "segmentation errors " + std::to_string(rep.segmentation_errors()) + ", link errors " +
                  std::to_string(rep.link_errors()) + ", complete lineages " + std::to_string(rep.complete_lineages) +
                  "/" + std::to_string(rep.total_lineages));
    return rep;
}

void run_analyze(const std::string& track_csv, const PipelineConfig& config, const std::string& out_dir,
                 const RunOptions& opt) {
    config.validate();
    const auto tracks = parse_tracks_csv(read_file(track_csv));
    if (tracks.empty()) throw DataError(track_csv + ": no tracks");
    const auto& a = config.analysis;
    const fs::path out(out_dir);
    fs::create_directories(out);

    const MsdCurve curve = msd(tracks, a.max_lag, a.px_size, a.dt);
    if (!curve.warning.empty() && opt.log) *opt.log << "warning: " << curve.warning << '\n';
    write_file(join(out, "msd.csv"), format_msd_csv(curve));

    SpeedLengthParams sp;
    sp.bin_size = a.speed_bin_size;
    sp.weight_by_duration = a.weight_by_duration;
    sp.px_size = a.px_size;
    sp.dt = a.dt;
    sp.normalization_frames = a.normalization_frames;
    write_file(join(out, "speed_length.csv"), format_speed_csv(speed_by_length(tracks, sp)));

    AngleParams ap;
    ap.bins = a.angle_bins;
    ap.px_size = a.px_size;
    ap.dt = a.dt;
    write_file(join(out, "angles.csv"), format_angle_csv(velocity_axis_angles(tracks, ap)));

    int length = a.video_length;
    if (length == 0)
        for (const auto& t : tracks) length = std::max(length, t.last_frame() + 1);
    const int w = a.image_width ? a.image_width : config.simulation.width;
    const int h = a.image_height ? a.image_height : config.simulation.height;
    const auto stats = track_statistics(tracks, length, w, h, a.boundary_margin);
    write_file(join(out, "track_statistics.csv"), format_track_statistics_csv(stats));
    note(opt, std::to_string(stats.tracks) + " tracks, " + std::to_string(stats.suspicious_ends) +
                  " suspicious track ends");
}

}  // namespace celltrack
