#include <filesystem>

#include "celltrack/commands.hpp"
#include "celltrack/io.hpp"
#include "doctest.h"

using namespace celltrack;
namespace fs = std::filesystem;

namespace {

struct Workspace {
    fs::path root;
    explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / ("celltrack_test_cmd_" + name)) {
        fs::remove_all(root);
        fs::create_directories(root);
    }
    ~Workspace() { fs::remove_all(root); }
    std::string operator/(const std::string& p) const { return (root / p).string(); }
};

PipelineConfig small_config() {
    PipelineConfig c;
    c.simulation.width = 96;
    c.simulation.height = 80;
    c.simulation.n_cells = 12;
    c.simulation.n_frames = 30;
    c.simulation.division_probability = 0.03;
    c.simulation.division_min_age = 5;
    c.simulation.seed = 21;
    c.analysis.max_lag = 10;
    return c;
}

std::map<std::string, std::string> dir_contents(const std::string& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file()) out[e.path().filename().string()] = read_file(e.path().string());
    return out;
}

}  // namespace

TEST_CASE("simulate, then evaluate the reference against itself") {
    Workspace w("self");
    const auto cfg = small_config();
    RunOptions opt;
    run_simulate(cfg, w / "sim", opt);
    CHECK(fs::exists(w / "sim/labels/labels_00029.pgm"));
    CHECK(fs::exists(w / "sim/proxies/pair_00028_00029.fpln"));
    CHECK(read_file(w / "sim/injected.csv") == "frame,kind,labels\n");
    const auto rep = run_evaluate(w / "sim/labels", w / "sim/tracks.csv", w / "sim/labels", w / "sim/tracks.csv", cfg,
                                  w / "report.txt", opt);
    CHECK(rep.segmentation_errors() == 0);
    CHECK(rep.link_errors() == 0);
    CHECK(rep.complete_lineages == rep.total_lineages);
    CHECK(read_file(w / "report.txt").find("link_errors: 0") != std::string::npos);
    run_evaluate(w / "sim/labels", w / "sim/tracks.csv", w / "sim/labels", w / "sim/tracks.csv", cfg, w / "report.csv",
                 opt);
    CHECK(read_file(w / "report.csv").rfind("scope,", 0) == 0);
}

TEST_CASE("full chain on clean proxies reproduces the reference") {
    Workspace w("chain");
    const auto cfg = small_config();
    RunOptions opt;
    run_simulate(cfg, w / "sim", opt);
    run_segment(w / "sim/proxies", cfg, w / "seg", opt);
    run_track(w / "seg", w / "sim/proxies", cfg, w / "tracks.csv", opt);
    run_correct(w / "seg", w / "tracks.csv", w / "sim/proxies", cfg, w / "cor", opt);
    CHECK(read_file(w / "cor/corrections.csv").find("merges=0 splits=0 unresolved=0") != std::string::npos);
    const auto rep = run_evaluate(w / "sim/labels", w / "sim/tracks.csv", w / "cor", w / "cor/tracks.csv", cfg,
                                  w / "report.txt", opt);
    CHECK(rep.segmentation_errors() == 0);
    CHECK(rep.link_errors() == 0);
    CHECK(rep.complete_lineages == rep.total_lineages);

    run_analyze(w / "cor/tracks.csv", cfg, w / "ana", opt);
    for (const char* f : {"msd.csv", "speed_length.csv", "angles.csv", "track_statistics.csv"})
        CHECK(fs::exists(w / (std::string("ana/") + f)));
    const std::string stats = read_file(w / "ana/track_statistics.csv");
    CHECK(stats.substr(stats.rfind(',') + 1) == "0\n");
}

TEST_CASE("gen-targets reproduces the simulator's clean proxies") {
    Workspace w("gen");
    const auto cfg = small_config();
    RunOptions opt;
    run_simulate(cfg, w / "sim", opt);
    run_gen_targets(w / "sim/labels", w / "sim/tracks.csv", 3, 1, w / "t3", opt);
    CHECK(dir_contents(w / "t3") == dir_contents(w / "sim/proxies"));

    run_gen_targets(w / "sim/labels", w / "sim/tracks.csv", 5, 2, w / "t5", opt);
    const auto files = dir_contents(w / "t5");
    CHECK(files.count(proxy_pair_filename(10, 13)));  // (t, t + gap + 1) for t = 10
    CHECK(files.count(proxy_pair_filename(7, 10)));
    CHECK(files.size() > dir_contents(w / "t3").size());
    CHECK_THROWS_AS(run_gen_targets(w / "sim/labels", w / "sim/tracks.csv", 4, 1, w / "bad", opt), DataError);
}

TEST_CASE("outputs do not depend on the thread count") {
    Workspace w("threads");
    auto cfg = small_config();
    cfg.corruption.under_seg_rate = 0.01;
    cfg.corruption.over_seg_rate = 0.01;
    cfg.corruption.proxy_noise_sigma = 0.05;
    RunOptions one, four;
    four.threads = 4;
    run_simulate(cfg, w / "s1", one);
    run_simulate(cfg, w / "s4", four);
    CHECK(dir_contents(w / "s1/proxies") == dir_contents(w / "s4/proxies"));
    CHECK(read_file(w / "s1/injected.csv") == read_file(w / "s4/injected.csv"));
    CHECK(read_file(w / "s1/injected.csv") != "frame,kind,labels\n");
    run_segment(w / "s1/proxies", cfg, w / "g1", one);
    run_segment(w / "s1/proxies", cfg, w / "g4", four);
    CHECK(dir_contents(w / "g1") == dir_contents(w / "g4"));
    run_track(w / "g1", w / "s1/proxies", cfg, w / "t.csv", one);
    run_correct(w / "g1", w / "t.csv", w / "s1/proxies", cfg, w / "c1", one);
    run_correct(w / "g1", w / "t.csv", w / "s1/proxies", cfg, w / "c4", four);
    CHECK(dir_contents(w / "c1") == dir_contents(w / "c4"));
}

TEST_CASE("data errors") {
    Workspace w("errors");
    auto cfg = small_config();
    RunOptions opt;
    run_simulate(cfg, w / "a", opt);
    cfg.simulation.width = 64;
    run_simulate(cfg, w / "b", opt);
    CHECK_THROWS_WITH_AS(run_evaluate(w / "a/labels", w / "a/tracks.csv", w / "b/labels", w / "b/tracks.csv", cfg,
                                      w / "r.txt", opt),
                         doctest::Contains("grid"), DataError);
    CHECK_THROWS_WITH_AS(run_track(w / "a/labels", w / "b/proxies", cfg, w / "t.csv", opt),
                         doctest::Contains("grid sizes differ"), DataError);

    write_file(w / "a/labels/labels_00004.pgm", "P5\n96 80\n65535\n\x01\x02");
    CHECK_THROWS_WITH_AS(read_label_frames(w / "a/labels"), doctest::Contains("byte offset"), DataError);
    write_file(w / "bad.csv", std::string(kTrackCsvHeader) + "\n1,0,0,1,1,1,1,1,0,\n1,0,1,1,1,one,1,1,0,\n");
    CHECK_THROWS_WITH_AS(run_analyze(w / "bad.csv", cfg, w / "ana", opt), doctest::Contains("row 3"), DataError);
}
