#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "celltrack/commands.hpp"
#include "celltrack/parallel.hpp"

using namespace celltrack;

int main(int argc, char** argv) {
    CLI::App app{"celltrack: segmentation, tracking and correction of cell videos from distance-map proxies"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand
    app.set_help_all_flag("--help-all", "Show help for all subcommands");

    std::string config_path;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    app.add_option("--config", config_path, "Pipeline configuration (JSON); defaults apply without it")
        ->check(CLI::ExistingFile);
    app.add_option("--threads", threads, "Worker threads (default: CELLTRACK_THREADS or all cores)")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", seed, "Override simulation.seed");
    app.add_flag("--verbose", verbose, "Progress on stderr");

    std::string a, b, c, d, out;
    int n_frames = 3, gap = 1;

    auto* sim = app.add_subcommand("simulate", "Simulated video: labels, proxies and reference tracks");
    sim->add_option("out_dir", out)->required();

    auto* gen = app.add_subcommand("gen-targets", "Proxies from a labeled, linked video");
    gen->add_option("labels_dir", a)->required()->check(CLI::ExistingDirectory);
    gen->add_option("links_csv", b)->required()->check(CLI::ExistingFile);
    gen->add_option("out_dir", out)->required();
    gen->add_option("-n,--frames", n_frames, "Window size N (odd)");
    gen->add_option("-g,--gap", gap, "Window gap");

    auto* seg = app.add_subcommand("segment", "Label rasters from frame proxies");
    seg->add_option("proxies_dir", a)->required()->check(CLI::ExistingDirectory);
    seg->add_option("out_dir", out)->required();

    auto* trk = app.add_subcommand("track", "Track CSV from labels and pair proxies");
    trk->add_option("labels_dir", a)->required()->check(CLI::ExistingDirectory);
    trk->add_option("proxies_dir", b)->required()->check(CLI::ExistingDirectory);
    trk->add_option("out_csv", out)->required();

    auto* cor = app.add_subcommand("correct", "Resolve suspect merge and split links over the whole video");
    cor->add_option("labels_dir", a)->required()->check(CLI::ExistingDirectory);
    cor->add_option("track_csv", b)->required()->check(CLI::ExistingFile);
    cor->add_option("proxies_dir", c)->required()->check(CLI::ExistingDirectory);
    cor->add_option("out_dir", out)->required();

    auto* eva = app.add_subcommand("evaluate", "Segmentation and link errors against a reference");
    eva->add_option("ref_labels", a)->required()->check(CLI::ExistingDirectory);
    eva->add_option("ref_csv", b)->required()->check(CLI::ExistingFile);
    eva->add_option("res_labels", c)->required()->check(CLI::ExistingDirectory);
    eva->add_option("res_csv", d)->required()->check(CLI::ExistingFile);
    eva->add_option("out", out, "Report file; .csv selects per-frame CSV")->required();

    auto* ana = app.add_subcommand("analyze", "MSD, speed vs length, velocity angles and track statistics");
    ana->add_option("track_csv", a)->required()->check(CLI::ExistingFile);
    ana->add_option("out_dir", out)->required();

    auto* cfg = app.add_subcommand("config", "Print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        PipelineConfig config = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (seed) config.simulation.seed = *seed;
        config.validate();
        RunOptions opt;
        opt.threads = resolve_threads(threads);
        if (verbose) opt.log = &std::cerr;

        if (*sim) run_simulate(config, out, opt);
        else if (*gen) run_gen_targets(a, b, n_frames, gap, out, opt);
        else if (*seg) run_segment(a, config, out, opt);
        else if (*trk) run_track(a, b, config, out, opt);
        else if (*cor) run_correct(a, b, c, config, out, opt);
        else if (*eva) run_evaluate(a, b, c, d, config, out, opt);
        else if (*ana) run_analyze(a, config, out, opt);
        else if (*cfg) std::cout << format_config(config);
    } catch (const std::exception& e) {  // DataError, filesystem and allocation failures
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
