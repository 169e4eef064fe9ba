#include <cmath>
#include <numbers>
#include <random>

#include "celltrack/analysis.hpp"
#include "celltrack/simkit.hpp"
#include "doctest.h"

using namespace celltrack;

namespace {

Track line_track(int id, int frames, double x0, double y0, double vx, double vy, double axis_angle = 0.0,
                 double length = 10.0, int first = 0) {
    Track t;
    t.id = id;
    for (int f = 0; f < frames; ++f)
        t.samples.push_back({first + f, 1, x0 + vx * f, y0 + vy * f, 50.0, length, axis_angle});
    return t;
}

Track random_walk(int id, int steps, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> step(0.0, sigma);
    Track t;
    t.id = id;
    double x = 0, y = 0;
    for (int f = 0; f <= steps; ++f) {
        t.samples.push_back({f, 1, x, y, 1.0, 1.0, 0.0});
        x += step(rng);
        y += step(rng);
    }
    return t;
}

// Direct average over every sample pair exactly `lag` frames apart.
double brute_msd(const std::vector<Track>& tracks, int lag) {
    double s = 0;
    long long n = 0;
    for (const auto& t : tracks)
        for (const auto& a : t.samples)
            for (const auto& b : t.samples)
                if (b.frame - a.frame == lag) {
                    s += (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
                    ++n;
                }
    return n ? s / n : -1.0;
}

}  // namespace

TEST_CASE("msd of simple motions") {
    SUBCASE("static track") {
        const auto c = msd({line_track(1, 20, 5, 5, 0, 0)}, 10);
        REQUIRE(c.msd.size() == 10);
        for (double v : c.msd) CHECK(v == 0.0);
    }
    SUBCASE("ballistic") {
        const auto c = msd({line_track(1, 200, 0, 0, 3, 4)}, 100, 0.5, 2.0);
        for (std::size_t i = 0; i < c.lag.size(); ++i) {
            const double tau = c.lag_time[i];
            CHECK(c.msd[i] == doctest::Approx(0.25 * 25.0 * c.lag[i] * c.lag[i]));
            CHECK(tau == 2.0 * c.lag[i]);
        }
        CHECK(loglog_slope(c, 1, 100) == doctest::Approx(2.0).epsilon(1e-9));
    }
    SUBCASE("random walk") {
        // Gaussian steps of sd sigma on each axis: E|r(t+lag) - r(t)|^2 = 2 sigma^2 lag.
        std::mt19937_64 rng(7);
        std::vector<Track> walks;
        for (int i = 0; i < 10; ++i) walks.push_back(random_walk(i + 1, 10000, 1.5, rng));
        const auto c = msd(walks, 20);
        for (std::size_t i = 0; i < c.lag.size(); ++i)
            CHECK(c.msd[i] == doctest::Approx(2.0 * 1.5 * 1.5 * c.lag[i]).epsilon(0.05));
    }
}

TEST_CASE("msd matches a direct average, also across gaps") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-5, 5);
    std::vector<Track> tracks;
    for (int id = 1; id <= 6; ++id) {
        Track t;
        t.id = id;
        int f = id;
        for (int i = 0; i < 30; ++i) {
            t.samples.push_back({f, 1, u(rng), u(rng), 1, 1, 0});
            f += (i % 7 == 3) ? 3 : 1;
        }
        tracks.push_back(t);
    }
    const auto c = msd(tracks, 15);
    REQUIRE(!c.lag.empty());
    for (std::size_t i = 0; i < c.lag.size(); ++i) CHECK(c.msd[i] == doctest::Approx(brute_msd(tracks, c.lag[i])));

    SUBCASE("translation and id relabeling leave it unchanged") {
        auto moved = tracks;
        for (auto& t : moved) {
            t.id += 100;
            for (auto& s : t.samples) {
                s.x += 1234.5;
                s.y -= 77.25;
            }
        }
        std::reverse(moved.begin(), moved.end());
        const auto d = msd(moved, 15);
        REQUIRE(d.lag == c.lag);
        for (std::size_t i = 0; i < c.lag.size(); ++i) CHECK(d.msd[i] == doctest::Approx(c.msd[i]).epsilon(1e-9));
    }
}

TEST_CASE("msd truncation and errors") {
    const auto c = msd({line_track(1, 10, 0, 0, 1, 0)}, 50);
    CHECK(c.lag.back() == 9);
    CHECK(!c.warning.empty());
    CHECK(msd({line_track(1, 10, 0, 0, 1, 0)}, 5).warning.empty());
    CHECK_THROWS_AS(msd(std::vector<Track>{}, 5), DataError);
    Track bad = line_track(1, 3, 0, 0, 1, 0);
    bad.samples[2].frame = 1;
    CHECK_THROWS_AS(msd({bad}, 2), DataError);
}

TEST_CASE("log spaced lags") {
    const auto l = log_spaced_lags(1000, 10);
    CHECK(l.front() == 1);
    CHECK(l.back() == 1000);
    CHECK(std::is_sorted(l.begin(), l.end()));
    CHECK(std::adjacent_find(l.begin(), l.end()) == l.end());
    CHECK(l.size() > 20);
}

TEST_CASE("speed by length") {
    SpeedLengthParams p;
    SUBCASE("identical cells give one bin with zero error") {
        std::vector<Track> ts;
        for (int i = 0; i < 5; ++i) ts.push_back(line_track(i + 1, 40 + i, 10 * i, 0, 0.6, 0.8, 0, 12.3));
        const auto bins = speed_by_length(ts, p);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].mean_speed == doctest::Approx(1.0));
        CHECK(bins[0].sem == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(bins[0].length_min == 12.0);
        CHECK(bins[0].tracks == 5);
    }
    SUBCASE("short fast and long slow cells give a decreasing curve, empty bins omitted") {
        std::vector<Track> ts;
        for (int i = 0; i < 4; ++i) ts.push_back(line_track(i + 1, 100, 0, 0, 2.0, 0, 0, 6.5));
        for (int i = 0; i < 4; ++i) ts.push_back(line_track(i + 5, 100, 0, 0, 0.5, 0, 0, 15.5));
        const auto bins = speed_by_length(ts, p);
        REQUIRE(bins.size() == 2);
        CHECK(bins[0].length_min == 6.0);
        CHECK(bins[1].length_min == 15.0);
        CHECK(bins[0].mean_speed > bins[1].mean_speed);
    }
    SUBCASE("duration weighting and normalized counts") {
        // Two tracks in one bin: speed 1 for 10 frames, speed 4 for 30 frames.
        std::vector<Track> ts{line_track(1, 10, 0, 0, 1, 0, 0, 8.2), line_track(2, 30, 0, 0, 4, 0, 0, 8.7)};
        auto bins = speed_by_length(ts, p);
        REQUIRE(bins.size() == 1);
        CHECK(bins[0].mean_speed == doctest::Approx((10 * 1.0 + 30 * 4.0) / 40.0));
        CHECK(bins[0].count == doctest::Approx(40.0 / 1000.0));
        // Effective n = 40^2 / (100 + 900) = 1.6; weighted variance 1.6875.
        CHECK(bins[0].sem == doctest::Approx(std::sqrt(1.6875 * 1.6 / 0.6 / 1.6)));
        p.weight_by_duration = false;
        bins = speed_by_length(ts, p);
        CHECK(bins[0].mean_speed == doctest::Approx(2.5));
        CHECK(bins[0].sem == doctest::Approx(1.5));
    }
    SUBCASE("total count is summed duration over the normalization") {
        std::mt19937_64 rng(11);
        std::uniform_int_distribution<int> len(2, 300);
        std::uniform_real_distribution<double> u(3, 30);
        std::vector<Track> ts;
        double total = 0;
        for (int i = 0; i < 200; ++i) {
            ts.push_back(line_track(i + 1, len(rng), 0, 0, u(rng) / 10, 0, 0, u(rng)));
            total += ts.back().duration();
        }
        p.normalization_frames = 250.0;
        double sum = 0;
        int n = 0;
        for (const auto& b : speed_by_length(ts, p)) {
            sum += b.count;
            n += b.tracks;
        }
        CHECK(sum == doctest::Approx(total / 250.0).epsilon(1e-12));
        CHECK(n == 200);
    }
    SUBCASE("validation") {
        p.bin_size = 0;
        CHECK_THROWS_AS(speed_by_length({}, p), DataError);
    }
}

TEST_CASE("velocity to axis angles") {
    AngleParams p;
    SUBCASE("motion along the axis") {
        const double a = 0.7;
        const auto h = velocity_axis_angles({line_track(1, 50, 0, 0, std::cos(a), std::sin(a), a)}, p);
        CHECK(h.counts[0] == 50);
        CHECK(h.samples == 50);
        CHECK(h.mean_speed[0] == doctest::Approx(1.0));
    }
    SUBCASE("backward motion along the axis folds to zero") {
        const auto h = velocity_axis_angles({line_track(1, 50, 0, 0, -2, 0, 0.0)}, p);
        CHECK(h.counts[0] == 50);
    }
    SUBCASE("perpendicular motion") {
        const auto h = velocity_axis_angles({line_track(1, 50, 0, 0, 0, 1, 0.0)}, p);
        CHECK(h.counts.back() == 50);
    }
    SUBCASE("zero velocity samples are skipped") {
        Track t = line_track(1, 5, 0, 0, 0, 0);
        const auto h = velocity_axis_angles({t}, p);
        CHECK(h.samples == 0);
        CHECK(h.skipped == 5);
    }
    SUBCASE("central difference inside the track, one-sided at the ends") {
        Track t;
        t.id = 1;
        // Velocities (1, 0), (0.5, 0.5) and (0, 1) against axis 0.
        t.samples = {{0, 1, 0, 0, 1, 1, 0}, {1, 1, 1, 0, 1, 1, 0}, {2, 1, 1, 1, 1, 1, 0}};
        const auto h = velocity_axis_angles({t}, p);
        CHECK(h.counts[0] == 1);   // first: (1, 0)
        CHECK(h.counts[4] == 1);   // middle: (0.5, 0.5) -> 45 degrees
        CHECK(h.counts[8] == 1);   // last: (0, 1)
    }
    SUBCASE("isotropic motion gives a flat histogram") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> ang(0, 2 * std::numbers::pi);
        std::vector<Track> ts;
        for (int i = 0; i < 400; ++i) {
            Track t;
            t.id = i + 1;
            double x = 0, y = 0;
            for (int f = 0; f < 51; ++f) {
                // Random axis each frame; velocity measured as one-step displacement.
                t.samples.push_back({f, 1, x, y, 1, 1, std::fmod(ang(rng), std::numbers::pi)});
                const double h = ang(rng);
                x += std::cos(h);
                y += std::sin(h);
            }
            ts.push_back(t);
        }
        const auto h = velocity_axis_angles(ts, p);
        long long total = 0;
        for (auto c : h.counts) total += c;
        CHECK(total == h.samples);
        const double e = static_cast<double>(h.samples) / p.bins;
        const double sd = std::sqrt(h.samples * (1.0 / p.bins) * (1.0 - 1.0 / p.bins));
        for (auto c : h.counts) CHECK(std::abs(c - e) < 3 * sd);
    }
}

TEST_CASE("track statistics") {
    const int T = 100, W = 200, H = 150;
    SUBCASE("all tracks full length") {
        std::vector<Track> ts{line_track(1, T, 50, 50, 0.1, 0), line_track(2, T, 100, 60, 0, 0.1)};
        const auto s = track_statistics(ts, T, W, H, 5);
        CHECK(s.complete == 2);
        CHECK(s.incomplete == 0);
        CHECK(s.suspicious_ends == 0);
    }
    SUBCASE("track ending mid-video at the center") {
        const auto s = track_statistics({line_track(1, 40, 100, 75, 0, 0)}, T, W, H, 5);
        CHECK(s.suspicious_ends == 1);
        CHECK(s.incomplete == 1);
    }
    SUBCASE("track ending one frame early near the border") {
        const auto s = track_statistics({line_track(1, T - 1, 3, 75, 0, 0)}, T, W, H, 5);
        CHECK(s.suspicious_ends == 0);
        CHECK(s.ends_near_edge == 1);
        CHECK(track_statistics({line_track(1, T - 1, W - 4, 75, 0, 0)}, T, W, H, 5).ends_near_edge == 1);
        CHECK(track_statistics({line_track(1, T - 1, W - 7, 75, 0, 0)}, T, W, H, 5).suspicious_ends == 1);
    }
    SUBCASE("a division end is not suspicious") {
        Track mother = line_track(1, 40, 100, 75, 0, 0);
        Track d1 = line_track(2, 60, 95, 75, 0, 0, 0, 10, 40);
        Track d2 = line_track(3, 60, 105, 75, 0, 0, 0, 10, 40);
        d1.parents = d2.parents = {1};
        const auto s = track_statistics({mother, d1, d2}, T, W, H, 5);
        CHECK(s.ends_with_children == 1);
        CHECK(s.ends_at_last_frame == 2);
        CHECK(s.suspicious_ends == 0);
    }
}

TEST_CASE("tracks from a graph") {
    TrackGraph g;
    auto node = [&](int f, Label l, double x) {
        TrackNode n;
        n.key = {f, l};
        n.region.area = 10;
        n.region.centroid = {x, 5.0};
        g.add_node(n);
    };
    // 1 -> 1 -> {1, 2} -> ..., plus an isolated cell at frame 1.
    for (int f = 0; f < 4; ++f) node(f, 1, f);
    for (int f = 2; f < 4; ++f) node(f, 2, 20 + f);
    node(1, 3, 50);
    g.add_edge({0, 1}, {1, 1});
    g.add_edge({1, 1}, {2, 1});
    g.add_edge({1, 1}, {2, 2});
    g.add_edge({2, 1}, {3, 1});
    g.add_edge({2, 2}, {3, 2});
    const auto ts = tracks_from_graph(g);
    REQUIRE(ts.size() == 4);
    CHECK(ts[0].samples.size() == 2);
    CHECK(ts[0].parents.empty());
    CHECK(ts[1].samples.front().label == 3);
    CHECK(ts[2].parents == std::vector<int>{1});
    CHECK(ts[3].parents == std::vector<int>{1});
    CHECK(ts[2].lineage_id == ts[0].lineage_id);
    CHECK(ts[1].lineage_id != ts[0].lineage_id);
    CHECK(ts[2].samples.back().x == 3.0);
}

TEST_CASE("a clean simulated video has no suspicious track ends") {
    SimConfig cfg;
    cfg.n_frames = 120;
    cfg.n_cells = 60;
    cfg.seed = 4;
    const auto sim = simulate(cfg);
    const auto ts = tracks_from_graph(sim.graph);
    const auto s = track_statistics(ts, cfg.n_frames, cfg.width, cfg.height, 3);
    CHECK(s.suspicious_ends == 0);
    CHECK(s.tracks > cfg.n_cells);  // divisions happened
    std::size_t samples = 0;
    for (const auto& t : ts) samples += t.samples.size();
    CHECK(samples == sim.graph.node_count());
}
