#include <cmath>
#include <random>
#include <set>

#include "celltrack/segmenter.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace celltrack;

namespace {

LabelFrame disk(int w, int h, double cx, double cy, double r) {
    LabelFrame f(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (std::hypot(x - cx, y - cy) <= r) f.raster(x, y) = 1;
    return f;
}

// Two thick lobes joined by a thinner neck; the EDM has one maximum per lobe.
LabelFrame dumbbell() {
    LabelFrame f(40, 20, 0);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 40; ++x) {
            const bool lobe = std::hypot(x - 10, y - 10) <= 6.0 || std::hypot(x - 28, y - 10) <= 6.0;
            const bool neck = x >= 10 && x <= 28 && std::abs(y - 10) <= 3;
            if (lobe || neck) f.raster(x, y) = 1;
        }
    return f;
}

bool same_partition(const LabelFrame& a, const LabelFrame& b) {
    std::map<Label, Label> ab, ba;
    for (std::size_t i = 0; i < a.raster.size(); ++i) {
        const Label x = a.raster[i], y = b.raster[i];
        if ((x == 0) != (y == 0)) return false;
        if (!x) continue;
        if (ab.count(x) && ab[x] != y) return false;
        if (ba.count(y) && ba[y] != x) return false;
        ab[x] = y;
        ba[y] = x;
    }
    return true;
}

CenterSet centers_at(int w, int h, const std::vector<std::pair<Point, double>>& c) {
    CenterSet s;
    s.centers = LabelFrame(w, h, 0);
    s.amplitude.push_back(0.0);
    Label l = 0;
    for (const auto& [p, amp] : c) {
        s.centers.raster(p.x, p.y) = ++l;
        s.amplitude.push_back(amp);
    }
    return s;
}

}  // namespace

TEST_CASE("segment_edm") {
    SegmentationParams params;
    SUBCASE("disk is one region") {
        const auto f = disk(30, 30, 15, 14, 8);
        const auto s = segment_edm(compute_edm(f), params);
        CHECK(same_partition(s, f));
    }
    SUBCASE("two-maxima shape over-segments, full pipeline restores it") {
        const auto f = dumbbell();
        const auto p = make_proxy_frame(f);
        const auto frag = relabel_components(segment_edm(raster_cast<double>(p.edm), params));
        CHECK(frag.max_label() == 2);
        CHECK(same_partition(segment_frame(p, params), f));
    }
    SUBCASE("empty edm") {
        RealRaster e(10, 8, -1.0);
        CHECK(segment_edm(e, params).max_label() == 0);
    }
}

TEST_CASE("detect_centers") {
    SegmentationParams params;
    SUBCASE("clean cell has a single center containing the medoid") {
        LabelFrame f(40, 24, 0);
        for (int y = 8; y < 16; ++y)
            for (int x = 5; x < 35; ++x) f.raster(x, y) = 1;
        const auto p = make_proxy_frame(f);
        Raster2D<std::uint8_t> fg(40, 24, 0);
        for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = f.raster[i] != 0;
        const double sigma = estimate_center_sigma(raster_cast<double>(p.edm), params);
        const auto c = detect_centers(raster_cast<double>(p.gdcm), fg, params, sigma);
        CHECK(c.centers.max_label() == 1);
        const auto r = region_properties(f).at(0);
        CHECK(c.centers.raster(r.medoid.x, r.medoid.y) == 1);
        CHECK(c.amplitude.at(1) > 0.0);
    }
    SUBCASE("elongated minimum is rejected by the eccentricity filter") {
        LabelFrame f(60, 21, 0);
        RealRaster gdcm(60, 21, 0.0);
        Raster2D<std::uint8_t> fg(60, 21, 0);
        for (int y = 3; y < 18; ++y)
            for (int x = 3; x < 57; ++x) {
                fg(x, y) = 1;
                const double dx = x < 15 ? 15 - x : x > 45 ? x - 45 : 0;
                gdcm(x, y) = std::hypot(dx, y - 10);
            }
        params.expected_center_size = 1e9;  // disable the size filter
        params.center_size_min_fraction = 1e-12;
        auto max_ecc = [](const CenterSet& c) {
            double e = 0.0;
            for (const auto& r : region_properties(c.centers)) e = std::max(e, r.eccentricity);
            return e;
        };
        params.center_eccentricity_max = 1.0;
        const auto loose = detect_centers(gdcm, fg, params, 1.5);
        CHECK(max_ecc(loose) > 0.95);
        params.center_eccentricity_max = 0.9;
        const auto strict = detect_centers(gdcm, fg, params, 1.5);
        CHECK(strict.centers.max_label() < loose.centers.max_label());
        CHECK(max_ecc(strict) <= 0.9);
    }
    SUBCASE("oversized center is rejected by the size filter") {
        const auto f = disk(40, 40, 20, 20, 15);
        const auto p = make_proxy_frame(f);
        Raster2D<std::uint8_t> fg(40, 40, 0);
        for (std::size_t i = 0; i < fg.size(); ++i) fg[i] = f.raster[i] != 0;
        auto c = detect_centers(raster_cast<double>(p.gdcm), fg, params, 2.0);
        REQUIRE(c.centers.max_label() == 1);
        int area = 0;
        for (Label v : c.centers.raster.values()) area += v == 1;
        params.expected_center_size = area / 3.0;
        c = detect_centers(raster_cast<double>(p.gdcm), fg, params, 2.0);
        CHECK(c.centers.max_label() == 0);
    }
}

TEST_CASE("merge_fragments") {
    SegmentationParams params;
    LabelFrame frag(30, 5, 0);
    for (int y = 1; y < 4; ++y)
        for (int x = 1; x < 29; ++x) frag.raster(x, y) = x < 10 ? 1 : x < 20 ? 2 : 3;

    SUBCASE("fragment without center is absorbed") {
        LabelFrame two = frag;
        for (auto& v : two.raster.values()) v = v == 3 ? 0 : v;
        int merges = -1;
        const auto out = merge_fragments(two, centers_at(30, 5, {{{5, 2}, 1.0}}), params, &merges);
        CHECK(merges == 1);
        CHECK(out.raster(5, 2) == out.raster(15, 2));
    }
    SUBCASE("two strong centers stay apart") {
        LabelFrame two = frag;
        for (auto& v : two.raster.values()) v = v == 3 ? 0 : v;
        int merges = -1;
        const auto out = merge_fragments(two, centers_at(30, 5, {{{5, 2}, 1.0}, {{15, 2}, 0.9}}), params, &merges);
        CHECK(merges == 0);
        CHECK(out.raster(5, 2) != out.raster(15, 2));
    }
    SUBCASE("weak center is merged") {
        int merges = -1;
        merge_fragments(frag, centers_at(30, 5, {{{5, 2}, 1.0}, {{15, 2}, 0.3}, {{25, 2}, 1.0}}), params, &merges);
        CHECK(merges == 1);
    }
    SUBCASE("chain with a single middle center collapses") {
        int merges = -1;
        const auto out = merge_fragments(frag, centers_at(30, 5, {{{15, 2}, 1.0}}), params, &merges);
        CHECK(merges == 2);
        std::set<Label> labels;
        for (Label v : out.raster.values())
            if (v) labels.insert(v);
        CHECK(labels.size() == 1);
    }
    SUBCASE("foreground is preserved and merges grow with the threshold") {
        std::mt19937_64 rng(7);
        for (int it = 0; it < 20; ++it) {
            const auto f = oracle::random_scene(rng, 24, 24, 20);
            std::vector<std::pair<Point, double>> cs;
            std::uniform_real_distribution<double> amp(0.05, 1.0);
            for (const auto& r : region_properties(f))
                if (rng() % 4 != 0) cs.push_back({r.pixels[rng() % r.pixels.size()], amp(rng)});
            const auto centers = centers_at(24, 24, cs);
            int prev = -1;
            for (double thr : {0.05, 0.2, 0.4, 0.6, 0.8, 1.0}) {
                params.amplitude_ratio_threshold = thr;
                int merges = 0;
                const auto out = merge_fragments(f, centers, params, &merges);
                for (std::size_t i = 0; i < f.raster.size(); ++i) CHECK((out.raster[i] != 0) == (f.raster[i] != 0));
                CHECK(merges >= prev);
                prev = merges;
            }
        }
    }
}

TEST_CASE("segment_frame is deterministic and validates input") {
    SegmentationParams params;
    const auto p = make_proxy_frame(dumbbell());
    CHECK(segment_frame(p, params).raster == segment_frame(p, params).raster);
    ProxyFrame bad{FloatRaster(4, 4, 1.0f), FloatRaster(5, 4, 0.0f)};
    CHECK_THROWS_AS(segment_frame(bad, params), DataError);
    params.amplitude_ratio_threshold = 1.5;
    CHECK_THROWS_AS(params.validate(), DataError);
}
