#include <algorithm>
#include <numeric>
#include <random>

#include "celltrack/metrics.hpp"
#include "celltrack/simkit.hpp"
#include "doctest.h"

using namespace celltrack;

namespace {

struct Box {
    Label label;
    int x0, y0, x1, y1;  // half-open
};

struct Video {
    std::vector<LabelFrame> frames;
    TrackGraph graph;

    void add_frame(const std::vector<Box>& boxes, int w = 60, int h = 40) {
        LabelFrame f(w, h, static_cast<int>(frames.size()));
        for (const Box& b : boxes)
            for (int y = b.y0; y < b.y1; ++y)
                for (int x = b.x0; x < b.x1; ++x) f.raster(x, y) = b.label;
        add_frame_nodes(graph, region_properties(f));
        frames.push_back(std::move(f));
    }
    void link(int t, Label a, Label b) { graph.add_edge({t, a}, {t + 1, b}); }
};

MetricsReport eval(const Video& ref, const Video& res, int tol = 1) {
    MatchParams p;
    p.mitosis_frame_tolerance = tol;
    return evaluate(ref.frames, ref.graph, res.frames, res.graph, p);
}

// Two cells side by side, then a third cell elsewhere.
Video three_cells() {
    Video v;
    for (int t = 0; t < 2; ++t) v.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
    for (Label l = 1; l <= 3; ++l) v.link(0, l, l);
    return v;
}

}  // namespace

TEST_CASE("match_cells criterion") {
    LabelFrame ref(20, 10), res(20, 10);
    for (int x = 2; x < 12; ++x) ref.raster(x, 4) = 1;  // 10 px
    SUBCASE("exactly half is not a match") {
        for (int x = 2; x < 7; ++x) res.raster(x, 4) = 1;
        for (int x = 12; x < 17; ++x) res.raster(x, 4) = 1;  // |S| = 10, overlap 5
        const auto m = match_cells(ref, res, 100.0);
        CHECK(m.ref_to_res.at(1).empty());
    }
    SUBCASE("more than half of the smaller cell") {
        for (int x = 2; x < 5; ++x) res.raster(x, 4) = 1;  // |S| = 3 inside R
        const auto m = match_cells(ref, res, 100.0);
        REQUIRE(m.ref_to_res.at(1).size() == 1);
    }
    SUBCASE("absolute overlap rescues a large under-segmented object") {
        for (int x = 7; x < 12; ++x) ref.raster(x, 4) = 0;
        for (int x = 2; x < 7; ++x) ref.raster(x, 5) = 1;  // R is 5x2
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 20; ++x) res.raster(x, y) = 1;  // overlap 5 of min 10
        CHECK(match_cells(ref, res, 100.0).ref_to_res.at(1).empty());
        CHECK(match_cells(ref, res, 5.0).ref_to_res.at(1).empty());
        CHECK(match_cells(ref, res, 4.0).ref_to_res.at(1).size() == 1);
    }
    SUBCASE("shape mismatch") { CHECK_THROWS_AS(match_cells(ref, LabelFrame(20, 11), 1.0), DataError); }
}

TEST_CASE("golden overlap scenarios") {
    const Video ref = three_cells();
    SUBCASE("one object for two reference cells") {
        Video res;
        res.add_frame({{1, 5, 5, 25, 12}, {2, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
        res.link(0, 1, 1);
        res.link(0, 1, 2);
        res.link(0, 2, 3);
        const auto r = eval(ref, res);
        CHECK(r.under_segmentations == 1);
        CHECK(r.false_positive_cells == 0);
        CHECK(r.false_negative_cells == 0);
        CHECK(r.over_segmentations == 0);
        CHECK(r.link_errors() == 0);
    }
    SUBCASE("two objects for one reference cell") {
        Video res;
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 42, 30}, {4, 42, 20, 50, 30}});
        res.link(0, 1, 1);
        res.link(0, 2, 2);
        res.link(0, 3, 3);
        res.link(0, 3, 4);
        const auto r = eval(ref, res);
        CHECK(r.over_segmentations == 1);
        CHECK(r.segmentation_errors() == 1);
        CHECK(r.link_errors() == 0);
    }
    SUBCASE("under and over segmentation in the same frame") {
        Video res;
        res.add_frame({{1, 5, 5, 25, 12}, {2, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 42, 30}, {4, 42, 20, 50, 30}});
        res.link(0, 1, 1);
        res.link(0, 1, 2);
        res.link(0, 2, 3);
        res.link(0, 2, 4);
        const auto r = eval(ref, res);
        CHECK(r.under_segmentations == 1);
        CHECK(r.over_segmentations == 1);
        CHECK(r.segmentation_errors() == 2);
        CHECK(r.link_errors() == 0);
    }
    SUBCASE("under-segmented object with a single link") {
        // The split copies the lone link to both parts, so the second cell at t+1 stays unlinked.
        Video res;
        res.add_frame({{1, 5, 5, 25, 12}, {2, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
        res.link(0, 1, 1);
        res.link(0, 2, 3);
        const auto r = eval(ref, res);
        CHECK(r.under_segmentations == 1);
        CHECK(r.false_positive_links == 0);
        CHECK(r.false_negative_links == 1);
    }
    SUBCASE("unlinked over-segmented fragment counts one missing link") {
        Video res;
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 42, 30}, {4, 42, 20, 50, 30}});
        res.link(0, 1, 1);
        res.link(0, 2, 2);
        res.link(0, 3, 3);
        const auto r = eval(ref, res);
        CHECK(r.over_segmentations == 1);
        CHECK(r.false_negative_links == 1);
        CHECK(r.false_positive_links == 0);
    }
}

TEST_CASE("link errors") {
    const Video ref = three_cells();
    SUBCASE("swapped identities give two false positives and two false negatives") {
        Video res = ref;
        res.graph.remove_edge({0, 1}, {1, 1});
        res.graph.remove_edge({0, 2}, {1, 2});
        res.link(0, 1, 2);
        res.link(0, 2, 1);
        const auto r = eval(ref, res);
        CHECK(r.false_positive_links == 2);
        CHECK(r.false_negative_links == 2);
        CHECK(r.segmentation_errors() == 0);
        CHECK(r.complete_lineages == 1);
        CHECK(r.total_lineages == 3);
    }
    SUBCASE("missing link") {
        Video res = ref;
        res.graph.remove_edge({0, 3}, {1, 3});
        const auto r = eval(ref, res);
        CHECK(r.false_negative_links == 1);
        CHECK(r.false_positive_links == 0);
        CHECK(r.complete_lineages == 2);
    }
    SUBCASE("links of a missing cell are not counted") {
        Video res;
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}, {3, 35, 20, 50, 30}});
        res.add_frame({{1, 5, 5, 15, 12}, {2, 15, 5, 25, 12}});
        res.link(0, 1, 1);
        res.link(0, 2, 2);
        const auto r = eval(ref, res);
        CHECK(r.false_negative_cells == 1);
        CHECK(r.link_errors() == 0);
        CHECK(r.complete_lineages == 2);
    }
    SUBCASE("links to a false positive cell are not counted") {
        Video res = ref;
        res.frames[1].raster(55, 2) = 9;
        res.graph.add_node({{1, 9}, {}, Multiplicity::one, Multiplicity::one});
        res.link(0, 3, 9);
        const auto r = eval(ref, res);
        CHECK(r.false_positive_cells == 1);
        CHECK(r.link_errors() == 0);
        CHECK(r.complete_lineages == 3);
    }
}

namespace {

// One cell dividing after frame `div` (mother at div, daughters at div+1).
Video division(int frames, int div) {
    Video v;
    for (int t = 0; t < frames; ++t) {
        if (t <= div)
            v.add_frame({{1, 10, 10, 30, 18}});
        else
            v.add_frame({{1, 10, 10, 19, 18}, {2, 21, 10, 30, 18}});
    }
    for (int t = 0; t + 1 < frames; ++t) {
        if (t < div) {
            v.link(t, 1, 1);
        } else if (t == div) {
            v.link(t, 1, 1);
            v.link(t, 1, 2);
        } else {
            v.link(t, 1, 1);
            v.link(t, 2, 2);
        }
    }
    return v;
}

}  // namespace

TEST_CASE("division tolerance") {
    const Video ref = division(6, 2);
    SUBCASE("exact") {
        const auto r = eval(ref, ref);
        CHECK(r.complete_lineages == 1);
        CHECK(r.total_lineages == 1);
    }
    SUBCASE("one frame late") {
        const Video res = division(6, 3);
        const auto r = eval(ref, res, 1);
        CHECK(r.under_segmentations == 1);
        CHECK(r.complete_lineages == 1);
        CHECK(eval(ref, res, 0).complete_lineages == 0);
    }
    SUBCASE("one frame early") {
        const Video res = division(6, 1);
        const auto r = eval(ref, res, 1);
        CHECK(r.over_segmentations == 1);
        CHECK(r.complete_lineages == 1);
        CHECK(eval(ref, res, 0).complete_lineages == 0);
    }
    SUBCASE("two frames late exceeds tolerance 1") {
        const auto r = eval(ref, division(6, 4), 1);
        CHECK(r.complete_lineages == 0);
        CHECK(eval(ref, division(6, 4), 2).complete_lineages == 1);
    }
    SUBCASE("missed division") {
        Video res = ref;
        res.graph.remove_edge({2, 1}, {3, 2});
        const auto r = eval(ref, res);
        CHECK(r.false_negative_links == 1);
        CHECK(r.complete_lineages == 0);
    }
}

TEST_CASE("edge exclusion") {
    Video ref;
    ref.add_frame({{1, 0, 5, 10, 12}, {2, 30, 20, 40, 30}});
    ref.add_frame({{1, 0, 5, 10, 12}, {2, 30, 20, 40, 30}});
    ref.link(0, 1, 1);
    ref.link(0, 2, 2);
    Video res;
    res.add_frame({{2, 30, 20, 40, 30}});
    res.add_frame({{2, 30, 20, 40, 30}});
    res.link(0, 2, 2);
    MatchParams p;
    auto r = evaluate(ref.frames, ref.graph, res.frames, res.graph, p);
    CHECK(r.false_negative_cells == 0);
    CHECK(r.reference_cells == 2);
    CHECK(r.total_lineages == 1);
    CHECK(r.complete_lineages == 1);
    CHECK(format_report(r).find("edge") != std::string::npos);
    p.edge_exclusion = false;
    r = evaluate(ref.frames, ref.graph, res.frames, res.graph, p);
    CHECK(r.false_negative_cells == 2);
    CHECK(r.reference_cells == 4);
    CHECK(r.total_lineages == 2);
    CHECK(r.complete_lineages == 1);
}

TEST_CASE("linear_assignment matches brute force") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int trial = 0; trial < 300; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 6), cols = 1 + static_cast<int>(rng() % 6);
        std::vector<std::vector<double>> c(rows, std::vector<double>(cols));
        for (auto& row : c)
            for (auto& v : row) v = std::round(u(rng) * 4) / 4;
        const auto a = linear_assignment(c);
        REQUIRE(static_cast<int>(a.size()) == rows);
        double got = 0.0;
        int assigned = 0;
        std::vector<int> used(cols, 0);
        for (int r = 0; r < rows; ++r) {
            if (a[r] < 0) continue;
            CHECK(used[a[r]]++ == 0);
            got += c[r][a[r]];
            ++assigned;
        }
        CHECK(assigned == std::min(rows, cols));
        // Exhaustive: permute the larger side.
        double best = 1e300;
        const int k = std::min(rows, cols), n = std::max(rows, cols);
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        do {
            double s = 0.0;
            for (int i = 0; i < k; ++i) s += rows <= cols ? c[i][perm[i]] : c[perm[i]][i];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best));
    }
    CHECK(linear_assignment({}).empty());
}

TEST_CASE("self evaluation and label permutation") {
    SimConfig cfg;
    cfg.width = cfg.height = 96;
    cfg.n_frames = 30;
    cfg.n_cells = 12;
    cfg.division_probability = 0.03;
    cfg.division_min_age = 5;
    cfg.seed = 5;
    const SimVideo v = simulate(cfg);
    const auto r = evaluate(v.frames, v.graph, v.frames, v.graph, MatchParams{}, 2);
    CHECK(r.segmentation_errors() == 0);
    CHECK(r.link_errors() == 0);
    CHECK(r.complete_lineages == r.total_lineages);
    CHECK(r.total_lineages > 0);
    CHECK(r.reference_links > 0);

    // Relabel every result frame with a reversed label order.
    std::vector<LabelFrame> perm = v.frames;
    TrackGraph g;
    std::vector<std::map<Label, Label>> maps(perm.size());
    for (std::size_t t = 0; t < perm.size(); ++t) {
        const Label top = perm[t].max_label();
        for (auto& l : perm[t].raster.values())
            if (l) l = top + 1 - l;
        for (Label l = 1; l <= top; ++l) maps[t][l] = top + 1 - l;
        add_frame_nodes(g, region_properties(perm[t]));
    }
    for (const auto& e : v.graph.edges())
        g.add_edge({e.from.frame, maps[e.from.frame].at(e.from.label)}, {e.to.frame, maps[e.to.frame].at(e.to.label)});
    const auto p = evaluate(v.frames, v.graph, perm, g, MatchParams{});
    CHECK(p.segmentation_errors() == 0);
    CHECK(p.link_errors() == 0);
    CHECK(p.complete_lineages == r.complete_lineages);
    CHECK(format_report_csv(p) == format_report_csv(r));
}

TEST_CASE("evaluate validation") {
    Video a = three_cells();
    Video b;
    b.add_frame({{1, 5, 5, 15, 12}});
    CHECK_THROWS_AS(eval(a, b), DataError);
    MatchParams p;
    p.mitosis_frame_tolerance = -1;
    CHECK_THROWS_AS(p.validate(), DataError);
}
