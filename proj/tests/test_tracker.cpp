#include "celltrack/tracker.hpp"
#include "doctest.h"

using namespace celltrack;

namespace {
LabelFrame two_cells(int frame, int shift) {
    LabelFrame f(40, 20, frame);
    for (int y = 3; y < 7; ++y)
        for (int x = 3 + shift; x < 10 + shift; ++x) f.raster(x, y) = 1;
    for (int y = 12; y < 16; ++y)
        for (int x = 20; x < 26; ++x) f.raster(x, y) = 2;
    return f;
}
}  // namespace

TEST_CASE("assign_multiplicity") {
    const auto r = make_region({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}}, 1, 0, 5, 1);
    MultiplicityMap m(5, 1);
    SUBCASE("one-hot") {
        for (auto& v : m.p_one.values()) v = 1.0;
        CHECK(assign_multiplicity(r, m) == Multiplicity::one);
    }
    SUBCASE("majority many") {
        for (int x = 0; x < 3; ++x) m.p_many(x, 0) = 0.9;
        for (int x = 3; x < 5; ++x) m.p_one(x, 0) = 0.9;
        CHECK(assign_multiplicity(r, m) == Multiplicity::many);
    }
    SUBCASE("uniform tie") {
        for (std::size_t i = 0; i < 5; ++i) m.p_zero[i] = m.p_one[i] = m.p_many[i] = 1.0 / 3.0;
        CHECK(assign_multiplicity(r, m) == Multiplicity::one);
    }
    SUBCASE("zero beats many on tie") {
        for (std::size_t i = 0; i < 5; ++i) m.p_zero[i] = m.p_many[i] = 0.5;
        CHECK(assign_multiplicity(r, m) == Multiplicity::zero);
    }
}

TEST_CASE("forward and backward passes") {
    SUBCASE("static and moving cells") {
        const auto a = two_cells(0, 0);
        const auto b = two_cells(1, 5);
        const auto pair = make_proxy_pair(a, b, {{1, 1}, {2, 2}});
        const auto links = forward_track(region_properties(a), b, pair);
        CHECK(links == std::vector<Link>{{1, 1}, {2, 2}});
        CHECK(backward_track(region_properties(b), a, pair, links).empty());
    }
    SUBCASE("zero category is not linked") {
        const auto a = two_cells(0, 0);
        const auto b = two_cells(1, 0);
        const auto pair = make_proxy_pair(a, b, {{2, 2}});
        CHECK(forward_track(region_properties(a), b, pair) == std::vector<Link>{{2, 2}});
    }
    SUBCASE("division is found by the backward pass") {
        LabelFrame a(30, 10, 0), b(30, 10, 1);
        for (int y = 3; y < 6; ++y)
            for (int x = 4; x < 20; ++x) a.raster(x, y) = 1;
        for (int y = 3; y < 6; ++y) {
            for (int x = 3; x < 10; ++x) b.raster(x, y) = 1;
            for (int x = 13; x < 21; ++x) b.raster(x, y) = 2;
        }
        const auto pair = make_proxy_pair(a, b, {{1, 1}, {1, 2}});
        const auto fwd = forward_track(region_properties(a), b, pair);
        CHECK(fwd.empty());
        const auto bwd = backward_track(region_properties(b), a, pair, fwd);
        CHECK(bwd == std::vector<Link>{{1, 1}, {1, 2}});

        auto g = track_video({a, b}, {pair});
        CHECK(g.edge_count() == 2);
        for (const auto& e : g.edges()) CHECK(e.kind == EdgeKind::split);
        CHECK(g.node({0, 1}).forward == Multiplicity::many);
    }
    SUBCASE("shift landing outside the raster") {
        const auto a = two_cells(0, 0);
        const auto b = two_cells(1, 0);
        auto pair = make_proxy_pair(a, b, {{1, 1}, {2, 2}});
        for (int y = 3; y < 7; ++y)
            for (int x = 3; x < 10; ++x) pair.fwd_dx(x, y) = -100.0;
        CHECK(forward_track(region_properties(a), b, pair) == std::vector<Link>{{2, 2}});
    }
}

TEST_CASE("merge links from over-segmentation") {
    LabelFrame a(30, 10, 0), b(30, 10, 1);
    for (int y = 3; y < 6; ++y) {
        for (int x = 3; x < 10; ++x) a.raster(x, y) = 1;
        for (int x = 10; x < 18; ++x) a.raster(x, y) = 2;
        for (int x = 3; x < 18; ++x) b.raster(x, y) = 1;
    }
    const auto pair = make_proxy_pair(a, b, {{1, 1}, {2, 1}});
    auto g = track_video({a, b}, {pair});
    CHECK(g.edge_count() == 2);
    for (const auto& e : g.edges()) {
        CHECK(e.kind == EdgeKind::merge);
        CHECK_FALSE(e.conflict);
    }
    CHECK_THROWS_AS(track_video({a, b}, {}), DataError);
}
