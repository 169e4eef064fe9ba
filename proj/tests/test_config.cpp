#include "celltrack/config.hpp"
#include "doctest.h"

using namespace celltrack;

namespace {

std::string error_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("default configuration round trips") {
    const std::string text = format_config(PipelineConfig{});
    CHECK(format_config(parse_config(text)) == text);
    CHECK(text.find("\"segmentation\"") < text.find("\"analysis\""));
    CHECK(text.find("\"shape\": \"rod\"") != std::string::npos);
}

TEST_CASE("partial documents keep defaults elsewhere") {
    const auto c = parse_config(R"({"simulation": {"seed": 42, "shape": "blob"}, "correction": {"rod_mode": true}})");
    CHECK(c.simulation.seed == 42);
    CHECK(c.simulation.shape == CellShape::blob);
    CHECK(c.simulation.n_cells == SimConfig{}.n_cells);
    CHECK(c.correction.rod_mode);
    CHECK(c.segmentation.edm_threshold == SegmentationParams{}.edm_threshold);
    CHECK(parse_config("{}").window.n_frames == 3);

    PipelineConfig changed;
    changed.matching.mitosis_frame_tolerance = 3;
    changed.analysis.px_size = 0.088;
    changed.simulation.seed = 18446744073709551615ull;
    const std::string text = format_config(changed);
    const auto back = parse_config(text);
    CHECK(back.matching.mitosis_frame_tolerance == 3);
    CHECK(back.analysis.px_size == 0.088);
    CHECK(back.simulation.seed == 18446744073709551615ull);
    CHECK(format_config(back) == text);
}

TEST_CASE("invalid documents") {
    CHECK(error_of(R"({"segmentaton": {}})").find("unknown key segmentaton") != std::string::npos);
    CHECK(error_of(R"({"window": {"n_frames": 5, "delta": 2}})").find("unknown key window.delta") != std::string::npos);
    CHECK(error_of(R"({"window": {"n_frames": 4}})").find("odd") != std::string::npos);
    CHECK(error_of(R"({"window": {"n_frames": 2.5}})").find("integer") != std::string::npos);
    CHECK(error_of(R"({"correction": {"rod_mode": 1}})").find("true or false") != std::string::npos);
    CHECK(error_of(R"({"simulation": {"shape": "cube"}})").find("cube") != std::string::npos);
    CHECK(error_of(R"({"simulation": {"seed": -1}})").find("non-negative") != std::string::npos);
    CHECK(error_of(R"({"analysis": {"dt": "fast"}})").find("number") != std::string::npos);
    CHECK(error_of(R"({"analysis": [1]})").find("object") != std::string::npos);
    CHECK(error_of("[]").find("top level") != std::string::npos);
    CHECK(error_of("{").find("config:") != std::string::npos);
    CHECK(error_of(R"({"corruption": {"under_seg_rate": 2}})").find("under_seg_rate") != std::string::npos);
}
