#include "celltrack/config.hpp"

#include <limits>
#include <set>
#include <type_traits>

#include "celltrack/io.hpp"
#include "json.hpp"

namespace celltrack {

using Json = nlohmann::ordered_json;

namespace {

// Field lists shared by reading and writing. `v(key, field)` is called once per field.
template <typename V>
void fields(V& v, SegmentationParams& p) {
    v("edm_threshold", p.edm_threshold);
    v("center_sigma_fraction", p.center_sigma_fraction);
    v("center_sigma_min", p.center_sigma_min);
    v("center_sigma_max", p.center_sigma_max);
    v("thickness_override", p.thickness_override);
    v("amplitude_ratio_threshold", p.amplitude_ratio_threshold);
    v("expected_center_size", p.expected_center_size);
    v("center_size_min_fraction", p.center_size_min_fraction);
    v("center_size_max_fraction", p.center_size_max_fraction);
    v("center_eccentricity_max", p.center_eccentricity_max);
}

template <typename V>
void fields(V& v, CorrectionParams& p) {
    v("contact_distance", p.contact_distance);
    v("rod_mode", p.rod_mode);
    v("alignment_angle_max", p.alignment_angle_max);
    v("rod_axis_min_eccentricity", p.rod_axis_min_eccentricity);
    v("max_rounds", p.max_rounds);
}

template <typename V>
void fields(V& v, MatchParams& p) {
    v("absolute_overlap", p.absolute_overlap);
    v("mitosis_frame_tolerance", p.mitosis_frame_tolerance);
    v("edge_exclusion", p.edge_exclusion);
}

template <typename V>
void fields(V& v, WindowConfig& p) {
    v("n_frames", p.n_frames);
    v("gap", p.gap);
}

template <typename V>
void fields(V& v, SimConfig& p) {
    v("width", p.width);
    v("height", p.height);
    v("n_frames", p.n_frames);
    v("n_cells", p.n_cells);
    v("shape", p.shape);
    v("rod_length_mean", p.rod_length_mean);
    v("rod_length_sd", p.rod_length_sd);
    v("rod_width", p.rod_width);
    v("rod_max_length", p.rod_max_length);
    v("blob_radius_mean", p.blob_radius_mean);
    v("blob_radius_sd", p.blob_radius_sd);
    v("blob_deformation", p.blob_deformation);
    v("speed_mean", p.speed_mean);
    v("speed_sd", p.speed_sd);
    v("persistence", p.persistence);
    v("growth_rate", p.growth_rate);
    v("division_probability", p.division_probability);
    v("division_min_age", p.division_min_age);
    v("edge_margin", p.edge_margin);
    v("seed", p.seed);
}

template <typename V>
void fields(V& v, CorruptionConfig& p) {
    v("proxy_noise_sigma", p.proxy_noise_sigma);
    v("under_seg_rate", p.under_seg_rate);
    v("over_seg_rate", p.over_seg_rate);
    v("displacement_jitter_sigma", p.displacement_jitter_sigma);
    v("multiplicity_flip_rate", p.multiplicity_flip_rate);
    v("displacement_capture_radius", p.displacement_capture_radius);
    v("contact_distance", p.contact_distance);
}

template <typename V>
void fields(V& v, AnalysisConfig& p) {
    v("px_size", p.px_size);
    v("dt", p.dt);
    v("max_lag", p.max_lag);
    v("speed_bin_size", p.speed_bin_size);
    v("weight_by_duration", p.weight_by_duration);
    v("normalization_frames", p.normalization_frames);
    v("angle_bins", p.angle_bins);
    v("boundary_margin", p.boundary_margin);
    v("image_width", p.image_width);
    v("image_height", p.image_height);
    v("video_length", p.video_length);
}

template <typename V>
void sections(V& v, PipelineConfig& c) {
    v("segmentation", c.segmentation);
    v("correction", c.correction);
    v("matching", c.matching);
    v("window", c.window);
    v("simulation", c.simulation);
    v("corruption", c.corruption);
    v("analysis", c.analysis);
}

struct Writer {
    Json* out;
    void operator()(const char* key, CellShape& s) { (*out)[key] = to_string(s); }
    template <typename T>
    void operator()(const char* key, T& value) {
        if constexpr (std::is_class_v<T>) {
            Json sub = Json::object();
            Writer w{&sub};
            fields(w, value);
            (*out)[key] = std::move(sub);
        } else {
            (*out)[key] = value;
        }
    }
};

struct Reader {
    const Json* in;
    std::string path;
    std::set<std::string> known;

    void operator()(const char* key, CellShape& s) {
        known.insert(key);
        if (!in->contains(key)) return;
        const auto& j = (*in)[key];
        if (!j.is_string()) throw DataError("config: " + path + key + " must be a string");
        s = parse_cell_shape(j.get<std::string>());
    }
    template <typename T>
    void operator()(const char* key, T& value) {
        known.insert(key);
        if (!in->contains(key)) return;
        const Json& j = (*in)[key];
        const std::string where = path + key;
        if constexpr (std::is_class_v<T>) {
            if (!j.is_object()) throw DataError("config: " + where + " must be an object");
            Reader r{&j, where + ".", {}};
            fields(r, value);
            r.reject_unknown();
        } else if constexpr (std::is_same_v<T, bool>) {
            if (!j.is_boolean()) throw DataError("config: " + where + " must be true or false");
            value = j.get<bool>();
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw DataError("config: " + where + " must be an integer");
            if constexpr (std::is_unsigned_v<T>) {
                if (j.is_number_unsigned() || j.get<long long>() >= 0)
                    value = j.get<T>();
                else
                    throw DataError("config: " + where + " must be non-negative");
            } else {
                const long long v = j.get<long long>();
                if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max())
                    throw DataError("config: " + where + " is out of range");
                value = static_cast<T>(v);
            }
        } else {
            if (!j.is_number()) throw DataError("config: " + where + " must be a number");
            value = j.get<T>();
        }
    }
    void reject_unknown() const {
        for (const auto& [k, v] : in->items())
            if (!known.count(k)) throw DataError("config: unknown key " + path + k);
    }
};

}  // namespace

void PipelineConfig::validate() const {
    segmentation.validate();
    correction.validate();
    matching.validate();
    simulation.validate();
    corruption.validate();
    if (window.n_frames < 3 || window.n_frames % 2 == 0) throw DataError("config: window.n_frames must be odd and >= 3");
    if (window.gap < 1) throw DataError("config: window.gap must be >= 1");
    const auto& a = analysis;
    if (!(a.px_size > 0.0) || !(a.dt > 0.0)) throw DataError("config: analysis.px_size and analysis.dt must be positive");
    if (a.max_lag < 1) throw DataError("config: analysis.max_lag must be >= 1");
    if (!(a.speed_bin_size > 0.0) || !(a.normalization_frames > 0.0))
        throw DataError("config: analysis.speed_bin_size and analysis.normalization_frames must be positive");
    if (a.angle_bins < 1) throw DataError("config: analysis.angle_bins must be >= 1");
    if (a.boundary_margin < 0.0 || a.image_width < 0 || a.image_height < 0 || a.video_length < 0)
        throw DataError("config: analysis margins, sizes and length must be non-negative");
}

PipelineConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw DataError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw DataError("config: top level must be an object");
    PipelineConfig c;
    Reader r{&j, "", {}};
    sections(r, c);
    r.reject_unknown();
    c.validate();
    return c;
}

std::string format_config(const PipelineConfig& config) {
    PipelineConfig c = config;
    Json j = Json::object();
    Writer w{&j};
    sections(w, c);
    return j.dump(2) + "\n";
}

PipelineConfig load_config(const std::string& path) {
    try {
        return parse_config(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path + ": " + e.what());
    }
}

}  // namespace celltrack
