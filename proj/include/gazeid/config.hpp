#pragma once

// Pipeline configuration: one INI-style file with [sections] of key = value
// lines. Every key is optional; the defaults are the published settings.
//
//   [geometry]   distance_mm width_mm height_mm width_px height_px
//   [preprocess] poly_order frame_len
//   [segment]    velocity_threshold_dps min_fixation_ms min_saccade_ms
//   [model]      clusters max_iter lambda selection_rounds sigma_floor
//                pinv_tolerance seed
//   [features]   stimulus (RAN|TEX|SYNTH)  mask (all|published|<file>)

#include "gazeid/error.hpp"
#include "gazeid/gaze_data.hpp"
#include "gazeid/preprocess.hpp"
#include "gazeid/segment.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <set>
#include <sstream>
#include <string>

namespace gazeid {

struct ModelConfig {
    int clusters = 32;
    int max_iter = 100;
    double lambda = 0.5;
    int selection_rounds = 10;
    double sigma_floor = 1e-3;
    double pinv_tolerance = 1e-10;
    std::uint64_t seed = 42;
};

struct PipelineConfig {
    ScreenGeometry geometry;
    SgConfig sg;
    IvtConfig ivt;
    ModelConfig model;
    StimulusKind stimulus = StimulusKind::Synth;
    /// "all", "published", or a path to a mask file from select-features.
    std::string mask = "all";
};

inline void validate(const PipelineConfig& c) {
    if (!c.geometry.valid()) throw InvalidConfig("geometry: all fields must be positive");
    if (!c.sg.valid()) throw InvalidConfig("preprocess: frame_len must be odd and greater than poly_order");
    if (!c.ivt.valid()) throw InvalidConfig("segment: thresholds must be positive");
    if (c.model.clusters < 1) throw InvalidConfig("model: clusters must be at least 1");
    if (c.model.max_iter < 1) throw InvalidConfig("model: max_iter must be at least 1");
    if (!(c.model.lambda >= 0.0 && c.model.lambda <= 1.0)) throw InvalidConfig("model: lambda must lie in [0, 1]");
    if (c.model.selection_rounds < 1) throw InvalidConfig("model: selection_rounds must be at least 1");
    if (!(c.model.sigma_floor > 0)) throw InvalidConfig("model: sigma_floor must be positive");
    if (!(c.model.pinv_tolerance > 0)) throw InvalidConfig("model: pinv_tolerance must be positive");
    if (c.mask.empty()) throw InvalidConfig("features: mask must not be empty");
}

namespace detail {

template <typename T>
void read_key(const boost::property_tree::ptree& tree, const std::string& key, T& value) {
    if (const auto v = tree.get_optional<std::string>(key)) {
        std::istringstream in(*v);
        T parsed{};
        in >> parsed;
        if (!in || !(in >> std::ws).eof()) throw InvalidConfig("bad value for " + key + ": '" + *v + "'");
        value = parsed;
    }
}

inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "geometry.distance_mm", "geometry.width_mm", "geometry.height_mm", "geometry.width_px", "geometry.height_px",
        "preprocess.poly_order", "preprocess.frame_len", "segment.velocity_threshold_dps", "segment.min_fixation_ms",
        "segment.min_saccade_ms", "model.clusters", "model.max_iter", "model.lambda", "model.selection_rounds",
        "model.sigma_floor", "model.pinv_tolerance", "model.seed", "features.stimulus", "features.mask"};
    return keys;
}

} // namespace detail

inline PipelineConfig parse_config(std::istream& in, PipelineConfig cfg = {}) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw InvalidConfig(std::string("config: ") + e.what());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw InvalidConfig("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : body) {
            if (!detail::known_keys().contains(section + "." + key)) {
                throw InvalidConfig("config: unknown key " + section + "." + key);
            }
        }
    }
    detail::read_key(tree, "geometry.distance_mm", cfg.geometry.distance_mm);
    detail::read_key(tree, "geometry.width_mm", cfg.geometry.width_mm);
    detail::read_key(tree, "geometry.height_mm", cfg.geometry.height_mm);
    detail::read_key(tree, "geometry.width_px", cfg.geometry.width_px);
    detail::read_key(tree, "geometry.height_px", cfg.geometry.height_px);
    detail::read_key(tree, "preprocess.poly_order", cfg.sg.poly_order);
    detail::read_key(tree, "preprocess.frame_len", cfg.sg.frame_len);
    detail::read_key(tree, "segment.velocity_threshold_dps", cfg.ivt.velocity_threshold_dps);
    detail::read_key(tree, "segment.min_fixation_ms", cfg.ivt.min_fixation_ms);
    detail::read_key(tree, "segment.min_saccade_ms", cfg.ivt.min_saccade_ms);
    detail::read_key(tree, "model.clusters", cfg.model.clusters);
    detail::read_key(tree, "model.max_iter", cfg.model.max_iter);
    detail::read_key(tree, "model.lambda", cfg.model.lambda);
    detail::read_key(tree, "model.selection_rounds", cfg.model.selection_rounds);
    detail::read_key(tree, "model.sigma_floor", cfg.model.sigma_floor);
    detail::read_key(tree, "model.pinv_tolerance", cfg.model.pinv_tolerance);
    detail::read_key(tree, "model.seed", cfg.model.seed);
    if (const auto s = tree.get_optional<std::string>("features.stimulus")) cfg.stimulus = parse_stimulus_kind(*s);
    if (const auto m = tree.get_optional<std::string>("features.mask")) cfg.mask = *m;
    validate(cfg);
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    return parse_config(in);
}

} // namespace gazeid
