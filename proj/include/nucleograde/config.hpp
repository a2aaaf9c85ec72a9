#pragma once

/// @file config.hpp
/// @brief TOML pipeline configuration: loading, canonical JSON form and hash.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>
#include <toml.hpp>

#include "pipeline.hpp"

namespace nucleograde::config {

namespace detail {

inline void check_keys(const toml::table& tbl, const std::string& section, const std::set<std::string>& allowed) {
    for (const auto& [key, value] : tbl) {
        const std::string k(key.str());
        if (!allowed.contains(k)) {
            throw Error(ErrorCode::ConfigError, "unknown key '" + k + "' in [" + section + "]");
        }
    }
}

inline double number(const toml::table& tbl, const char* key, double fallback) {
    const auto* node = tbl.get(key);
    if (!node) return fallback;
    if (auto v = node->value<double>()) return *v;
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a number");
}

inline int integer(const toml::table& tbl, const char* key, int fallback) {
    const auto* node = tbl.get(key);
    if (!node) return fallback;
    if (node->is_integer()) return static_cast<int>(node->as_integer()->get());
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be an integer");
}

inline bool boolean(const toml::table& tbl, const char* key, bool fallback) {
    const auto* node = tbl.get(key);
    if (!node) return fallback;
    if (auto v = node->value<bool>()) return *v;
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a boolean");
}

inline std::string string(const toml::table& tbl, const char* key, const std::string& fallback) {
    const auto* node = tbl.get(key);
    if (!node) return fallback;
    if (auto v = node->value<std::string>()) return *v;
    throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be a string");
}

inline stains::Vec3 vec3(const toml::table& tbl, const char* key, const stains::Vec3& fallback) {
    const auto* node = tbl.get(key);
    if (!node) return fallback;
    const auto* arr = node->as_array();
    if (!arr || arr->size() != 3) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be 3 numbers");
    stains::Vec3 out{};
    for (std::size_t i = 0; i < 3; ++i) {
        auto v = (*arr)[i].value<double>();
        if (!v) throw Error(ErrorCode::ConfigError, std::string("'") + key + "' must be 3 numbers");
        out[i] = *v;
    }
    return out;
}

inline const toml::table& section(const toml::table& root, const char* name, const std::set<std::string>& keys) {
    static const toml::table empty;
    const auto* node = root.get(name);
    if (!node) return empty;
    const auto* tbl = node->as_table();
    if (!tbl) throw Error(ErrorCode::ConfigError, std::string("[") + name + "] must be a table");
    check_keys(*tbl, name, keys);
    return *tbl;
}

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return p;
    const std::filesystem::path path(p);
    return path.is_absolute() ? p : (base / path).lexically_normal().string();
}

}  // namespace detail

/// Parses a TOML document. Relative paths resolve against `base_dir`.
inline pipeline::PipelineConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        throw Error(ErrorCode::ConfigError, std::string(e.description()));
    }
    detail::check_keys(root, "root",
                       {"stains", "diffusion", "log", "centers", "contour", "levelset", "nucleoli", "scoring",
                        "baseline", "run"});
    using namespace detail;
    pipeline::PipelineConfig cfg;

    const auto& st = section(root, "stains", {"hematoxylin", "eosin", "background", "max_concentration", "dark_nuclei"});
    cfg.preprocess.stains = stains::StainMatrix::from_he(vec3(st, "hematoxylin", {0.650, 0.704, 0.286}),
                                                         vec3(st, "eosin", {0.072, 0.990, 0.105}));
    cfg.preprocess.separation.background = number(st, "background", 255.0);
    cfg.preprocess.separation.max_concentration = number(st, "max_concentration", 1.5);
    cfg.preprocess.separation.dark_nuclei = boolean(st, "dark_nuclei", true);

    const auto& di = section(root, "diffusion", {"iterations", "kappa", "rate"});
    cfg.preprocess.diffusion.iterations = integer(di, "iterations", 10);
    cfg.preprocess.diffusion.kappa = number(di, "kappa", 15.0);
    cfg.preprocess.diffusion.rate = number(di, "rate", 0.2);

    const auto& lg = section(root, "log", {"sigma", "threshold"});
    cfg.preprocess.log_sigma = number(lg, "sigma", cfg.preprocess.log_sigma);
    cfg.preprocess.log_threshold = number(lg, "threshold", cfg.preprocess.log_threshold);

    const auto& ce = section(root, "centers", {"closing_radius", "r_healthy", "dog_sigma1", "dog_sigma2",
                                               "dog_threshold", "min_blob_area"});
    cfg.centers.closing_radius = integer(ce, "closing_radius", cfg.centers.closing_radius);
    cfg.centers.r_healthy = integer(ce, "r_healthy", cfg.centers.r_healthy);
    cfg.centers.dog.sigma1 = number(ce, "dog_sigma1", cfg.centers.dog.sigma1);
    cfg.centers.dog.sigma2 = number(ce, "dog_sigma2", cfg.centers.dog.sigma2);
    cfg.centers.dog_threshold = number(ce, "dog_threshold", cfg.centers.dog_threshold);
    const int min_blob = integer(ce, "min_blob_area", static_cast<int>(cfg.centers.min_blob_area));
    if (min_blob < 0) throw Error(ErrorCode::ConfigError, "min_blob_area must be >= 0");
    cfg.centers.min_blob_area = static_cast<std::size_t>(min_blob);

    const auto& co = section(root, "contour", {"r_seed", "closing_radius"});
    cfg.contour.r_seed = integer(co, "r_seed", cfg.centers.r_healthy);
    cfg.contour.closing_radius = integer(co, "closing_radius", cfg.contour.closing_radius);

    const auto& ls = section(root, "levelset", {"mu", "lambda", "alpha", "epsilon", "dt", "iterations", "edge_sigma",
                                                "padding", "c0", "collision_overlap"});
    auto& d = cfg.segment.drlse;
    d.dt = number(ls, "dt", d.dt);
    d.mu = number(ls, "mu", 0.2 / d.dt);
    d.lambda = number(ls, "lambda", d.lambda);
    d.alpha = number(ls, "alpha", d.alpha);
    d.epsilon = number(ls, "epsilon", d.epsilon);
    d.iterations = integer(ls, "iterations", d.iterations);
    cfg.segment.edge_sigma = number(ls, "edge_sigma", cfg.segment.edge_sigma);
    cfg.segment.padding = integer(ls, "padding", cfg.segment.padding);
    cfg.segment.c0 = number(ls, "c0", cfg.segment.c0);
    cfg.segment.collision_overlap = number(ls, "collision_overlap", cfg.segment.collision_overlap);

    const auto& nu = section(root, "nucleoli", {"model", "bilateral_sigma_space", "bilateral_sigma_range", "gamma",
                                                "threshold", "opening_radius", "circ_max", "max_area_fraction",
                                                "lbp_points", "lbp_radius", "patch_radius"});
    auto& n = cfg.nucleoli;
    cfg.nucleoli_model = resolve(base_dir, string(nu, "model", ""));
    n.bilateral_sigma_space = number(nu, "bilateral_sigma_space", n.bilateral_sigma_space);
    n.bilateral_sigma_range = number(nu, "bilateral_sigma_range", n.bilateral_sigma_range);
    n.gamma = number(nu, "gamma", n.gamma);
    n.intensity_threshold = number(nu, "threshold", n.intensity_threshold);
    n.opening_radius = integer(nu, "opening_radius", n.opening_radius);
    n.circ_max = number(nu, "circ_max", n.circ_max);
    n.max_area_fraction = number(nu, "max_area_fraction", n.max_area_fraction);
    n.lbp.points = integer(nu, "lbp_points", n.lbp.points);
    n.lbp.radius = number(nu, "lbp_radius", n.lbp.radius);
    n.patch_radius = integer(nu, "patch_radius", n.patch_radius);

    const auto& sc = section(root, "scoring", {"chromatin_margin", "contour_margin_ratio", "cv3"});
    cfg.scoring.chromatin_margin = number(sc, "chromatin_margin", cfg.scoring.chromatin_margin);
    cfg.scoring.contour_margin_ratio = number(sc, "contour_margin_ratio", cfg.scoring.contour_margin_ratio);
    cfg.scoring.cv3 = number(sc, "cv3", cfg.scoring.cv3);

    const auto& ba = section(root, "baseline", {"normal_area", "normal_mean_intensity", "normal_circularity",
                                                "normal_nucleoli", "annotations", "derive_r_healthy"});
    if (ba.contains("normal_area") || ba.contains("normal_mean_intensity") || ba.contains("normal_circularity")) {
        scoring::NormalBaseline b;
        b.normal_area = number(ba, "normal_area", 0.0);
        b.normal_mean_intensity = number(ba, "normal_mean_intensity", 0.0);
        b.normal_circularity = number(ba, "normal_circularity", 0.0);
        b.normal_nucleoli = number(ba, "normal_nucleoli", 0.0);
        cfg.baseline = b;
    }
    cfg.baseline_annotations = resolve(base_dir, string(ba, "annotations", ""));
    cfg.derive_r_healthy = boolean(ba, "derive_r_healthy", false);

    const auto& ru = section(root, "run", {"quarter", "workers", "match_radius"});
    cfg.quarter = boolean(ru, "quarter", cfg.quarter);
    cfg.workers = integer(ru, "workers", cfg.workers);
    cfg.match_radius = number(ru, "match_radius", cfg.match_radius);

    try {
        cfg.validate();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        throw Error(ErrorCode::ConfigError, e.what());
    }
    return cfg;
}

inline pipeline::PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

/// Every parameter that influences results. Worker count is excluded.
inline nlohmann::json to_json(const pipeline::PipelineConfig& c) {
    using nlohmann::json;
    const auto& s = c.preprocess.stains;
    json j;
    j["stains"] = {{"hematoxylin", s.hematoxylin()},
                   {"eosin", s.eosin()},
                   {"residual", s.residual()},
                   {"background", c.preprocess.separation.background},
                   {"max_concentration", c.preprocess.separation.max_concentration},
                   {"dark_nuclei", c.preprocess.separation.dark_nuclei}};
    j["diffusion"] = {{"iterations", c.preprocess.diffusion.iterations},
                      {"kappa", c.preprocess.diffusion.kappa},
                      {"rate", c.preprocess.diffusion.rate}};
    j["log"] = {{"sigma", c.preprocess.log_sigma}, {"threshold", c.preprocess.log_threshold}};
    j["centers"] = {{"closing_radius", c.centers.closing_radius}, {"r_healthy", c.centers.r_healthy},
                    {"dog_sigma1", c.centers.dog.sigma1},         {"dog_sigma2", c.centers.dog.sigma2},
                    {"dog_threshold", c.centers.dog_threshold},   {"min_blob_area", c.centers.min_blob_area}};
    j["contour"] = {{"r_seed", c.contour.r_seed}, {"closing_radius", c.contour.closing_radius}};
    const auto& d = c.segment.drlse;
    j["levelset"] = {{"mu", d.mu},
                     {"lambda", d.lambda},
                     {"alpha", d.alpha},
                     {"epsilon", d.epsilon},
                     {"dt", d.dt},
                     {"iterations", d.iterations},
                     {"edge_sigma", c.segment.edge_sigma},
                     {"padding", c.segment.padding},
                     {"c0", c.segment.c0},
                     {"collision_overlap", c.segment.collision_overlap}};
    const auto& n = c.nucleoli;
    j["nucleoli"] = {{"model", c.nucleoli_model},
                     {"bilateral_sigma_space", n.bilateral_sigma_space},
                     {"bilateral_sigma_range", n.bilateral_sigma_range},
                     {"gamma", n.gamma},
                     {"threshold", n.intensity_threshold},
                     {"opening_radius", n.opening_radius},
                     {"circ_max", n.circ_max},
                     {"max_area_fraction", n.max_area_fraction},
                     {"lbp_points", n.lbp.points},
                     {"lbp_radius", n.lbp.radius},
                     {"patch_radius", n.patch_radius}};
    j["scoring"] = {{"chromatin_margin", c.scoring.chromatin_margin},
                    {"contour_margin_ratio", c.scoring.contour_margin_ratio},
                    {"cv3", c.scoring.cv3}};
    json base = {{"annotations", c.baseline_annotations}, {"derive_r_healthy", c.derive_r_healthy}};
    if (c.baseline) {
        base["normal_area"] = c.baseline->normal_area;
        base["normal_mean_intensity"] = c.baseline->normal_mean_intensity;
        base["normal_circularity"] = c.baseline->normal_circularity;
        base["normal_nucleoli"] = c.baseline->normal_nucleoli;
    }
    j["baseline"] = base;
    j["run"] = {{"quarter", c.quarter}, {"match_radius", c.match_radius}};
    return j;
}

/// FNV-1a 64 over the canonical JSON form, as 16 hex digits.
inline std::string config_hash(const pipeline::PipelineConfig& c) {
    const std::string text = to_json(c).dump();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nucleograde::config
