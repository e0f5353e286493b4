#pragma once

#include <charconv>
#include <string>

#include <json.hpp>

#include "../metrics.hpp"

namespace ovox::io {

inline std::string shortest(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, r.ptr);
}

inline nlohmann::ordered_json report_json(const MetricsReport& r) {
    nlohmann::ordered_json j;
    j["md"] = r.md;
    j["md_f1"] = r.md_f.f;
    j["cd"] = r.cd;
    j["cd_f1"] = r.cd_f.f;
    j["precision"] = {{"md", r.md_f.precision}, {"cd", r.cd_f.precision}};
    j["recall"] = {{"md", r.md_f.recall}, {"cd", r.cd_f.recall}};
    j["counts"] = {{"gt_surface", r.gt_surface_points},
                   {"pred_surface", r.pred_surface_points},
                   {"gt_shell", r.gt_shell_points},
                   {"pred_shell", r.pred_shell_points}};
    j["seeds"] = {{"surface", r.surface_seed}, {"shell", r.shell_seed}};
    return j;
}

/// One key=value pair per line.
inline std::string report_text(const MetricsReport& r) {
    std::string s;
    auto kv = [&s](const char* k, const std::string& v) { s += std::string(k) + '=' + v + '\n'; };
    kv("md", shortest(r.md));
    kv("md_f1", shortest(r.md_f.f));
    kv("md_precision", shortest(r.md_f.precision));
    kv("md_recall", shortest(r.md_f.recall));
    kv("cd", shortest(r.cd));
    kv("cd_f1", shortest(r.cd_f.f));
    kv("cd_precision", shortest(r.cd_f.precision));
    kv("cd_recall", shortest(r.cd_f.recall));
    kv("gt_surface_points", std::to_string(r.gt_surface_points));
    kv("pred_surface_points", std::to_string(r.pred_surface_points));
    kv("gt_shell_points", std::to_string(r.gt_shell_points));
    kv("pred_shell_points", std::to_string(r.pred_shell_points));
    kv("surface_seed", std::to_string(r.surface_seed));
    kv("shell_seed", std::to_string(r.shell_seed));
    return s;
}

}  // namespace ovox::io
