#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pspin/kacrice.hpp"
#include "pspin/mixture.hpp"

namespace pspin {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kOutputRootEnv = "PSPIN_OUT_ROOT";

// One experiment invocation. Field applicability depends on `experiment`;
// validation happens in run().
struct RunConfig {
    std::string experiment;  // predict | classify | complexity-curve | simulate | kacrice | goe-check
    std::string spec_text;   // "p:val,p:val" or a JSON object {"gamma3": ...}
    int p = 0;               // pure-degree shortcut where a full spec is overkill

    std::uint64_t seed = 0;
    bool seed_given = false;  // unset: drawn from the system and persisted
    int n = 0;
    int restarts = 50;
    double grad_tol = 1e-8;
    int max_iters = 5000;
    int threads = 0;  // <= 0: hardware concurrency
    std::string out_dir;
    bool emit_plots = false;
    bool quiet = false;
    bool checks = true;
    bool dump_tensor = false;

    // complexity-curve
    double curve_lo = 0.0, curve_hi = 0.0;
    int curve_points = 201;
    bool curve_range_set = false;
    double curve_x_lo = 0.0, curve_x_hi = 0.0;
    int curve_x_points = 41;
    bool curve_x_range_set = false;

    // kacrice
    std::vector<int> n_list;
    Interval energy_window = Interval::all();
    Interval radial_window = Interval::all();
    int samples = 400;

    // goe-check
    int goe_draws = 20;
    int goe_small_n = 500;

    // strip check (runs as part of predict when eps > 0)
    double strip_eps = 0.0;

    // built-in verdict tolerances
    double w1_tol = 0.15;
    double goe_w1_tol = 0.05;
    double lambda_min_tol = 0.3;
    double energy_rel_tol = 0.05;
    double kacrice_tol = 0.15;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_json_file(const std::string& path);
    nlohmann::json to_json() const;

    bool has_spec() const { return !spec_text.empty(); }
    MixtureSpec spec() const;  // parses spec_text (JSON object or p:val list)
};

struct RunReport {
    nlohmann::json body;
    bool all_checks_passed = true;
    std::string run_dir;
    std::string report_path;
};

// Executes the configured experiment, persists raw outputs plus the report
// JSON under a content-addressed directory, and evaluates the enabled
// verdicts. Raw outputs are byte-reproducible for a fixed (config, seed);
// wall-clock timings live only in the report.
RunReport run(const RunConfig& cfg);

// Plot-ready CSV emission for an existing report (also triggered by
// emit_plots during run()).
void emit_plot_data(const RunReport& report);

std::string config_hash(const RunConfig& cfg);

}  // namespace pspin
