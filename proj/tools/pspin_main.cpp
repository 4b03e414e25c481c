#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pspin/harness.hpp"

namespace {

using pspin::Interval;
using pspin::RunConfig;

void add_common(CLI::App* sub, RunConfig& cfg, std::string& config_path, std::uint64_t& seed) {
    sub->add_option("--config", config_path, "JSON config file (flags override its fields)");
    sub->add_option("--seed", seed, "master seed (default: drawn once and recorded)");
    sub->add_option("--out", cfg.out_dir, "output root (default: $PSPIN_OUT_ROOT or ./runs)");
    sub->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
    sub->add_flag("--quiet", cfg.quiet, "suppress the report summary on stdout");
    sub->add_flag("--emit-plots", cfg.emit_plots, "also write plot-ready CSV files");
    sub->add_flag("--no-checks,!--checks", cfg.checks, "disable built-in pass/fail verdicts");
}

int finish(const RunConfig& cfg_in, const std::string& config_path, bool seed_set,
           std::uint64_t seed) {
    RunConfig cfg = cfg_in;
    if (!config_path.empty()) {
        RunConfig file_cfg = RunConfig::from_json_file(config_path);
        // file provides defaults; explicit flags already live in cfg_in
        file_cfg.experiment = cfg.experiment.empty() ? file_cfg.experiment : cfg.experiment;
        if (!cfg.spec_text.empty()) file_cfg.spec_text = cfg.spec_text;
        if (cfg.p) file_cfg.p = cfg.p;
        if (cfg.n) file_cfg.n = cfg.n;
        if (!cfg.out_dir.empty()) file_cfg.out_dir = cfg.out_dir;
        cfg = file_cfg;
    }
    if (seed_set) {
        cfg.seed = seed;
        cfg.seed_given = true;
    }
    try {
        const pspin::RunReport report = pspin::run(cfg);
        if (!cfg.quiet) {
            std::cout << "report: " << report.report_path << "\n";
            std::cout << "verdicts: " << report.body["verdicts"].dump() << "\n";
        }
        return report.all_checks_passed ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spherical mixed p-spin landscape toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    double e_lo = 0, e_hi = 0, r_lo = 0, r_hi = 0;
    bool e_lo_set = false, e_hi_set = false, r_lo_set = false, r_hi_set = false;

    auto* predict = app.add_subcommand("predict", "analytic ground-state / spectrum predictions");
    predict->add_option("--spec", cfg.spec_text, "mixture as p:val,p:val or JSON (squared coefficients)");
    predict->add_option("--p", cfg.p, "pure model degree");
    predict->add_option("--strip-eps", cfg.strip_eps, "also run the strip negativity scan at this eps");
    add_common(predict, cfg, config_path, seed);

    auto* classify = app.add_subcommand("classify", "mixture classification and moments");
    classify->add_option("--spec", cfg.spec_text, "mixture spec");
    classify->add_option("--p", cfg.p, "pure model degree");
    add_common(classify, cfg, config_path, seed);

    auto* curve = app.add_subcommand("complexity-curve", "complexity function on a grid (CSV)");
    curve->add_option("--spec", cfg.spec_text, "mixture spec");
    curve->add_option("--p", cfg.p, "pure model degree");
    auto* ylo = curve->add_option("--y-min", cfg.curve_lo, "lower y/radial bound");
    auto* yhi = curve->add_option("--y-max", cfg.curve_hi, "upper y/radial bound");
    curve->add_option("--points", cfg.curve_points, "grid points per axis");
    auto* xlo = curve->add_option("--x-min", cfg.curve_x_lo, "lower energy bound (mixed surface)");
    auto* xhi = curve->add_option("--x-max", cfg.curve_x_hi, "upper energy bound (mixed surface)");
    curve->add_option("--x-points", cfg.curve_x_points, "energy grid points (mixed surface)");
    add_common(curve, cfg, config_path, seed);

    auto* simulate = app.add_subcommand("simulate", "disorder sample + multi-restart descent");
    simulate->add_option("--spec", cfg.spec_text, "mixture spec");
    simulate->add_option("--p", cfg.p, "pure model degree");
    simulate->add_option("--n", cfg.n, "ambient dimension")->required();
    simulate->add_option("--restarts", cfg.restarts, "number of restarts");
    simulate->add_option("--grad-tol", cfg.grad_tol, "gradient density stopping tolerance");
    simulate->add_option("--max-iters", cfg.max_iters, "iteration cap per restart");
    simulate->add_flag("--dump-tensor", cfg.dump_tensor, "also dump the coupling tensor (binary)");
    add_common(simulate, cfg, config_path, seed);

    auto* kacrice = app.add_subcommand("kacrice", "finite-n mean critical-point counts");
    kacrice->add_option("--spec", cfg.spec_text, "mixture spec");
    kacrice->add_option("--p", cfg.p, "pure model degree");
    kacrice->add_option("--n-list", cfg.n_list, "dimensions to evaluate")->delimiter(',');
    auto* elo = kacrice->add_option("--energy-min", e_lo, "energy window lower bound");
    auto* ehi = kacrice->add_option("--energy-max", e_hi, "energy window upper bound");
    auto* rlo = kacrice->add_option("--radial-min", r_lo, "radial window lower bound");
    auto* rhi = kacrice->add_option("--radial-max", r_hi, "radial window upper bound");
    kacrice->add_option("--samples", cfg.samples, "Monte-Carlo samples per quadrature node");
    add_common(kacrice, cfg, config_path, seed);

    auto* goe = app.add_subcommand("goe-check", "GOE spectrum vs the semicircle law");
    goe->add_option("--n", cfg.n, "matrix size for the W1 check (default 1000)");
    goe->add_option("--draws", cfg.goe_draws, "draws for the smallest-eigenvalue average");
    goe->add_option("--small-n", cfg.goe_small_n, "matrix size for the smallest-eigenvalue average");
    add_common(goe, cfg, config_path, seed);

    CLI11_PARSE(app, argc, argv);

    cfg.experiment = app.get_subcommands().front()->get_name();
    seed_set = app.get_subcommands().front()->count("--seed") > 0;
    cfg.curve_range_set = ylo->count() > 0 && yhi->count() > 0;
    cfg.curve_x_range_set = xlo->count() > 0 && xhi->count() > 0;
    e_lo_set = elo->count() > 0;
    e_hi_set = ehi->count() > 0;
    r_lo_set = rlo->count() > 0;
    r_hi_set = rhi->count() > 0;
    if (e_lo_set) cfg.energy_window.lo = e_lo;
    if (e_hi_set) cfg.energy_window.hi = e_hi;
    if (r_lo_set) cfg.radial_window.lo = r_lo;
    if (r_hi_set) cfg.radial_window.hi = r_hi;

    return finish(cfg, config_path, seed_set, seed);
}
