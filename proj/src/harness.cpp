#include "pspin/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "pspin/analytic.hpp"
#include "pspin/errors.hpp"
#include "pspin/hamiltonian.hpp"
#include "pspin/optimizer.hpp"
#include "pspin/rng.hpp"
#include "pspin/spectra.hpp"

namespace pspin {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

json interval_json(const Interval& iv) {
    json j;
    j["lo"] = std::isinf(iv.lo) ? json("-inf") : json(iv.lo);
    j["hi"] = std::isinf(iv.hi) ? json("inf") : json(iv.hi);
    return j;
}

Interval interval_from_json(const json& j) {
    Interval iv;
    const auto get = [](const json& v, double inf_sign) {
        if (v.is_string()) return inf_sign * std::numeric_limits<double>::infinity();
        return v.get<double>();
    };
    if (j.contains("lo")) iv.lo = get(j["lo"], -1.0);
    if (j.contains("hi")) iv.hi = get(j["hi"], 1.0);
    return iv;
}

json thresholds_json(const EInfThresholds& t) {
    json j;
    if (t.pure) j["e_inf_pure"] = *t.pure;
    j["e_inf_primed"] = t.primed;
    j["e_inf_mixed"] = t.mixed;
    return j;
}

json prediction_json(const PredictionSet& pred) {
    json j;
    j["class"] = to_string(pred.klass);
    j["pure"] = pred.pure;
    j["e0"] = pred.e0;
    if (pred.pure) j["z"] = pred.z;
    else j["y0"] = pred.y0;
    j["center"] = pred.center;
    j["radius"] = pred.radius;
    j["thresholds"] = thresholds_json(pred.thresholds);
    j["eq_residual"] = pred.eq_residual;
    j["stationarity_residual"] = pred.stationarity_residual;
    return j;
}

// Best-effort analytic prediction; returns nullopt for classes the solvers
// do not cover (full/critical mixtures, pure p = 2).
std::optional<PredictionSet> try_predict(const MixtureSpec& spec) {
    const DerivedMoments m = derive_moments(spec);
    if (spec.is_pure()) {
        if (spec.pure_degree() < 3) return std::nullopt;
        return solve_pure_ground_state(spec.pure_degree());
    }
    if (m.klass != MixtureClass::PureLike) return std::nullopt;
    return solve_mixed_ground_state(spec);
}

std::vector<double> bl_grid(double center, double radius) {
    std::vector<double> grid;
    for (double t = center - radius - 1.0; t <= center + radius + 1.0; t += 0.25)
        grid.push_back(t);
    return grid;
}

std::string spectrum_csv(const std::vector<double>& eigs) {
    std::string csv = "eigenvalue\n";
    for (double v : eigs) csv += fmt_double(v) + "\n";
    return csv;
}

// ---- experiments ------------------------------------------------------

struct ExperimentOutput {
    json results;
    json verdicts;  // name -> bool
    std::vector<std::pair<std::string, std::string>> files;  // (name, content)
};

ExperimentOutput run_predict(const RunConfig& cfg) {
    ExperimentOutput out;
    const MixtureSpec spec = cfg.spec();
    const DerivedMoments m = derive_moments(spec);
    json j;
    j["spec"] = json::parse(spec.to_json_text());
    j["moments"] = {{"xi1", m.xi1},   {"xip", m.xip},       {"xipp", m.xipp},
                    {"g_value", m.g_value}, {"class", to_string(m.klass)}, {"is_pure", m.is_pure}};
    j["thresholds"] = thresholds_json(e_inf_thresholds(spec));
    const auto pred = try_predict(spec);
    if (pred) {
        j["prediction"] = prediction_json(*pred);
        const double tol = pred->pure ? 1e-12 : 1e-8;
        out.verdicts["equation_residual"] = std::abs(pred->eq_residual) <= tol;
        if (!pred->pure) {
            out.verdicts["stationarity_residual"] = std::abs(pred->stationarity_residual) <= 1e-8;
            out.verdicts["y0_above_bulk_edge"] = pred->y0 > 2.0 * std::sqrt(m.xipp);
        } else {
            out.verdicts["edge_inequality"] = pred->center > pred->radius;
        }
        if (cfg.strip_eps > 0.0 && !pred->pure) {
            const StripReport strip = strip_check(spec, *pred, cfg.strip_eps);
            j["strip"] = {{"eps", strip.eps},       {"alpha", strip.alpha},
                          {"beta", strip.beta},     {"max_outside", strip.max_outside},
                          {"max_inside", strip.max_inside}, {"pass", strip.pass}};
            out.verdicts["strip_negativity"] = strip.pass;
        }
    } else {
        j["prediction"] = nullptr;
        j["note"] = "no ground-state solver for this class (needs pure p >= 3 or a pure-like mixture)";
    }
    out.results = j;
    out.files.emplace_back("prediction.json", j.dump(2) + "\n");
    return out;
}

ExperimentOutput run_classify(const RunConfig& cfg) {
    ExperimentOutput out;
    const MixtureSpec spec = cfg.spec();
    const DerivedMoments m = derive_moments(spec);
    json j;
    j["spec"] = json::parse(spec.to_json_text());
    j["xi1"] = m.xi1;
    j["xip"] = m.xip;
    j["xipp"] = m.xipp;
    j["g_value"] = m.g_value;
    j["class"] = to_string(m.klass);
    j["is_pure"] = m.is_pure;
    out.results = j;
    out.files.emplace_back("classification.json", j.dump(2) + "\n");
    return out;
}

ExperimentOutput run_complexity_curve(const RunConfig& cfg) {
    ExperimentOutput out;
    const bool pure_mode = cfg.p >= 3 || (cfg.has_spec() && cfg.spec().is_pure());
    if (pure_mode) {
        const int p = cfg.p >= 3 ? cfg.p : cfg.spec().pure_degree();
        const PredictionSet pred = solve_pure_ground_state(p);
        double lo = cfg.curve_range_set ? cfg.curve_lo : -1.2 * pred.center;
        double hi = cfg.curve_range_set ? cfg.curve_hi : 0.0;
        const int points = std::max(2, cfg.curve_points);
        std::vector<double> ys(points);
        for (int i = 0; i < points; ++i) ys[i] = lo + (hi - lo) * i / (points - 1);
        // include the predicted zero of the curve exactly
        if (-pred.center >= lo && -pred.center <= hi) ys.push_back(-pred.center);
        std::sort(ys.begin(), ys.end());
        std::string csv = "y,R\n";
        for (double y : ys) csv += fmt_double(y) + "," + fmt_double(complexity_R(p, y)) + "\n";
        out.files.emplace_back("complexity_curve.csv", csv);
        out.results = {{"p", p}, {"rows", static_cast<int>(ys.size())},
                       {"zero_at", -pred.center},
                       {"R_at_zero", complexity_R(p, -pred.center)}};
        out.verdicts["curve_zero_at_minus_center"] =
            std::abs(complexity_R(p, -pred.center)) <= 1e-8;
        return out;
    }
    const MixtureSpec spec = cfg.spec();
    double xlo = cfg.curve_x_lo, xhi = cfg.curve_x_hi;
    double ylo = cfg.curve_lo, yhi = cfg.curve_hi;
    if (!cfg.curve_range_set || !cfg.curve_x_range_set) {
        const auto pred = try_predict(spec);
        if (!pred)
            throw ConfigInvalid("complexity-curve on a non-pure-like mixture needs explicit "
                                "--x-min/--x-max/--y-min/--y-max ranges");
        if (!cfg.curve_x_range_set) {
            xlo = -pred->e0 - 0.25;
            xhi = -pred->e0 + 0.25;
        }
        if (!cfg.curve_range_set) {
            ylo = -pred->y0 - 3.0;
            yhi = -pred->y0 + 3.0;
        }
    }
    const int nx = std::max(2, cfg.curve_x_points), ny = std::max(2, cfg.curve_points);
    const DerivedMoments m = derive_moments(spec);
    std::string csv = "x,y,F\n";
    for (int i = 0; i < nx; ++i) {
        const double x = xlo + (xhi - xlo) * i / (nx - 1);
        for (int j = 0; j < ny; ++j) {
            const double y = ylo + (yhi - ylo) * j / (ny - 1);
            csv += fmt_double(x) + "," + fmt_double(y) + "," + fmt_double(f_xy(m, x, y)) + "\n";
        }
    }
    out.files.emplace_back("complexity_surface.csv", csv);
    out.results = {{"rows", nx * ny}};
    return out;
}

ExperimentOutput run_simulate(const RunConfig& cfg) {
    ExperimentOutput out;
    const MixtureSpec spec = cfg.spec();
    if (cfg.n < 2) throw ConfigInvalid("simulate needs --n >= 2");
    const DerivedMoments m = derive_moments(spec);

    const CouplingTensor tensor =
        sample_couplings(spec, cfg.n, derive_seed(cfg.seed, "disorder", 0));

    OptimizerConfig ocfg;
    ocfg.max_iters = cfg.max_iters;
    ocfg.grad_tol = cfg.grad_tol;
    ocfg.restarts = cfg.restarts;
    ocfg.seed = cfg.seed;
    ocfg.threads = resolve_threads(cfg.threads);
    ocfg.keep_trajectory = false;
    const MultiRestartResult res = multi_restart(tensor, ocfg);

    for (const auto& rec : res.all) {
        json rj;
        rj["restart_index"] = rec.restart_index;
        rj["converged"] = rec.converged;
        rj["iterations"] = rec.iterations;
        rj["energy_density"] = rec.energy_density;
        rj["radial_density"] = rec.radial_density;
        rj["grad_norm"] = rec.grad_norm;
        rj["point"] = std::vector<double>(rec.point.coords.data(),
                                          rec.point.coords.data() + rec.point.coords.size());
        rj["normalized_hessian_eigs"] = rec.normalized_hessian_eigs;
        char name[32];
        std::snprintf(name, sizeof(name), "restart_%03d.json", rec.restart_index);
        out.files.emplace_back(name, rj.dump(2) + "\n");
    }

    const CriticalPointRecord& best = res.best;
    const SpectralMeasure spectrum = normalized_hessian_spectrum(best);
    const SemicircleParams comparator = predicted_comparator(best, m);
    const double w1 = w1_distance(spectrum, comparator);
    const double bl = bl_lower_bound(spectrum, comparator,
                                     bl_grid(comparator.center, comparator.radius));

    json summary;
    summary["spec"] = json::parse(spec.to_json_text());
    summary["n"] = cfg.n;
    summary["restarts"] = cfg.restarts;
    summary["converged_count"] =
        static_cast<int>(std::count_if(res.all.begin(), res.all.end(),
                                       [](const auto& r) { return r.converged; }));
    summary["best_index"] = best.restart_index;
    summary["best_energy_density"] = best.energy_density;
    summary["best_radial_density"] = best.radial_density;
    summary["comparator"] = {{"center", comparator.center}, {"radius", comparator.radius}};
    summary["w1_distance"] = w1;
    summary["bl_lower_bound"] = bl;
    summary["lambda_min"] = spectrum.min();

    const auto pred = try_predict(spec);
    if (pred) {
        summary["prediction"] = prediction_json(*pred);
        const double erel = std::abs(best.energy_density + pred->e0) / pred->e0;
        summary["energy_rel_error"] = erel;
        if (cfg.checks) {
            out.verdicts["energy_within_tol"] = erel <= cfg.energy_rel_tol;
            out.verdicts["spectrum_w1"] = w1 <= cfg.w1_tol;
            out.verdicts["lambda_min_near_edge"] =
                std::abs(spectrum.min() - (comparator.center - comparator.radius)) <=
                cfg.lambda_min_tol;
        }
    }

    out.files.emplace_back("spectrum_best.csv", spectrum_csv(best.normalized_hessian_eigs));
    json sidecar;
    sidecar["comparator"] = {{"center", comparator.center}, {"radius", comparator.radius}};
    sidecar["w1_distance"] = w1;
    sidecar["bl_lower_bound"] = bl;
    sidecar["n"] = cfg.n;
    sidecar["restart_index"] = best.restart_index;
    out.files.emplace_back("spectrum_best.meta.json", sidecar.dump(2) + "\n");
    out.files.emplace_back("summary.json", summary.dump(2) + "\n");
    out.results = summary;

    if (cfg.dump_tensor) {
        // binary payload is written by run() alongside the text outputs
        out.results["tensor_file"] = "tensor.bin";
    }
    return out;
}

double analytic_sup_pure(int p, Interval energy, Interval radial) {
    Interval yreg = radial.intersect(energy.scaled(static_cast<double>(p)));
    if (yreg.empty()) throw EmptyRegion("empty window");
    yreg = yreg.intersect({-10.0 * p, 10.0 * p});
    double best = -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 20001;
    for (int i = 0; i < kGrid; ++i) {
        const double y = yreg.lo + (yreg.hi - yreg.lo) * i / (kGrid - 1);
        best = std::max(best, complexity_R(p, y));
    }
    return best;
}

double analytic_sup_mixed(const MixtureSpec& spec, Interval energy, Interval radial) {
    const DerivedMoments m = derive_moments(spec);
    Interval xr = energy.intersect({-5.0, 2.0});
    Interval yr = radial.intersect({-15.0 * std::sqrt(m.xipp), 15.0 * std::sqrt(m.xipp)});
    if (xr.empty() || yr.empty()) throw EmptyRegion("empty window");
    double best = -std::numeric_limits<double>::infinity();
    constexpr int kGrid = 601;
    for (int i = 0; i < kGrid; ++i) {
        const double x = xr.lo + (xr.hi - xr.lo) * i / (kGrid - 1);
        for (int j = 0; j < kGrid; ++j) {
            const double y = yr.lo + (yr.hi - yr.lo) * j / (kGrid - 1);
            best = std::max(best, f_xy(m, x, y));
        }
    }
    return best;
}

ExperimentOutput run_kacrice(const RunConfig& cfg) {
    ExperimentOutput out;
    const bool pure_mode = cfg.p >= 3 || (cfg.has_spec() && cfg.spec().is_pure());
    std::vector<int> ns = cfg.n_list;
    if (ns.empty()) ns = {20, 40, 60};
    const int threads = resolve_threads(cfg.threads);

    std::string csv = "n,normalized_log_count,std_error,analytic_sup\n";
    json rows = json::array();
    double final_gap = 0.0;
    for (int n : ns) {
        CrtEstimate est;
        double sup;
        if (pure_mode) {
            const int p = cfg.p >= 3 ? cfg.p : cfg.spec().pure_degree();
            est = mean_crt_pure(p, n, cfg.energy_window, cfg.radial_window, cfg.samples,
                                derive_seed(cfg.seed, "kacrice-n", n), threads);
            sup = analytic_sup_pure(p, cfg.energy_window, cfg.radial_window);
        } else {
            const MixtureSpec spec = cfg.spec();
            est = mean_crt_mixed(spec, n, cfg.energy_window, cfg.radial_window, cfg.samples,
                                 derive_seed(cfg.seed, "kacrice-n", n), threads);
            sup = analytic_sup_mixed(spec, cfg.energy_window, cfg.radial_window);
        }
        csv += std::to_string(n) + "," + fmt_double(est.normalized) + "," +
               fmt_double(est.std_error / n) + "," + fmt_double(sup) + "\n";
        rows.push_back({{"n", n},
                        {"normalized_log_count", est.normalized},
                        {"std_error", est.std_error / n},
                        {"analytic_sup", sup}});
        final_gap = std::abs(est.normalized - sup);
    }
    out.files.emplace_back("kacrice.csv", csv);
    out.results["rows"] = rows;
    out.results["energy_window"] = interval_json(cfg.energy_window);
    out.results["radial_window"] = interval_json(cfg.radial_window);
    if (cfg.checks) out.verdicts["normalized_count_near_sup"] = final_gap <= cfg.kacrice_tol;
    return out;
}

ExperimentOutput run_goe_check(const RunConfig& cfg) {
    ExperimentOutput out;
    const int n = cfg.n > 0 ? cfg.n : 1000;
    const Eigen::MatrixXd g = goe_sample(n, derive_seed(cfg.seed, "goe", 0));
    const SpectralMeasure spectrum = spectrum_of(g);
    const SemicircleParams sc = standard_semicircle();
    const double w1 = w1_distance(spectrum, sc);
    const double bl = bl_lower_bound(spectrum, sc, bl_grid(0.0, 2.0));

    double lmin_sum = 0.0;
    for (int d = 0; d < cfg.goe_draws; ++d) {
        const Eigen::MatrixXd small =
            goe_sample(cfg.goe_small_n, derive_seed(cfg.seed, "goe-lmin", d));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(small, Eigen::EigenvaluesOnly);
        lmin_sum += solver.eigenvalues()(0);
    }
    const double lmin_mean = lmin_sum / cfg.goe_draws;

    json j;
    j["n"] = n;
    j["w1_distance"] = w1;
    j["bl_lower_bound"] = bl;
    j["lambda_min_mean"] = lmin_mean;
    j["lambda_min_n"] = cfg.goe_small_n;
    j["lambda_min_draws"] = cfg.goe_draws;
    out.results = j;
    out.files.emplace_back("goe_spectrum.csv", spectrum_csv(spectrum.eigs));
    json sidecar;
    sidecar["comparator"] = {{"center", 0.0}, {"radius", 2.0}};
    sidecar["w1_distance"] = w1;
    sidecar["bl_lower_bound"] = bl;
    out.files.emplace_back("goe_spectrum.meta.json", sidecar.dump(2) + "\n");
    if (cfg.checks) {
        out.verdicts["goe_w1"] = w1 <= cfg.goe_w1_tol;
        out.verdicts["goe_lambda_min"] = std::abs(lmin_mean + 2.0) <= 0.15;
    }
    return out;
}

}  // namespace

MixtureSpec RunConfig::spec() const {
    if (spec_text.empty()) {
        if (p >= 2) return MixtureSpec::pure(p);
        throw ConfigInvalid("experiment '" + experiment + "' needs --spec or --p");
    }
    if (!spec_text.empty() && spec_text.front() == '{') return MixtureSpec::from_json_text(spec_text);
    return MixtureSpec::parse(spec_text);
}

json RunConfig::to_json() const {
    json j;
    j["experiment"] = experiment;
    if (!spec_text.empty()) j["spec"] = spec_text;
    if (p) j["p"] = p;
    j["seed"] = seed;
    if (n) j["n"] = n;
    j["restarts"] = restarts;
    j["grad_tol"] = grad_tol;
    j["max_iters"] = max_iters;
    j["threads"] = threads;
    j["emit_plots"] = emit_plots;
    j["checks"] = checks;
    if (dump_tensor) j["dump_tensor"] = true;
    if (curve_range_set) j["curve"] = {{"lo", curve_lo}, {"hi", curve_hi}, {"points", curve_points}};
    if (curve_x_range_set)
        j["curve_x"] = {{"lo", curve_x_lo}, {"hi", curve_x_hi}, {"points", curve_x_points}};
    if (!n_list.empty()) j["n_list"] = n_list;
    j["energy_window"] = interval_json(energy_window);
    j["radial_window"] = interval_json(radial_window);
    j["samples"] = samples;
    j["goe_draws"] = goe_draws;
    j["goe_small_n"] = goe_small_n;
    if (strip_eps > 0) j["strip_eps"] = strip_eps;
    j["tolerances"] = {{"w1", w1_tol},
                       {"goe_w1", goe_w1_tol},
                       {"lambda_min", lambda_min_tol},
                       {"energy_rel", energy_rel_tol},
                       {"kacrice", kacrice_tol}};
    return j;
}

RunConfig RunConfig::from_json(const json& j) {
    RunConfig cfg;
    if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
    if (!j.contains("experiment")) throw ConfigInvalid("config is missing 'experiment'");
    cfg.experiment = j["experiment"].get<std::string>();
    if (j.contains("spec")) {
        const auto& s = j["spec"];
        cfg.spec_text = s.is_string() ? s.get<std::string>() : s.dump();
    }
    const auto opt_int = [&](const char* key, int& dst) {
        if (j.contains(key)) dst = j[key].get<int>();
    };
    const auto opt_double = [&](const char* key, double& dst) {
        if (j.contains(key)) dst = j[key].get<double>();
    };
    opt_int("p", cfg.p);
    opt_int("n", cfg.n);
    opt_int("restarts", cfg.restarts);
    opt_int("max_iters", cfg.max_iters);
    opt_int("threads", cfg.threads);
    opt_int("samples", cfg.samples);
    opt_int("goe_draws", cfg.goe_draws);
    opt_int("goe_small_n", cfg.goe_small_n);
    opt_double("grad_tol", cfg.grad_tol);
    opt_double("strip_eps", cfg.strip_eps);
    if (j.contains("seed")) {
        cfg.seed = j["seed"].get<std::uint64_t>();
        cfg.seed_given = true;
    }
    if (j.contains("emit_plots")) cfg.emit_plots = j["emit_plots"].get<bool>();
    if (j.contains("checks")) cfg.checks = j["checks"].get<bool>();
    if (j.contains("dump_tensor")) cfg.dump_tensor = j["dump_tensor"].get<bool>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("n_list")) cfg.n_list = j["n_list"].get<std::vector<int>>();
    if (j.contains("energy_window")) cfg.energy_window = interval_from_json(j["energy_window"]);
    if (j.contains("radial_window")) cfg.radial_window = interval_from_json(j["radial_window"]);
    if (j.contains("curve")) {
        cfg.curve_lo = j["curve"]["lo"].get<double>();
        cfg.curve_hi = j["curve"]["hi"].get<double>();
        if (j["curve"].contains("points")) cfg.curve_points = j["curve"]["points"].get<int>();
        cfg.curve_range_set = true;
    }
    if (j.contains("curve_x")) {
        cfg.curve_x_lo = j["curve_x"]["lo"].get<double>();
        cfg.curve_x_hi = j["curve_x"]["hi"].get<double>();
        if (j["curve_x"].contains("points"))
            cfg.curve_x_points = j["curve_x"]["points"].get<int>();
        cfg.curve_x_range_set = true;
    }
    if (j.contains("tolerances")) {
        const auto& t = j["tolerances"];
        if (t.contains("w1")) cfg.w1_tol = t["w1"].get<double>();
        if (t.contains("goe_w1")) cfg.goe_w1_tol = t["goe_w1"].get<double>();
        if (t.contains("lambda_min")) cfg.lambda_min_tol = t["lambda_min"].get<double>();
        if (t.contains("energy_rel")) cfg.energy_rel_tol = t["energy_rel"].get<double>();
        if (t.contains("kacrice")) cfg.kacrice_tol = t["kacrice"].get<double>();
    }
    return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigInvalid("cannot open config file " + path);
    json j;
    in >> j;
    return from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
    const std::uint64_t h = fnv1a64(cfg.to_json().dump());
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunReport run(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    if (!cfg.seed_given) {
        std::random_device rd;
        cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
        cfg.seed_given = true;
    }

    const auto t0 = std::chrono::steady_clock::now();
    ExperimentOutput out;
    if (cfg.experiment == "predict") out = run_predict(cfg);
    else if (cfg.experiment == "classify") out = run_classify(cfg);
    else if (cfg.experiment == "complexity-curve") out = run_complexity_curve(cfg);
    else if (cfg.experiment == "simulate") out = run_simulate(cfg);
    else if (cfg.experiment == "kacrice") out = run_kacrice(cfg);
    else if (cfg.experiment == "goe-check") out = run_goe_check(cfg);
    else throw ConfigInvalid("unknown experiment '" + cfg.experiment + "'");
    const auto t1 = std::chrono::steady_clock::now();

    const std::string hash = config_hash(cfg);
    std::string root = cfg.out_dir;
    if (root.empty()) {
        const char* env = std::getenv(kOutputRootEnv);
        root = env ? env : "runs";
    }
    const fs::path dir = fs::path(root) / (cfg.experiment + "-" + hash.substr(0, 8));
    fs::create_directories(dir);

    RunReport report;
    report.run_dir = dir.string();
    for (const auto& [name, content] : out.files) {
        const fs::path path = dir / (hash.substr(0, 8) + "-" + name);
        write_text(path, content);
    }
    if (cfg.dump_tensor && cfg.experiment == "simulate") {
        const CouplingTensor tensor =
            sample_couplings(cfg.spec(), cfg.n, derive_seed(cfg.seed, "disorder", 0));
        save_tensor(tensor, (dir / (hash.substr(0, 8) + "-tensor.bin")).string());
    }

    bool all_pass = true;
    for (const auto& [name, pass] : out.verdicts.items()) {
        (void)name;
        if (!pass.get<bool>()) all_pass = false;
    }

    json body;
    body["schema_version"] = kReportSchemaVersion;
    body["artifact_version"] = kArtifactVersion;
    body["config"] = cfg.to_json();
    body["config_hash"] = hash;
    body["results"] = out.results;
    body["verdicts"] = out.verdicts;
    body["all_checks_passed"] = all_pass;
    body["run_dir"] = report.run_dir;
    body["timings"] = {
        {"total_seconds", std::chrono::duration<double>(t1 - t0).count()}};

    report.body = body;
    report.all_checks_passed = all_pass;
    report.report_path = (dir / (hash.substr(0, 8) + "-report.json")).string();
    // raw outputs above are reproducible; timings live only in this file
    write_text(report.report_path, body.dump(2) + "\n");

    if (cfg.emit_plots) emit_plot_data(report);
    return report;
}

void emit_plot_data(const RunReport& report) {
    const json& body = report.body;
    const std::string experiment = body["config"]["experiment"].get<std::string>();
    const std::string hash8 = body["config_hash"].get<std::string>().substr(0, 8);
    const fs::path dir = body["run_dir"].get<std::string>();

    const auto histogram = [&](const std::string& csv_name, const SemicircleParams& sc) {
        std::ifstream in(dir / (hash8 + "-" + csv_name));
        if (!in) return;
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> eigs;
        while (std::getline(in, line))
            if (!line.empty()) eigs.push_back(std::stod(line));
        if (eigs.empty()) return;
        const double lo = std::min(*std::min_element(eigs.begin(), eigs.end()),
                                   sc.center - sc.radius);
        const double hi = std::max(*std::max_element(eigs.begin(), eigs.end()),
                                   sc.center + sc.radius);
        constexpr int kBins = 40;
        std::vector<int> counts(kBins, 0);
        for (double v : eigs) {
            int b = static_cast<int>((v - lo) / (hi - lo) * kBins);
            b = std::clamp(b, 0, kBins - 1);
            ++counts[b];
        }
        std::string csv = "bin_lo,bin_hi,count\n";
        for (int b = 0; b < kBins; ++b)
            csv += fmt_double(lo + (hi - lo) * b / kBins) + "," +
                   fmt_double(lo + (hi - lo) * (b + 1) / kBins) + "," +
                   std::to_string(counts[b]) + "\n";
        write_text(dir / (hash8 + "-spectrum_hist.csv"), csv);

        // cosine-spaced density samples keep the trapezoid mass exact at the
        // square-root edges
        constexpr int kOverlay = 4096;
        std::string overlay = "x,density\n";
        for (int i = 0; i <= kOverlay; ++i) {
            const double theta = 3.14159265358979323846 * i / kOverlay;
            const double x = sc.center - sc.radius * std::cos(theta);
            overlay += fmt_double(x) + "," + fmt_double(semicircle_density(sc, x)) + "\n";
        }
        write_text(dir / (hash8 + "-semicircle_overlay.csv"), overlay);
    };

    if (experiment == "simulate") {
        const auto& comp = body["results"]["comparator"];
        histogram("spectrum_best.csv",
                  {comp["center"].get<double>(), comp["radius"].get<double>()});
    } else if (experiment == "goe-check") {
        histogram("goe_spectrum.csv", standard_semicircle());
    }
    // complexity curves and kacrice tables are already emitted as plot-ready CSV
}

}  // namespace pspin
