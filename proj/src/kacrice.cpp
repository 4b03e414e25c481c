#include "pspin/kacrice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pspin/analytic.hpp"
#include "pspin/errors.hpp"
#include "pspin/rng.hpp"
#include "pspin/spectra.hpp"

namespace pspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

double log_erfc(double u) {
    if (u < 25.0) return std::log(std::erfc(u));
    // asymptotic tail; erfc underflows past ~26.6
    return -u * u + std::log(1.0 / (u * std::sqrt(kPi))) + std::log1p(-0.5 / (u * u));
}

// log of the standard normal mass of (a, b), infinite endpoints allowed.
double log_normal_mass(double a, double b) {
    if (!(a < b)) return -std::numeric_limits<double>::infinity();
    const double ra = a / std::sqrt(2.0), rb = b / std::sqrt(2.0);
    if (a >= 0.0) {
        const double l1 = log_erfc(ra), l2 = std::isinf(b) ? -std::numeric_limits<double>::infinity()
                                                           : log_erfc(rb);
        return std::log(0.5) + l1 + std::log1p(-std::exp(l2 - l1));
    }
    if (b <= 0.0) return log_normal_mass(-b, -a);
    // interval spans zero: no cancellation in erf difference
    const double ea = std::isinf(a) ? -1.0 : std::erf(ra);
    const double eb = std::isinf(b) ? 1.0 : std::erf(rb);
    return std::log(0.5 * (eb - ea));
}

struct LogSum {
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs;
    std::vector<double> ses;  // per-term std error on the log scale

    void add(double lg, double se) {
        logs.push_back(lg);
        ses.push_back(se);
        max_log = std::max(max_log, lg);
    }
    // (log sum, propagated std error)
    std::pair<double, double> value() const {
        if (logs.empty() || std::isinf(max_log))
            return {-std::numeric_limits<double>::infinity(), 0.0};
        double total = 0.0;
        for (double lg : logs) total += std::exp(lg - max_log);
        double var = 0.0;
        for (std::size_t i = 0; i < logs.size(); ++i) {
            const double w = std::exp(logs[i] - max_log) / total;
            var += w * w * ses[i] * ses[i];
        }
        return {max_log + std::log(total), std::sqrt(var)};
    }
};

// Simpson weights on an odd node count.
std::vector<double> simpson_weights(int nodes, double h) {
    std::vector<double> w(nodes, h / 3.0);
    for (int i = 1; i + 1 < nodes; ++i) w[i] *= (i % 2 == 1) ? 4.0 : 2.0;
    return w;
}

// Coarse scan of a log-envelope; returns the subinterval within `margin`
// nats of the maximum (truncation window for the quadrature).
template <typename F>
Interval envelope_window(F&& env, double lo, double hi, double margin) {
    constexpr int kScan = 4001;
    const double h = (hi - lo) / (kScan - 1);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<double> vals(kScan);
    for (int i = 0; i < kScan; ++i) {
        vals[i] = env(lo + i * h);
        best = std::max(best, vals[i]);
    }
    int first = kScan, last = -1;
    for (int i = 0; i < kScan; ++i) {
        if (vals[i] >= best - margin) {
            first = std::min(first, i);
            last = std::max(last, i);
        }
    }
    if (last < 0) throw EmptyRegion("integrand vanished on the whole region");
    first = std::max(0, first - 1);
    last = std::min(kScan - 1, last + 1);
    return {lo + first * h, lo + last * h};
}

// Odd Simpson node count, mildly adapted to the window width.
int node_count(double width) {
    int nodes = static_cast<int>(std::ceil(width / 0.02)) + 1;
    nodes = std::clamp(nodes, 33, 97);
    return (nodes % 2 == 0) ? nodes + 1 : nodes;
}

}  // namespace

Interval Interval::scaled(double factor) const { return {lo * factor, hi * factor}; }

double log_prefactor_pure(int p, int n) {
    if (p < 3) throw SpecInvalid("log_prefactor_pure requires p >= 3");
    if (n < 3) throw SpecInvalid("log_prefactor_pure requires n >= 3");
    return 0.5 * std::log(static_cast<double>(n)) + 0.5 * (n - 1) * std::log(n - 1.0) +
           0.5 * (n - 1) * std::log(p - 1.0) - 0.5 * (n - 2) * std::log(2.0) -
           std::log(static_cast<double>(p)) - std::lgamma(0.5 * n);
}

double log_prefactor_mixed(const MixtureSpec& spec, int n) {
    if (n < 3) throw SpecInvalid("log_prefactor_mixed requires n >= 3");
    const SigmaMatrix sigma = sigma_matrix(spec);
    if (sigma.det <= 0.0) throw DegenerateSigma("nonpositive det Sigma in the mixed prefactor");
    const DerivedMoments m = derive_moments(spec);
    return 0.5 * std::log(static_cast<double>(n)) +
           0.5 * (n - 1) *
               (std::log(n - 1.0) + std::log(m.xipp) - std::log(2.0) - std::log(m.xip)) -
           std::lgamma(0.5 * n) - 0.5 * std::log(kPi * sigma.det);
}

DetMomentEstimate det_moment_mc(int n, double shift, int samples, std::uint64_t seed) {
    if (n < 1) throw SpecInvalid("det_moment_mc requires n >= 1");
    if (samples < 2) throw SpecInvalid("det_moment_mc requires samples >= 2");
    std::vector<double> logdets(samples);
    for (int s = 0; s < samples; ++s) {
        const Eigen::MatrixXd g = goe_sample(n, derive_seed(seed, "det-sample", s));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g, Eigen::EigenvaluesOnly);
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += std::log(std::abs(solver.eigenvalues()(i) - shift));
        logdets[s] = acc;
    }
    DetMomentEstimate est;
    est.n = n;
    est.shift = shift;
    est.samples = samples;
    const auto reduce = [&](double scale, double& moment, double& se, double& log_moment) {
        double mx = -std::numeric_limits<double>::infinity();
        for (double ld : logdets) mx = std::max(mx, scale * ld);
        double sum = 0.0, sum2 = 0.0;
        for (double ld : logdets) {
            const double a = std::exp(scale * ld - mx);
            sum += a;
            sum2 += a * a;
        }
        const double mean = sum / samples;
        const double var = std::max(0.0, sum2 / samples - mean * mean);
        moment = std::exp(mx) * mean;
        se = std::exp(mx) * std::sqrt(var / samples);
        log_moment = mx + std::log(mean);
    };
    reduce(1.0, est.first_moment, est.first_std_error, est.log_first_moment);
    reduce(2.0, est.second_moment, est.second_std_error, est.log_second_moment);
    return est;
}

CrtEstimate mean_crt_pure(int p, int n, Interval energy, Interval radial, int samples,
                          std::uint64_t seed, int threads) {
    if (p < 3) throw SpecInvalid("mean_crt_pure requires p >= 3");
    const double pd = p;
    // radial identity: energy = y / p, so both windows constrain y
    Interval yreg = radial.intersect(energy.scaled(pd));
    if (yreg.empty()) throw EmptyRegion("energy and radial windows are incompatible");
    const double span = 10.0 * pd;  // Gaussian weight is dead beyond |y| ~ p * 10
    yreg = yreg.intersect({-span, span});
    if (yreg.empty()) throw EmptyRegion("window lies outside the numerical support");

    const double scale = std::sqrt(static_cast<double>(n)) / std::sqrt((n - 1.0) * pd * (pd - 1.0));
    const auto envelope = [&](double y) {
        return -n * y * y / (2.0 * pd * pd) + (n - 1.0) * psi_star(scale * y);
    };
    const Interval window = envelope_window(envelope, yreg.lo, yreg.hi, 60.0);

    const int nodes = node_count(window.hi - window.lo);
    const double h = (window.hi - window.lo) / (nodes - 1);
    const auto weights = simpson_weights(nodes, h);

    std::vector<double> logs(nodes), ses(nodes);
    parallel_for(nodes, threads, [&](int i) {
        const double y = window.lo + i * h;
        const DetMomentEstimate det =
            det_moment_mc(n - 1, scale * y, samples, derive_seed(seed, "kacrice-node", i));
        logs[i] = -n * y * y / (2.0 * pd * pd) + det.log_first_moment;
        ses[i] = det.first_std_error / det.first_moment;
    });
    LogSum sum;
    for (int i = 0; i < nodes; ++i) sum.add(std::log(weights[i]) + logs[i], ses[i]);
    const auto [log_integral, se] = sum.value();

    CrtEstimate est;
    est.n = n;
    est.energy_window = energy;
    est.radial_window = radial;
    est.mc_samples = samples;
    est.log_mean_count = log_prefactor_pure(p, n) + log_integral;
    est.normalized = est.log_mean_count / n;
    est.std_error = se;
    return est;
}

namespace {

// Inverse-covariance split of the Gaussian weight for the mixed integral:
// quadratic = A (x - b y)^2 + c y^2.
struct XSection {
    double a, b, c;
};

XSection x_section(const SigmaMatrix& sigma) {
    const Eigen::Matrix2d inv = sigma.matrix().inverse();
    XSection s;
    s.a = inv(0, 0);
    s.b = -inv(0, 1) / inv(0, 0);
    s.c = inv(1, 1) - inv(0, 1) * inv(0, 1) / inv(0, 0);
    return s;
}

// log of int_{B} exp(-n/2 [A(x-by)^2 + c y^2]) dx at fixed y.
double log_x_mass(const XSection& s, int n, const Interval& energy, double y) {
    const double sd = 1.0 / std::sqrt(n * s.a);
    const double lo = std::isinf(energy.lo) ? energy.lo : (energy.lo - s.b * y) / sd;
    const double hi = std::isinf(energy.hi) ? energy.hi : (energy.hi - s.b * y) / sd;
    return -0.5 * n * s.c * y * y + 0.5 * std::log(2.0 * kPi / (n * s.a)) +
           log_normal_mass(lo, hi);
}

}  // namespace

CrtEstimate mean_crt_mixed(const MixtureSpec& spec, int n, Interval energy, Interval radial,
                           int samples, std::uint64_t seed, int threads) {
    if (energy.empty() || radial.empty()) throw EmptyRegion("empty window");
    const SigmaMatrix sigma = sigma_matrix(spec);
    if (sigma.det <= 1e-14) throw DegenerateSigma("mean_crt_mixed needs det Sigma > 0");
    const DerivedMoments m = derive_moments(spec);
    const XSection xs = x_section(sigma);

    const double span = 12.0 * std::sqrt(sigma.m22);
    Interval yreg = radial.intersect({-span, span});
    if (yreg.empty()) throw EmptyRegion("radial window lies outside the numerical support");

    const double scale = std::sqrt(static_cast<double>(n)) / std::sqrt((n - 1.0) * m.xipp);
    const auto envelope = [&](double y) {
        return log_x_mass(xs, n, energy, y) + (n - 1.0) * psi_star(scale * y);
    };
    const Interval window = envelope_window(envelope, yreg.lo, yreg.hi, 60.0);

    const int nodes = node_count(window.hi - window.lo);
    const double h = (window.hi - window.lo) / (nodes - 1);
    const auto weights = simpson_weights(nodes, h);

    std::vector<double> logs(nodes), ses(nodes);
    parallel_for(nodes, threads, [&](int i) {
        const double y = window.lo + i * h;
        const DetMomentEstimate det =
            det_moment_mc(n - 1, scale * y, samples, derive_seed(seed, "kacrice-node", i));
        logs[i] = log_x_mass(xs, n, energy, y) + det.log_first_moment;
        ses[i] = det.first_std_error / det.first_moment;
    });
    LogSum sum;
    for (int i = 0; i < nodes; ++i) sum.add(std::log(weights[i]) + logs[i], ses[i]);
    const auto [log_integral, se] = sum.value();

    CrtEstimate est;
    est.n = n;
    est.energy_window = energy;
    est.radial_window = radial;
    est.mc_samples = samples;
    est.log_mean_count = log_prefactor_mixed(spec, n) + log_integral;
    est.normalized = est.log_mean_count / n;
    est.std_error = se;
    return est;
}

double log_gaussian_mass_mixed(const MixtureSpec& spec, int n, Interval energy, Interval radial) {
    if (energy.empty() || radial.empty()) throw EmptyRegion("empty window");
    const SigmaMatrix sigma = sigma_matrix(spec);
    if (sigma.det <= 1e-14) throw DegenerateSigma("log_gaussian_mass_mixed needs det Sigma > 0");
    const XSection xs = x_section(sigma);

    const double span = 12.0 * std::sqrt(sigma.m22);
    Interval yreg = radial.intersect({-span, span});
    if (yreg.empty()) throw EmptyRegion("radial window lies outside the numerical support");
    const auto envelope = [&](double y) { return log_x_mass(xs, n, energy, y); };
    const Interval window = envelope_window(envelope, yreg.lo, yreg.hi, 60.0);

    const int nodes = 801;  // pure quadrature, no MC: dense nodes are cheap
    const double h = (window.hi - window.lo) / (nodes - 1);
    const auto weights = simpson_weights(nodes, h);
    LogSum sum;
    for (int i = 0; i < nodes; ++i)
        sum.add(std::log(weights[i]) + envelope(window.lo + i * h), 0.0);
    return log_prefactor_mixed(spec, n) + sum.value().first;
}

}  // namespace pspin
