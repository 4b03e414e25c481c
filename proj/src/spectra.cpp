#include "pspin/spectra.hpp"

#include <algorithm>
#include <cmath>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double u) { return std::min(1.0, std::max(-1.0, u)); }

// Integral of the test function f against an empirical measure.
template <typename F>
double integrate_empirical(const SpectralMeasure& mu, F&& f) {
    double acc = 0.0;
    for (double t : mu.eigs) acc += f(t);
    return acc / static_cast<double>(mu.eigs.size());
}

// Integral of clamp(x - t, -1, 1) against a semicircle law.
double ramp_against_semicircle(const SemicircleParams& p, double t) {
    const double flo = semicircle_cdf(p, t - 1.0);
    const double fhi = semicircle_cdf(p, t + 1.0);
    const double mid = semicircle_partial_mean(p, t - 1.0, t + 1.0) - t * (fhi - flo);
    return -flo + mid + (1.0 - fhi);
}

// Integral of max(0, 1 - |x - t|) against a semicircle law.
double tent_against_semicircle(const SemicircleParams& p, double t) {
    const double f0 = semicircle_cdf(p, t - 1.0);
    const double f1 = semicircle_cdf(p, t);
    const double f2 = semicircle_cdf(p, t + 1.0);
    const double left = semicircle_partial_mean(p, t - 1.0, t) - (t - 1.0) * (f1 - f0);
    const double right = (t + 1.0) * (f2 - f1) - semicircle_partial_mean(p, t, t + 1.0);
    return left + right;
}

double ramp(double x, double t) { return clamp_unit(x - t); }
double tent(double x, double t) { return std::max(0.0, 1.0 - std::abs(x - t)); }

// |integral of q - F_sc| over [a, b] where the empirical CDF is constant q.
// Splits at the (unique) crossing of the monotone semicircle CDF.
double segment_l1(const SemicircleParams& p, double a, double b, double q) {
    if (b <= a) return 0.0;
    const auto piece = [&](double x1, double x2) {
        return std::abs(q * (x2 - x1) -
                        (semicircle_cdf_integral(p, x2) - semicircle_cdf_integral(p, x1)));
    };
    const double fa = semicircle_cdf(p, a), fb = semicircle_cdf(p, b);
    if ((fa - q) * (fb - q) >= 0.0) return piece(a, b);
    const double cross = semicircle_quantile(p, q);
    return piece(a, cross) + piece(cross, b);
}

}  // namespace

SpectralMeasure SpectralMeasure::from_unsorted(std::vector<double> values) {
    if (values.empty()) throw SpecInvalid("spectral measure must be nonempty");
    std::sort(values.begin(), values.end());
    return SpectralMeasure{std::move(values)};
}

SpectralMeasure SpectralMeasure::from_eigen(const Eigen::VectorXd& values) {
    return from_unsorted(std::vector<double>(values.data(), values.data() + values.size()));
}

SpectralMeasure SpectralMeasure::shifted(double delta) const {
    SpectralMeasure out = *this;
    for (double& t : out.eigs) t += delta;
    return out;
}

Eigen::MatrixXd goe_sample(int n, std::uint64_t seed) {
    if (n < 1) throw SpecInvalid("goe_sample requires n >= 1");
    GaussianStream gauss(seed);
    Eigen::MatrixXd m(n, n);
    const double off = 1.0 / std::sqrt(static_cast<double>(n));
    const double diag = std::sqrt(2.0 / n);
    for (int i = 0; i < n; ++i) {
        m(i, i) = diag * gauss.next();
        for (int j = i + 1; j < n; ++j) {
            const double v = off * gauss.next();
            m(i, j) = v;
            m(j, i) = v;
        }
    }
    return m;
}

double semicircle_density(const SemicircleParams& p, double x) {
    const double u = (x - p.center) / p.radius;
    if (u <= -1.0 || u >= 1.0) return 0.0;
    return 2.0 / (kPi * p.radius) * std::sqrt(1.0 - u * u);
}

double semicircle_cdf(const SemicircleParams& p, double x) {
    const double u = (x - p.center) / p.radius;
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return 0.5 + (u * std::sqrt(1.0 - u * u) + std::asin(u)) / kPi;
}

double semicircle_cdf_integral(const SemicircleParams& p, double x) {
    const double lo = p.center - p.radius;
    if (x <= lo) return 0.0;
    const double u = clamp_unit((x - p.center) / p.radius);
    const double w = 1.0 - u * u;
    const double inner =
        0.5 * u + (-std::pow(w, 1.5) / 3.0 + u * std::asin(u) + std::sqrt(w)) / kPi;
    double val = p.radius * inner;  // vanishes at u = -1
    if (x > p.center + p.radius) val += x - (p.center + p.radius);
    return val;
}

double semicircle_quantile(const SemicircleParams& p, double q) {
    if (q <= 0.0) return p.center - p.radius;
    if (q >= 1.0) return p.center + p.radius;
    double lo = p.center - p.radius, hi = p.center + p.radius;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (semicircle_cdf(p, mid) < q ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double semicircle_partial_mean(const SemicircleParams& p, double a, double b) {
    const double ua = clamp_unit((a - p.center) / p.radius);
    const double ub = clamp_unit((b - p.center) / p.radius);
    if (ub <= ua) return 0.0;
    const double centered = -2.0 * p.radius / (3.0 * kPi) *
                            (std::pow(1.0 - ub * ub, 1.5) - std::pow(1.0 - ua * ua, 1.5));
    const double mass = semicircle_cdf(p, b) - semicircle_cdf(p, a);
    return p.center * mass + centered;
}

double w1_distance(const SpectralMeasure& a, const SpectralMeasure& b) {
    const auto& xs = a.eigs;
    const auto& ys = b.eigs;
    if (xs.size() == ys.size()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) acc += std::abs(xs[i] - ys[i]);
        return acc / static_cast<double>(xs.size());
    }
    // Unequal sizes: integrate |F_a - F_b| between merged atoms.
    std::vector<double> pts;
    pts.reserve(xs.size() + ys.size());
    pts.insert(pts.end(), xs.begin(), xs.end());
    pts.insert(pts.end(), ys.begin(), ys.end());
    std::sort(pts.begin(), pts.end());
    double acc = 0.0;
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        while (ia < xs.size() && xs[ia] <= pts[k]) ++ia;
        while (ib < ys.size() && ys[ib] <= pts[k]) ++ib;
        const double fa = static_cast<double>(ia) / xs.size();
        const double fb = static_cast<double>(ib) / ys.size();
        acc += std::abs(fa - fb) * (pts[k + 1] - pts[k]);
    }
    return acc;
}

double w1_distance(const SpectralMeasure& a, const SemicircleParams& b) {
    const auto& xs = a.eigs;
    const std::size_t m = xs.size();
    const double lo = std::min(xs.front(), b.center - b.radius);
    const double hi = std::max(xs.back(), b.center + b.radius);
    double acc = segment_l1(b, lo, xs.front(), 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i)
        acc += segment_l1(b, xs[i], xs[i + 1], static_cast<double>(i + 1) / m);
    acc += segment_l1(b, xs.back(), hi, 1.0);
    return acc;
}

double bl_lower_bound(const SpectralMeasure& a, const SpectralMeasure& b,
                      const std::vector<double>& grid) {
    double best = 0.0;
    for (double t : grid) {
        const double dr = std::abs(integrate_empirical(a, [&](double x) { return ramp(x, t); }) -
                                   integrate_empirical(b, [&](double x) { return ramp(x, t); }));
        const double dt = std::abs(integrate_empirical(a, [&](double x) { return tent(x, t); }) -
                                   integrate_empirical(b, [&](double x) { return tent(x, t); }));
        best = std::max({best, dr, dt});
    }
    return best;
}

double bl_lower_bound(const SpectralMeasure& a, const SemicircleParams& b,
                      const std::vector<double>& grid) {
    double best = 0.0;
    for (double t : grid) {
        const double dr = std::abs(integrate_empirical(a, [&](double x) { return ramp(x, t); }) -
                                   ramp_against_semicircle(b, t));
        const double dt = std::abs(integrate_empirical(a, [&](double x) { return tent(x, t); }) -
                                   tent_against_semicircle(b, t));
        best = std::max({best, dr, dt});
    }
    return best;
}

SpectralMeasure spectrum_of(const Eigen::MatrixXd& symmetric) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric, Eigen::EigenvaluesOnly);
    return SpectralMeasure::from_eigen(solver.eigenvalues());
}

}  // namespace pspin
