#include "pspin/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pspin/errors.hpp"

namespace pspin {

namespace {

constexpr double kDegenerateTol = 1e-14;

DerivedMoments mixed_moments_or_throw(const MixtureSpec& spec) {
    const DerivedMoments m = derive_moments(spec);
    const SigmaMatrix sigma = sigma_matrix(spec);
    if (sigma.det <= kDegenerateTol)
        throw DegenerateSigma("Sigma is degenerate (det = " + std::to_string(sigma.det) +
                              "); pure models use complexity_R instead");
    return m;
}

// det Sigma for a normalized spec, the denominator of the conditional
// Gaussian exponent.
double cond_var(const DerivedMoments& m) { return m.xipp + m.xip - m.xip * m.xip; }

// Bisection on [lo, hi] assuming f(lo) and f(hi) have opposite signs.
// Returns the midpoint after the interval collapses to machine resolution.
template <typename F>
double bisect(F&& f, double lo, double hi, double flo) {
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (flo > 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

SigmaMatrix sigma_matrix(const MixtureSpec& spec) {
    const DerivedMoments m = derive_moments(spec);
    SigmaMatrix s;
    s.m11 = m.xi1;
    s.m12 = m.xip;
    s.m22 = m.xipp + m.xip;
    s.det = s.m11 * s.m22 - s.m12 * s.m12;
    return s;
}

double psi_star(double x) {
    const double a = std::abs(x);
    const double base = 0.25 * x * x - 0.5;
    if (a <= 2.0) return base;
    const double root = std::sqrt(x * x - 4.0);
    return base - (0.25 * a * root - std::log(std::sqrt(0.25 * x * x - 1.0) + 0.5 * a));
}

double psi_star_prime(double x) {
    const double a = std::abs(x);
    if (a <= 2.0) return 0.5 * x;
    const double root = std::sqrt(x * x - 4.0);
    return 0.5 * (x - std::copysign(root, x));
}

double psi_star_second(double x) {
    const double a = std::abs(x);
    if (a <= 2.0) return 0.5;
    const double root = std::sqrt(x * x - 4.0);
    return 0.5 * (1.0 - a / root);
}

double big_phi(double x) {
    const double a = std::abs(x);
    if (a < std::sqrt(2.0)) return 0.0;
    const double root = std::sqrt(x * x - 2.0);
    return -0.5 * a * root + std::log((a + root) / std::sqrt(2.0));
}

double complexity_R(int p, double y) {
    if (p < 3) throw SpecInvalid("complexity_R requires p >= 3");
    const double pd = p;
    const double quad = (pd - 2.0) * y * y / (4.0 * pd * pd * (pd - 1.0));
    return 0.5 * std::log(pd - 1.0) - quad + big_phi(y / std::sqrt(2.0 * pd * (pd - 1.0)));
}

double theta_pure(int p, double u) { return complexity_R(p, p * u); }

double f_xy(const DerivedMoments& m, double x, double y) {
    const double d = cond_var(m);
    const double lin = y - m.xip * x;
    return 0.5 + 0.5 * std::log(m.xipp / m.xip) - 0.5 * x * x - lin * lin / (2.0 * d) +
           psi_star(y / std::sqrt(m.xipp));
}

double df_dy(const DerivedMoments& m, double x, double y) {
    const double d = cond_var(m);
    const double s = std::sqrt(m.xipp);
    return -(y - m.xip * x) / d + psi_star_prime(y / s) / s;
}

double d2f_dy2(const DerivedMoments& m, double x, double y) {
    (void)x;
    const double d = cond_var(m);
    return -1.0 / d + psi_star_second(y / std::sqrt(m.xipp)) / m.xipp;
}

double f_xy(const MixtureSpec& spec, double x, double y) {
    return f_xy(mixed_moments_or_throw(spec), x, y);
}

double df_dy(const MixtureSpec& spec, double x, double y) {
    return df_dy(mixed_moments_or_throw(spec), x, y);
}

double d2f_dy2(const MixtureSpec& spec, double x, double y) {
    return d2f_dy2(mixed_moments_or_throw(spec), x, y);
}

PredictionSet solve_pure_ground_state(int p) {
    if (p < 3) throw SpecInvalid("solve_pure_ground_state requires p >= 3");
    const double pd = p;
    const auto residual = [pd](double z) {
        return (1.0 + z) / (z * z) * std::log1p(z) - 1.0 / z - 1.0 / pd;
    };
    double lo = 1e-9, hi = 10.0 * pd;
    const double flo = residual(lo), fhi = residual(hi);
    if (!(flo > 0.0) || !(fhi < 0.0))
        throw RootNotBracketed("z-equation has no sign change on (1e-9, 10p) for p = " +
                               std::to_string(p));
    const double z = bisect(residual, lo, hi, flo);

    PredictionSet pred;
    pred.klass = MixtureClass::PureLike;
    pred.pure = true;
    pred.z = z;
    pred.e0 = std::sqrt(pd) / std::sqrt(z + 1.0) * (1.0 + z / pd);
    pred.center = pd * pred.e0;
    pred.radius = 2.0 * std::sqrt(pd * (pd - 1.0));
    pred.thresholds = e_inf_thresholds(MixtureSpec::pure(p));
    pred.eq_residual = residual(z);
    pred.stationarity_residual = 0.0;
    if (std::abs(pred.eq_residual) > 1e-12)
        throw RootNotBracketed("z-equation residual " + std::to_string(pred.eq_residual) +
                               " exceeds 1e-12");
    if (!(pred.center > pred.radius))
        throw std::logic_error("edge inequality p*E0(p) > 2 sqrt(p(p-1)) violated");
    return pred;
}

InnerMax sup_f_over_y(const DerivedMoments& m, double x) {
    // F(x, .) is strictly concave; its y-derivative decreases from +inf to
    // the value at 0-, which is negative for x < 0. The maximizer over all
    // of R is nonpositive there, so a bisection on dF/dy over a wide
    // negative bracket suffices.
    const double span = 40.0 * std::sqrt(m.xipp);
    double lo = -span, hi = -1e-300;
    double flo = df_dy(m, x, lo);
    if (flo < 0.0) {
        // Extremely negative x could push the maximizer below the default
        // bracket; widen geometrically.
        for (int k = 0; k < 60 && flo < 0.0; ++k) {
            hi = lo;
            lo *= 2.0;
            flo = df_dy(m, x, lo);
        }
        if (flo < 0.0) throw NoSignChange("inner maximizer bracket exhausted");
    }
    const double ystar = bisect([&](double y) { return df_dy(m, x, y); }, lo, hi, flo);
    return {f_xy(m, x, ystar), ystar};
}

PredictionSet solve_mixed_ground_state(const MixtureSpec& spec) {
    const DerivedMoments m = derive_moments(spec);
    if (m.klass != MixtureClass::PureLike)
        throw NotPureLike(std::string("classification is ") + to_string(m.klass) +
                          "; the variational solution requires a pure-like mixture");
    const SigmaMatrix sigma = sigma_matrix(spec);
    if (sigma.det <= kDegenerateTol)
        throw DegenerateSigma("Sigma is degenerate; use solve_pure_ground_state");

    const EInfThresholds thresholds = e_inf_thresholds(spec);
    const auto g = [&](double x) { return sup_f_over_y(m, x).value; };

    double hi = -thresholds.mixed;
    double lo = -3.0;
    double ghi = g(hi);
    if (ghi <= 0.0) throw NoSignChange("sup_y F is nonpositive at the mixed threshold");
    double glo = g(lo);
    for (int k = 0; k < 4 && glo >= 0.0; ++k) {
        lo *= 2.0;
        glo = g(lo);
    }
    if (glo >= 0.0) throw NoSignChange("sup_y F has no sign change after widening the bracket");

    const double xroot = bisect(g, lo, hi, glo);
    const InnerMax inner = sup_f_over_y(m, xroot);

    PredictionSet pred;
    pred.klass = m.klass;
    pred.pure = false;
    pred.e0 = -xroot;
    pred.y0 = -inner.argmax;
    pred.center = pred.y0;
    pred.radius = 2.0 * std::sqrt(m.xipp);
    pred.thresholds = thresholds;
    pred.eq_residual = f_xy(m, xroot, inner.argmax);
    pred.stationarity_residual = df_dy(m, xroot, inner.argmax);
    if (std::abs(pred.eq_residual) > 1e-8 || std::abs(pred.stationarity_residual) > 1e-8)
        throw NoSignChange("variational residuals failed to converge");
    if (!(pred.y0 > 2.0 * std::sqrt(m.xipp)))
        throw std::logic_error("y0 <= 2 sqrt(xi'') contradicts the pure-like structure");
    return pred;
}

StripReport strip_check(const MixtureSpec& spec, const PredictionSet& pred, double eps) {
    const DerivedMoments m = derive_moments(spec);
    if (m.klass != MixtureClass::PureLike) throw NotPureLike("strip_check needs a pure-like mixture");
    if (eps < 0.0 || eps > 0.05) throw SpecInvalid("strip_check expects 0 <= eps <= 0.05");

    const double e0 = pred.e0, y0 = pred.y0;
    const double sq = std::sqrt(m.xipp);
    const double K = 10.0 * sq;
    const double d = cond_var(m);

    StripReport rep{};
    rep.eps = eps;
    if (eps == 0.0) {
        // The strip collapses to the variational point itself.
        rep.alpha = 1.5;
        rep.beta = 3.0 * rep.alpha * (y0 + m.xip * e0) / (2.0 * d) + rep.alpha / sq;
        rep.max_outside = -std::numeric_limits<double>::infinity();
        rep.max_inside = f_xy(m, -e0, -y0);
        rep.pass = true;
        return rep;
    }

    const double half = std::sqrt(eps);
    constexpr int kXGrid = 41;
    const int y_grid = 4001;
    const double ystep = K / (y_grid - 1);

    const auto x_at = [&](int i) {
        // interior points of the open interval (-e0-eps, -e0+eps)
        const double t = (2.0 * i / (kXGrid - 1.0) - 1.0) * (1.0 - 1e-9);
        return -e0 + eps * t;
    };

    for (double alpha : {1.5, 2.0, 3.0, 5.0, 8.0}) {
        const double win = alpha * half;
        double max_outside = -std::numeric_limits<double>::infinity();
        double max_inside = -std::numeric_limits<double>::infinity();
        double bad_x = 0.0, bad_y = 0.0;
        for (int i = 0; i < kXGrid; ++i) {
            const double x = x_at(i);
            for (int j = 0; j < y_grid; ++j) {
                const double y = -K + j * ystep;
                const double val = f_xy(m, x, y);
                if (std::abs(y + y0) < win) {
                    max_inside = std::max(max_inside, val);
                } else if (val > max_outside) {
                    max_outside = val;
                    bad_x = x;
                    bad_y = y;
                }
            }
            // window endpoints carry the largest outside values; sample them exactly
            for (double y : {-y0 - win, -y0 + win}) {
                if (y <= 0.0 && y >= -K) {
                    const double val = f_xy(m, x, y);
                    if (val > max_outside) {
                        max_outside = val;
                        bad_x = x;
                        bad_y = y;
                    }
                }
            }
        }
        if (max_outside < 0.0) {
            rep.alpha = alpha;
            rep.beta = 3.0 * alpha * (y0 + m.xip * e0) / (2.0 * d) + alpha / sq;
            rep.max_outside = max_outside;
            rep.max_inside = max_inside;
            rep.pass = max_inside <= rep.beta * half;
            return rep;
        }
        if (alpha == 8.0)
            throw NoAlphaFound("strip negativity failed for every alpha; worst grid point (x=" +
                               std::to_string(bad_x) + ", y=" + std::to_string(bad_y) +
                               ") has F = " + std::to_string(max_outside));
    }
    throw NoAlphaFound("unreachable");
}

}  // namespace pspin
