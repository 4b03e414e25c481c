#pragma once

#include <Eigen/Dense>

#include "pspin/mixture.hpp"

namespace pspin {

// Covariance matrix of the (field value, radial derivative) pair at a point.
// Degenerate (det = 0) exactly for pure models.
struct SigmaMatrix {
    double m11;  // xi(1)
    double m12;  // xi'(1)
    double m22;  // xi''(1) + xi'(1)
    double det;

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d s;
        s << m11, m12, m12, m22;
        return s;
    }
};

SigmaMatrix sigma_matrix(const MixtureSpec& spec);

// Log-potential of the standard semicircle: integral of log|x - t| against
// the semicircle measure of radius 2. Even, continuous, quadratic inside
// the bulk with a square-root branch at |x| = 2.
double psi_star(double x);

// Its derivative, i.e. the Stieltjes transform of the standard semicircle
// evaluated on the real line.
double psi_star_prime(double x);

// Second derivative of psi_star away from |x| = 2; at the branch points the
// inside-bulk value is returned (the outside one-sided limit is -inf).
double psi_star_second(double x);

// Auxiliary function with support |x| >= sqrt(2); nonpositive, even,
// vanishing continuously at the threshold.
double big_phi(double x);

// Annealed complexity rate of the pure p-spin model as a function of the
// (scaled) radial value y. Even in y, maximal at y = 0, non-decreasing on
// y <= 0, and vanishing at y = -p*E0(p).
double complexity_R(int p, double y);

// Same rate parametrized by the energy density u: theta_pure(p, u) = R(p*u).
double theta_pure(int p, double u);

// Two-variable complexity rate for nondegenerate mixtures; x is the energy
// density and y the radial density. Requires a normalized, genuinely mixed
// spec (det Sigma > 0); throws DegenerateSigma otherwise.
double f_xy(const MixtureSpec& spec, double x, double y);
double df_dy(const MixtureSpec& spec, double x, double y);
double d2f_dy2(const MixtureSpec& spec, double x, double y);

// Overloads taking precomputed moments (hot paths: grids, solvers).
double f_xy(const DerivedMoments& m, double x, double y);
double df_dy(const DerivedMoments& m, double x, double y);
double d2f_dy2(const DerivedMoments& m, double x, double y);

// Everything the analytic layer predicts for one spec.
struct PredictionSet {
    MixtureClass klass;
    bool pure = false;
    double e0 = 0.0;      // ground-state energy scale E0
    double z = 0.0;       // pure models: root of the defining scalar equation
    double y0 = 0.0;      // mixtures: radial value at the variational point
    double center = 0.0;  // limiting spectrum center: p*E0(p) or y0
    double radius = 0.0;  // limiting spectrum radius: 2 sqrt(p(p-1)) or 2 sqrt(xi'')
    EInfThresholds thresholds;
    double eq_residual = 0.0;            // z-equation residual / F at the solution
    double stationarity_residual = 0.0;  // dF/dy at the solution (mixtures)
};

// Solves the scalar ground-state equation for the pure p-spin model, p >= 3.
// Residual <= 1e-12; verifies center > radius.
PredictionSet solve_pure_ground_state(int p);

// Solves the two-level variational problem for pure-like mixtures:
// outer root of g(x) = sup_y F(x, y), inner stationarity in y restricted to
// y <= 0. Throws NotPureLike / DegenerateSigma / NoSignChange.
PredictionSet solve_mixed_ground_state(const MixtureSpec& spec);

// sup_{y <= 0} F(x, y) together with the maximizer, for diagnostics and the
// outer root-finder.
struct InnerMax {
    double value;
    double argmax;
};
InnerMax sup_f_over_y(const DerivedMoments& m, double x);

// Grid scan of F on the strip |x + E0| < eps: finds the smallest alpha from
// a fixed schedule such that F < 0 outside the y-window of half-width
// alpha*sqrt(eps) around -y0, and reports the maximum inside the window,
// which must stay below beta*sqrt(eps).
struct StripReport {
    double eps;
    double alpha;
    double beta;          // from the closing bound, with Lipschitz constant 1
    double max_outside;   // max F outside the window (< 0 required)
    double max_inside;    // max F inside the window
    bool pass;
};

StripReport strip_check(const MixtureSpec& spec, const PredictionSet& pred, double eps);

}  // namespace pspin
