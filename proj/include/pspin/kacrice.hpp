#pragma once

#include <cstdint>
#include <limits>

#include "pspin/mixture.hpp"

namespace pspin {

// Closed interval with infinite endpoints allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval all() { return {}; }
    static Interval below(double hi) { return {-std::numeric_limits<double>::infinity(), hi}; }
    static Interval around(double center, double half) { return {center - half, center + half}; }
    bool empty() const { return !(lo < hi); }
    Interval intersect(const Interval& other) const {
        return {std::max(lo, other.lo), std::min(hi, other.hi)};
    }
    Interval scaled(double factor) const;  // factor > 0
};

// Monte-Carlo estimate of E|det(GOE_n - shift I)| and its second moment,
// accumulated in log space.
struct DetMomentEstimate {
    int n = 0;
    double shift = 0.0;
    double first_moment = 0.0;
    double second_moment = 0.0;
    int samples = 0;
    double first_std_error = 0.0;
    double second_std_error = 0.0;
    double log_first_moment = 0.0;
    double log_second_moment = 0.0;
};

DetMomentEstimate det_moment_mc(int n, double shift, int samples, std::uint64_t seed);

// Log of the finite-n Kac-Rice prefactor, via log-gamma.
double log_prefactor_pure(int p, int n);
double log_prefactor_mixed(const MixtureSpec& spec, int n);  // throws DegenerateSigma

// One mean-critical-point-count estimate at finite n.
struct CrtEstimate {
    int n = 0;
    Interval energy_window;   // constraint on h / sqrt(n)
    Interval radial_window;   // constraint on radial derivative / sqrt(n)
    double log_mean_count = 0.0;
    double normalized = 0.0;  // log_mean_count / n
    int mc_samples = 0;
    double std_error = 0.0;   // on log_mean_count
};

// Reduced one-dimensional integral for pure models: the radial identity
// pins the energy to y/p, so the two windows intersect in y.
CrtEstimate mean_crt_pure(int p, int n, Interval energy, Interval radial, int samples,
                          std::uint64_t seed, int threads = 1);

// Two-dimensional reduced integral for nondegenerate mixtures. The x-section
// of the Gaussian weight is integrated in closed form; the y-integral uses
// Simpson nodes with one determinant estimate per node.
CrtEstimate mean_crt_mixed(const MixtureSpec& spec, int n, Interval energy, Interval radial,
                           int samples, std::uint64_t seed, int threads = 1);

// Same integral with the determinant factor forced to one; reduces to the
// Gaussian mass of the window box times the prefactor (testing hook).
double log_gaussian_mass_mixed(const MixtureSpec& spec, int n, Interval energy, Interval radial);

}  // namespace pspin
