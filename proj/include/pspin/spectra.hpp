#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace pspin {

// Empirical spectral measure: sorted eigenvalues, each with weight 1/size.
struct SpectralMeasure {
    std::vector<double> eigs;  // sorted ascending, nonempty

    static SpectralMeasure from_unsorted(std::vector<double> values);
    static SpectralMeasure from_eigen(const Eigen::VectorXd& values);

    double min() const { return eigs.front(); }
    double max() const { return eigs.back(); }
    std::size_t size() const { return eigs.size(); }
    SpectralMeasure shifted(double delta) const;
};

struct SemicircleParams {
    double center;
    double radius;  // > 0
};

inline SemicircleParams standard_semicircle() { return {0.0, 2.0}; }

// Symmetric n x n draw with entry variances (1 + delta_ij) / n; the upper
// triangle is sampled and mirrored.
Eigen::MatrixXd goe_sample(int n, std::uint64_t seed);

double semicircle_density(const SemicircleParams& p, double x);
double semicircle_cdf(const SemicircleParams& p, double x);
// Antiderivative of the CDF, zero at the lower support edge.
double semicircle_cdf_integral(const SemicircleParams& p, double x);
// Quantile by bisection on the support.
double semicircle_quantile(const SemicircleParams& p, double q);
// Partial first moment: integral of x over [a, b] against the density.
double semicircle_partial_mean(const SemicircleParams& p, double a, double b);

// Exact 1-D Wasserstein-1 distance, computed as the L1 distance between CDFs.
double w1_distance(const SpectralMeasure& a, const SpectralMeasure& b);
double w1_distance(const SpectralMeasure& a, const SemicircleParams& b);

// Lower bound on the bounded-Lipschitz distance: max over a dictionary of
// clamped ramps and unit tents centered on the grid. Every dictionary
// element has sup-norm <= 1 and Lipschitz constant <= 1, so the result is
// <= d_BL <= W1.
double bl_lower_bound(const SpectralMeasure& a, const SpectralMeasure& b,
                      const std::vector<double>& grid);
double bl_lower_bound(const SpectralMeasure& a, const SemicircleParams& b,
                      const std::vector<double>& grid);

// Eigenvalues of a symmetric matrix as a measure.
SpectralMeasure spectrum_of(const Eigen::MatrixXd& symmetric);

}  // namespace pspin
