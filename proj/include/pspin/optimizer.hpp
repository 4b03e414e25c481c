#pragma once

#include <cstdint>
#include <vector>

#include "pspin/hamiltonian.hpp"
#include "pspin/spectra.hpp"

namespace pspin {

struct OptimizerConfig {
    int max_iters = 5000;
    double grad_tol = 1e-8;          // stop when |tangent_grad| / sqrt(n) <= grad_tol
    double armijo_factor = 1e-4;
    double initial_step_scale = 0.1;  // trial step = scale / sqrt(xi''(1))
    int restarts = 50;
    std::uint64_t seed = 0;
    int threads = 1;
    bool keep_trajectory = true;
};

// A located near-critical point with its normalized Hessian spectrum.
struct CriticalPointRecord {
    SpherePoint point;
    double energy_density = 0.0;   // h / sqrt(n)
    double radial_density = 0.0;   // radial derivative / sqrt(n)
    double grad_norm = 0.0;        // |tangent_grad| (absolute)
    std::vector<double> normalized_hessian_eigs;  // eigs of tangent Hessian / sqrt(n-1), sorted
    int iterations = 0;
    bool converged = false;
    int restart_index = -1;
    std::vector<double> trajectory_energy;  // energy density after each accepted step
};

// Projected gradient descent with Armijo backtracking and renormalization
// back to the sphere after every step. Accepted steps never increase the
// energy beyond a few ulp: once the required decrease falls below value
// resolution, steps are accepted on strict gradient-norm decrease instead,
// so the iterate keeps contracting while the energy is numerically flat.
CriticalPointRecord minimize(const CouplingTensor& t, const OptimizerConfig& cfg,
                             const SpherePoint& start);

struct MultiRestartResult {
    CriticalPointRecord best;  // converged record with minimal energy density
    std::vector<CriticalPointRecord> all;
};

// Independent uniform restarts with per-index derived seeds; restarts run
// concurrently over the shared tensor and the argmin is tie-broken by
// restart index. Throws NoConvergedRun when nothing converges.
MultiRestartResult multi_restart(const CouplingTensor& t, const OptimizerConfig& cfg);

// The record's spectrum as a measure; throws NotConverged.
SpectralMeasure normalized_hessian_spectrum(const CriticalPointRecord& rec);

// Semicircle comparator for the record: centered at the achieved
// -radial_density * sqrt(n/(n-1)) with radius 2 sqrt(xi''(1)).
SemicircleParams predicted_comparator(const CriticalPointRecord& rec, const DerivedMoments& m);

}  // namespace pspin
