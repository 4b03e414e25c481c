#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pspin/mixture.hpp"

namespace pspin {

inline constexpr std::size_t kDefaultEntryCap = std::size_t{1} << 27;

// One disorder realization: dense unsymmetrized i.i.d. Gaussian arrays,
// one flat row-major block of n^p entries per active degree.
struct CouplingTensor {
    MixtureSpec spec;
    int n = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<int, Eigen::VectorXd>> degrees;  // (p, entries), sorted by p

    const Eigen::VectorXd& entries(int p) const;
    std::size_t total_entries() const;
};

// Deterministic given (spec, n, seed); throws MemoryCapExceeded naming the
// offending degree when n^p exceeds the cap.
CouplingTensor sample_couplings(const MixtureSpec& spec, int n, std::uint64_t seed,
                                std::size_t entry_cap = kDefaultEntryCap);

// Point on the unit sphere S^{n-1}; renormalized after every update.
struct SpherePoint {
    Eigen::VectorXd coords;

    static SpherePoint from(Eigen::VectorXd v);
    static SpherePoint random(int n, std::uint64_t seed);
    void renormalize() { coords /= coords.norm(); }
    int dim() const { return static_cast<int>(coords.size()); }
};

// Field value at a unit-sphere point: sum over degrees of
// gamma_p * <J^(p), sigma tensor-power p>. Equal to evaluating the
// large-sphere Hamiltonian at sqrt(n) * sigma and dividing by sqrt(n).
double h_eval(const CouplingTensor& t, const SpherePoint& s);

// Cheap bundle for the optimizer: value, Euclidean gradient, radial
// derivative and projected tangent gradient. Two memory passes per degree.
struct GradientBundle {
    double value;
    Eigen::VectorXd euclidean_grad;
    double radial;  // sigma . grad
    Eigen::VectorXd tangent_grad;
};

GradientBundle gradient_bundle(const CouplingTensor& t, const SpherePoint& s);

// Full bundle with the spherical Hessian expressed in an orthonormal tangent
// frame Q: tangent_hessian = Q^T (euclidean Hessian) Q - radial * I.
struct DerivativeBundle {
    double value;
    Eigen::VectorXd euclidean_grad;
    double radial;
    Eigen::VectorXd tangent_grad;
    Eigen::MatrixXd tangent_hessian;  // (n-1) x (n-1), symmetric
};

DerivativeBundle derivatives(const CouplingTensor& t, const SpherePoint& s);

// Householder complement of sigma: deterministic orthonormal n x (n-1)
// frame with Q^T sigma = 0.
Eigen::MatrixXd tangent_basis(const SpherePoint& s);

// Dense n x n ambient Hessian (exactly symmetric by construction). Exposed
// so alternative tangent frames can be tested against each other.
Eigen::MatrixXd euclidean_hessian(const CouplingTensor& t, const SpherePoint& s);

Eigen::MatrixXd tangent_hessian_in_basis(const CouplingTensor& t, const SpherePoint& s,
                                         const Eigen::MatrixXd& basis);

// Flat binary dump: header (magic, version, n, degree table, seed) followed
// by row-major little-endian float64 entries per degree.
void save_tensor(const CouplingTensor& t, const std::string& path);
CouplingTensor load_tensor(const std::string& path);

}  // namespace pspin
