#include "pspin/hamiltonian.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "pspin/errors.hpp"
#include "pspin/rng.hpp"

namespace pspin {

namespace {

using Index = std::ptrdiff_t;

Index ipow(Index base, int exp) {
    Index r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

void check_dims(const CouplingTensor& t, const SpherePoint& s) {
    if (t.n != s.dim())
        throw DimensionMismatch("tensor dimension " + std::to_string(t.n) +
                                " vs point dimension " + std::to_string(s.dim()));
}

// Contraction over one mode of a flat row-major tensor with `modes` modes of
// extent n each. The tensor is reshaped as (outer, n, inner) with
// outer = n^m, inner = n^{modes-1-m}.
void contract_mode(const double* data, int modes, Index n, int m, const double* x, double* out) {
    const Index inner = ipow(n, modes - 1 - m);
    const Index outer = ipow(n, m);
    if (inner == 1) {
        // innermost mode: rows of length n are contiguous
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            mat(data, outer, n);
        Eigen::Map<Eigen::VectorXd> res(out, outer);
        res.noalias() = mat * Eigen::Map<const Eigen::VectorXd>(x, n);
        return;
    }
    for (Index o = 0; o < outer; ++o) {
        Eigen::Map<Eigen::VectorXd> res(out + o * inner, inner);
        const double* block = data + o * n * inner;
        res.noalias() = x[0] * Eigen::Map<const Eigen::VectorXd>(block, inner);
        for (Index k = 1; k < n; ++k)
            res.noalias() += x[k] * Eigen::Map<const Eigen::VectorXd>(block + k * inner, inner);
    }
}

// Simple owning tensor with a mode count; scratch object for chain
// contractions.
struct Scratch {
    Eigen::VectorXd data;
    int modes = 0;
};

Scratch contract(const Scratch& t, Index n, int m, const double* x) {
    Scratch out;
    out.modes = t.modes - 1;
    out.data.resize(ipow(n, out.modes));
    contract_mode(t.data.data(), t.modes, n, m, x, out.data.data());
    return out;
}

Scratch contract_raw(const double* data, int modes, Index n, int m, const double* x) {
    Scratch out;
    out.modes = modes - 1;
    out.data.resize(ipow(n, out.modes));
    contract_mode(data, modes, n, m, x, out.data.data());
    return out;
}

// Fused single pass over J computing both the last-mode contraction R1 and
// the first-mode contraction L1. Each cache-resident row of length n feeds
// one dot product and one axpy.
void first_level(const double* J, int p, Index n, const double* x, double* R1, double* L1) {
    const Index inner = ipow(n, p - 1);
    const Index rows = inner / n;  // rows per mode-0 block
    Eigen::Map<const Eigen::VectorXd> xv(x, n);
    Eigen::Map<Eigen::VectorXd>(L1, inner).setZero();
    for (Index i = 0; i < n; ++i) {
        const double xi = x[i];
        const double* block = J + i * inner;
        for (Index r = 0; r < rows; ++r) {
            Eigen::Map<const Eigen::VectorXd> row(block + r * n, n);
            R1[i * rows + r] = row.dot(xv);
            Eigen::Map<Eigen::VectorXd>(L1 + r * n, n) += xi * row;
        }
    }
}

// Per-degree value and all single-free-mode contractions M_0..M_{p-1}.
// grad += gamma * sum_k M_k; returns the raw full contraction value.
double degree_value_grad(const double* J, int p, Index n, const double* x,
                         Eigen::VectorXd& grad, double gamma) {
    Scratch R1, L1;
    R1.modes = L1.modes = p - 1;
    R1.data.resize(ipow(n, p - 1));
    L1.data.resize(ipow(n, p - 1));
    first_level(J, p, n, x, R1.data.data(), L1.data.data());

    // right chain: M_0 and the value
    Scratch r = std::move(R1);
    while (r.modes > 1) r = contract(r, n, r.modes - 1, x);
    grad.noalias() += gamma * r.data;  // M_0
    const double value = r.data.dot(Eigen::Map<const Eigen::VectorXd>(x, n));

    // left chains: M_k for k = 1..p-1; lk spans modes k..p-1
    Scratch lk = std::move(L1);
    for (int k = 1; k < p; ++k) {
        if (lk.modes == 1) {
            grad.noalias() += gamma * lk.data;  // M_{p-1}
            break;
        }
        Scratch mk = contract(lk, n, lk.modes - 1, x);
        while (mk.modes > 1) mk = contract(mk, n, mk.modes - 1, x);
        grad.noalias() += gamma * mk.data;  // M_k
        lk = contract(lk, n, 0, x);
    }
    return value;
}

// Euclidean Hessian contribution of one degree:
// sum over ordered position pairs of the doubly-free contraction.
void degree_hessian(const double* J, int p, Index n, const double* x, Eigen::MatrixXd& hess,
                    double gamma) {
    if (p < 2) return;
    if (p == 2) {
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
            j(J, n, n);
        hess += gamma * (j + j.transpose());
        return;
    }
    // right chain R_m = contract last m modes (R[0] untouched = J)
    std::vector<Scratch> right(p);
    right[1] = contract_raw(J, p, n, p - 1, x);
    for (int m = 2; m < p; ++m) right[m] = contract(right[m - 1], n, right[m - 1].modes - 1, x);
    // left chain L_k = contract first k modes
    std::vector<Scratch> left(p);
    left[1] = contract_raw(J, p, n, 0, x);
    for (int k = 2; k < p; ++k) left[k] = contract(left[k - 1], n, 0, x);

    for (int k = 0; k < p; ++k) {
        for (int l = k + 1; l < p; ++l) {
            Scratch b;
            if (l < p - 1) {
                b = right[p - 1 - l];  // modes 0..l
                for (int i = 0; i < k; ++i) b = contract(b, n, 0, x);
            } else if (k > 0) {
                b = left[k];  // modes k..p-1
            } else {
                // pair (0, p-1): strip interior modes straight off J
                b = contract_raw(J, p, n, 1, x);
            }
            while (b.modes > 2) b = contract(b, n, 1, x);
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>
                bm(b.data.data(), n, n);
            hess += gamma * (bm + bm.transpose());
        }
    }
}

}  // namespace

const Eigen::VectorXd& CouplingTensor::entries(int p) const {
    for (const auto& [q, data] : degrees)
        if (q == p) return data;
    throw SpecInvalid("tensor has no degree " + std::to_string(p));
}

std::size_t CouplingTensor::total_entries() const {
    std::size_t total = 0;
    for (const auto& [p, data] : degrees) total += static_cast<std::size_t>(data.size());
    return total;
}

CouplingTensor sample_couplings(const MixtureSpec& spec, int n, std::uint64_t seed,
                                std::size_t entry_cap) {
    if (n < 2) throw SpecInvalid("sample_couplings requires n >= 2");
    for (const auto& [p, gsq] : spec.gamma_sq) {
        (void)gsq;
        long double count = std::pow(static_cast<long double>(n), p);
        if (count > static_cast<long double>(entry_cap))
            throw MemoryCapExceeded("degree " + std::to_string(p) + " needs n^p = " +
                                    std::to_string(static_cast<double>(count)) +
                                    " entries, above the cap of " + std::to_string(entry_cap));
    }
    CouplingTensor t;
    t.spec = spec;
    t.n = n;
    t.seed = seed;
    for (const auto& [p, gsq] : spec.gamma_sq) {
        (void)gsq;
        Eigen::VectorXd data(ipow(n, p));
        GaussianStream gauss(derive_seed(seed, "couplings", static_cast<std::uint64_t>(p)));
        gauss.fill(data.data(), data.size());
        t.degrees.emplace_back(p, std::move(data));
    }
    return t;
}

SpherePoint SpherePoint::from(Eigen::VectorXd v) {
    SpherePoint s{std::move(v)};
    const double norm = s.coords.norm();
    if (!(norm > 0.0)) throw SpecInvalid("cannot project the zero vector to the sphere");
    s.coords /= norm;
    return s;
}

SpherePoint SpherePoint::random(int n, std::uint64_t seed) {
    GaussianStream gauss(seed);
    Eigen::VectorXd v(n);
    gauss.fill(v);
    return from(std::move(v));
}

double h_eval(const CouplingTensor& t, const SpherePoint& s) {
    check_dims(t, s);
    const Index n = t.n;
    double value = 0.0;
    for (const auto& [p, data] : t.degrees) {
        Scratch c = contract_raw(data.data(), p, n, p - 1, s.coords.data());
        while (c.modes > 1) c = contract(c, n, c.modes - 1, s.coords.data());
        value += std::sqrt(t.spec.gamma_sq_at(p)) * c.data.dot(s.coords);
    }
    return value;
}

GradientBundle gradient_bundle(const CouplingTensor& t, const SpherePoint& s) {
    check_dims(t, s);
    GradientBundle g;
    g.euclidean_grad = Eigen::VectorXd::Zero(t.n);
    g.value = 0.0;
    for (const auto& [p, data] : t.degrees) {
        const double gamma = std::sqrt(t.spec.gamma_sq_at(p));
        g.value += gamma * degree_value_grad(data.data(), p, t.n, s.coords.data(),
                                             g.euclidean_grad, gamma);
    }
    g.radial = s.coords.dot(g.euclidean_grad);
    g.tangent_grad = g.euclidean_grad - g.radial * s.coords;
    return g;
}

Eigen::MatrixXd euclidean_hessian(const CouplingTensor& t, const SpherePoint& s) {
    check_dims(t, s);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(t.n, t.n);
    for (const auto& [p, data] : t.degrees)
        degree_hessian(data.data(), p, t.n, s.coords.data(), hess,
                       std::sqrt(t.spec.gamma_sq_at(p)));
    return hess;
}

Eigen::MatrixXd tangent_basis(const SpherePoint& s) {
    const int n = s.dim();
    // Householder reflector sending sigma to -sign(sigma_1) e_1; its trailing
    // columns span the tangent space.
    Eigen::VectorXd w = s.coords;
    const double sign = w(0) >= 0.0 ? 1.0 : -1.0;
    w(0) += sign;
    const double wnorm2 = w.squaredNorm();
    Eigen::MatrixXd q(n, n - 1);
    for (int j = 1; j < n; ++j) {
        q.col(j - 1) = -2.0 * w(j) / wnorm2 * w;
        q(j, j - 1) += 1.0;
    }
    return q;
}

Eigen::MatrixXd tangent_hessian_in_basis(const CouplingTensor& t, const SpherePoint& s,
                                         const Eigen::MatrixXd& basis) {
    const Eigen::MatrixXd hess = euclidean_hessian(t, s);
    const GradientBundle g = gradient_bundle(t, s);
    const int m = static_cast<int>(basis.cols());
    Eigen::MatrixXd out = basis.transpose() * hess * basis;
    out -= g.radial * Eigen::MatrixXd::Identity(m, m);
    return out;
}

DerivativeBundle derivatives(const CouplingTensor& t, const SpherePoint& s) {
    check_dims(t, s);
    DerivativeBundle b;
    GradientBundle g = gradient_bundle(t, s);
    b.value = g.value;
    b.euclidean_grad = std::move(g.euclidean_grad);
    b.radial = g.radial;
    b.tangent_grad = std::move(g.tangent_grad);
    const Eigen::MatrixXd q = tangent_basis(s);
    const Eigen::MatrixXd hess = euclidean_hessian(t, s);
    b.tangent_hessian = q.transpose() * hess * q;
    b.tangent_hessian -= b.radial * Eigen::MatrixXd::Identity(t.n - 1, t.n - 1);
    return b;
}

namespace {
constexpr char kMagic[8] = {'P', 'S', 'P', 'I', 'N', 'T', 'E', 'N'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}
}  // namespace

void save_tensor(const CouplingTensor& t, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    write_pod(out, static_cast<std::uint32_t>(t.n));
    write_pod(out, static_cast<std::uint32_t>(t.degrees.size()));
    write_pod(out, t.seed);
    for (const auto& [p, data] : t.degrees) {
        write_pod(out, static_cast<std::uint32_t>(p));
        write_pod(out, t.spec.gamma_sq_at(p));
        write_pod(out, static_cast<std::uint64_t>(data.size()));
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write to " + path);
}

CouplingTensor load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(path + " is not a coupling-tensor file");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != kFormatVersion)
        throw std::runtime_error("unsupported tensor format version " + std::to_string(version));
    CouplingTensor t;
    t.n = static_cast<int>(read_pod<std::uint32_t>(in));
    const auto n_degrees = read_pod<std::uint32_t>(in);
    t.seed = read_pod<std::uint64_t>(in);
    std::vector<std::pair<int, double>> pairs;
    for (std::uint32_t d = 0; d < n_degrees; ++d) {
        const int p = static_cast<int>(read_pod<std::uint32_t>(in));
        const double gsq = read_pod<double>(in);
        const auto count = read_pod<std::uint64_t>(in);
        Eigen::VectorXd data(static_cast<Index>(count));
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(count * sizeof(double)));
        pairs.emplace_back(p, gsq);
        t.degrees.emplace_back(p, std::move(data));
    }
    if (!in) throw std::runtime_error("truncated tensor file " + path);
    t.spec = MixtureSpec::from_pairs(std::move(pairs));
    return t;
}

}  // namespace pspin
