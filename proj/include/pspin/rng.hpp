#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string_view>

#include <Eigen/Dense>

namespace pspin {

// One splitmix64 step; also usable as a 64-bit mixing function.
std::uint64_t splitmix64(std::uint64_t& state);

std::uint64_t fnv1a64(std::string_view s);

// Splittable seed derivation: (master, task tag, index) -> 64-bit stream seed.
// Two splitmix64 steps keyed by the FNV-1a hash of the tag and the index, so
// distinct tags or indices give statistically independent streams.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t index);

// Deterministic standard-normal stream. mt19937_64 supplies the uniforms
// (bit-exact by the C++ standard); the Marsaglia polar transform is done
// here rather than via std::normal_distribution, whose output is
// implementation-defined.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double next();

    void fill(Eigen::Ref<Eigen::VectorXd> out);
    void fill(double* out, std::ptrdiff_t count);

  private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Runs fn(i) for i in [0, count) across at most `threads` workers.
// Each index is processed exactly once; callers keep determinism by writing
// results into per-index slots.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

// Resolved worker count: n <= 0 means hardware concurrency.
int resolve_threads(int n);

}  // namespace pspin
