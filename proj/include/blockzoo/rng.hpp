#ifndef BLOCKZOO_RNG_HPP
#define BLOCKZOO_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <Eigen/Dense>

namespace blockzoo {

/// Counter-based deterministic random stream (splitmix64 core).
///
/// Streams are derived from (master seed, stream id, counter) so that
/// per-agent, per-iteration streams are independent and the result of a run
/// does not depend on evaluation order. All distributions are implemented
/// on top of the raw 64-bit output, so sequences are identical across
/// platforms and standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9e3779b97f4a7c15ull)) {}

  /// Derives an independent stream keyed by (master, stream_id, counter).
  static Rng stream(std::uint64_t master, std::uint64_t stream_id,
                    std::uint64_t counter) {
    std::uint64_t s = mix(master + 0x9e3779b97f4a7c15ull * (stream_id + 1));
    s = mix(s + 0xbf58476d1ce4e5b9ull * (counter + 1));
    return Rng(s);
  }

  std::uint64_t next_u64() {
    ++draws_;
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller (no cached second value, so the draw
  /// count is a pure function of the call sequence).
  double normal() {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Standard normal truncated to [lo, hi] by rejection.
  double truncated_normal(double lo = -3.0, double hi = 3.0) {
    for (;;) {
      const double z = normal();
      if (z >= lo && z <= hi) return z;
    }
  }

  Eigen::VectorXd normal_vector(int dim) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = normal();
    return v;
  }

  Eigen::VectorXd truncated_normal_vector(int dim, double lo = -3.0,
                                          double hi = 3.0) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = truncated_normal(lo, hi);
    return v;
  }

  /// Number of raw 64-bit draws consumed so far.
  std::uint64_t draws() const { return draws_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  std::uint64_t draws_ = 0;
};

/// Uniform sample from the unit sphere in R^dim (normalized isotropic
/// Gaussian draw). dim = 1 yields +1 or -1 with equal probability.
inline Eigen::VectorXd sample_unit_sphere(int dim, Rng& rng) {
  if (dim < 1) throw std::invalid_argument("sample_unit_sphere: dim must be >= 1");
  for (;;) {
    Eigen::VectorXd v = rng.normal_vector(dim);
    const double n = v.norm();
    if (n > 1e-12) return v / n;
  }
}

/// Variance of the standard normal truncated at +-b (closed form).
inline double truncated_normal_variance(double b = 3.0) {
  const double phi = std::exp(-0.5 * b * b) / std::sqrt(2.0 * M_PI);
  const double mass = std::erf(b / std::sqrt(2.0));
  return 1.0 - 2.0 * b * phi / mass;
}

}  // namespace blockzoo

#endif  // BLOCKZOO_RNG_HPP
