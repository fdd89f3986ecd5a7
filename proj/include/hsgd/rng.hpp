#pragma once

#include <cmath>
#include <cstdint>

namespace hsgd {

// Counter-based randomness. Every draw is a pure function of
// (master_seed, tag, replicate, machine, round, step, draw index), so
// simulations replay bit-identically no matter how machine loops are
// ordered or parallelized. No generator state is shared between streams.
enum class StreamTag : std::uint64_t {
  gradient_noise = 1,
  data_sample = 2,
  participation = 3,
  instance_gen = 4,
  probe = 5,
};

namespace detail {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t fold(std::uint64_t h, std::uint64_t v) {
  return mix64((h + kGolden) ^ v);
}

}  // namespace detail

class RngStream {
 public:
  RngStream(std::uint64_t master_seed, StreamTag tag, std::uint64_t replicate = 0,
            std::uint64_t machine = 0, std::uint64_t round = 0, std::uint64_t step = 0) {
    std::uint64_t h = detail::mix64(master_seed + detail::kGolden);
    h = detail::fold(h, static_cast<std::uint64_t>(tag));
    h = detail::fold(h, replicate);
    h = detail::fold(h, machine);
    h = detail::fold(h, round);
    h = detail::fold(h, step);
    base_ = h;
  }

  std::uint64_t next_u64() { return detail::mix64(base_ + (++counter_) * detail::kGolden); }

  // uniform on (0, 1]; never returns 0 so log() stays finite
  double next_uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // The project-wide Gaussian transform: Box-Muller, cosine branch only.
  // Consumes exactly two uniforms per draw; nothing is cached, so draw i
  // is a pure function of counters 2i and 2i+1.
  double next_normal() {
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double next_normal(double stddev) { return stddev * next_normal(); }

  // uniform integer in [0, n); n must be positive
  std::uint64_t next_below(std::uint64_t n) { return next_u64() % n; }

 private:
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace hsgd
