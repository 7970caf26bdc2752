#pragma once
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "vp/vec3.hpp"

namespace vp {

// Compensated (Kahan) accumulator; summation order is the caller's contract.
class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Van der Corput radical inverse; the workhorse of the quasi-random sampler.
inline double radical_inverse(uint64_t i, uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// i-th point of an n-point spiral covering the unit sphere, deterministic.
inline Vec3 fibonacci_sphere(int i, int n) {
  const double golden = 2.399963229728653;  // 2*pi*(1 - 1/phi)
  const double z = 1.0 - (2.0 * i + 1.0) / n;
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  const double th = golden * i;
  return {r * std::cos(th), r * std::sin(th), z};
}

// 17 significant digits: enough to round-trip an IEEE double exactly.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Static partition of [0, n) across `workers` threads. Chunk boundaries are a
// pure function of (n, workers), so reductions merged in worker order are
// reproducible for a fixed worker count.
inline void parallel_for_chunks(std::size_t n, int workers,
                                const std::function<void(std::size_t, std::size_t, int)>& body) {
  if (workers <= 1 || n < 2048) {
    body(0, n, 0);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(n, w * chunk);
    const std::size_t hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    threads.emplace_back([&body, lo, hi, w] { body(lo, hi, w); });
  }
  for (auto& t : threads) t.join();
}

}  // namespace vp
