#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace lyap {

// Seeded generator with hand-rolled transforms so identical seeds give
// identical streams on every platform (std::normal_distribution is
// implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  // Standard complex normal: real and imaginary parts ~ N(0, 1/2).
  std::complex<double> complex_normal() {
    return {normal() * M_SQRT1_2, normal() * M_SQRT1_2};
  }

  // Index in [0, probs.size()) with the given weights (assumed normalized).
  template <typename Vec>
  int categorical(const Vec& probs) {
    double u = uniform();
    double acc = 0.0;
    int last = static_cast<int>(probs.size()) - 1;
    for (int i = 0; i < last; ++i) {
      acc += probs[i];
      if (u < acc) return i;
    }
    return last;
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lyap
