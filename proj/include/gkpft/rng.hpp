#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gkpft {

// splitmix64 mixing step; used to derive statistically independent per-trial
// seeds from (base seed, cell index, trial index) counters so that estimates
// are identical no matter how trials are sharded across workers or resumed
// runs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t cell,
                                 std::uint64_t trial) {
  std::uint64_t h = splitmix64(base ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ cell);
  h = splitmix64(h ^ trial);
  return h;
}

// Recorded in sweep metadata so archived runs stay reproducible even if the
// default generator ever changes.
inline constexpr const char* kRngAlgorithm = "splitmix64/mt19937_64/box-muller";

class TrialRng {
 public:
  explicit TrialRng(std::uint64_t seed) : gen_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., n-1} via multiply-shift.
  int uniform_int(int n) {
    const auto wide = static_cast<unsigned __int128>(gen_()) *
                      static_cast<unsigned __int128>(n);
    return static_cast<int>(wide >> 64);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller transform; the second deviate of each pair is cached.
  double normal(double sigma) {
    if (sigma == 0.0) return 0.0;
    if (have_spare_) {
      have_spare_ = false;
      return sigma * spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return sigma * r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gkpft
