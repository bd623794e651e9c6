#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace gptpat::internal {

// mt19937_64 is fully specified by the standard; the helpers below avoid the
// implementation-defined std distributions so that seeded sequences are
// identical on every platform and stdlib.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // uniform in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) { return engine_() % bound; }

  // standard normal, Box-Muller
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1;
    do {
      u1 = next_double();
    } while (u1 <= 0.0);
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.141592653589793 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gptpat::internal
