#pragma once

#include <cstdint>
#include <random>

namespace postsel {

/// Identifier of the pseudo-random stream layout. Bumped whenever the
/// mapping from seed to sampled values changes.
inline constexpr const char* kRngStreamId = "mt19937_64+splitmix64/v1";

/// Seeded pseudo-random stream. Substreams derived with split() are
/// independent of the parent's consumption state, so parallel tasks can be
/// handed split(task_index) and still reproduce serial results.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

  Rng split(std::uint64_t index) const {
    return Rng(mix(seed_ ^ (0x9E3779B97F4A7C15ULL * (index + 1))));
  }

  std::uint64_t seed() const { return seed_; }
  std::mt19937_64& engine() { return engine_; }

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace postsel
