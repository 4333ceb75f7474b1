#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/normal_distribution.hpp>

namespace spdest {

/// SplitMix64: a 64-bit counter passed through a bijective mixer. The whole
/// state is one word, so every mode of a simulation can own its stream.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(state_ += kGolden); }

  void seed(std::uint64_t s) noexcept { state_ = s; }
  std::uint64_t state() const noexcept { return state_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

 private:
  std::uint64_t state_;
};

/// Seed of the substream addressed by a path of ids below a master seed,
/// e.g. (master, replicate, k, l). Distinct paths give unrelated seeds.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = SplitMix64::mix(master ^ 0x6a09e667f3bcc909ULL);
  for (std::uint64_t id : path) {
    h = SplitMix64::mix(h + SplitMix64::kGolden * (id + 1));
  }
  return h;
}

/// Domain tags separating substream families under one replicate.
enum class StreamTag : std::uint64_t {
  kMode = 1,
  kAliasedTail = 2,
  kReplicate = 3,
  kOuPath = 4,
};

/// Standard normal draw (ziggurat). Stateless, so one instance may serve any stream.
inline double standard_normal(SplitMix64& rng) {
  boost::random::normal_distribution<double> dist;
  return dist(rng);
}

}  // namespace spdest
