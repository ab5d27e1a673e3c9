#pragma once

#include <cstdint>
#include <random>

namespace circnav {

/// Independent, reproducible random substream identified by (seed, stream id).
/// Zero standard deviations short-circuit without consuming draws so that
/// noise-free configurations are independent of the stream.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double gaussian(double stddev);
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Stream identifiers. Per-entity streams add the entity index to the base so
/// that agent evaluation order never changes results.
namespace streams {
inline constexpr std::uint64_t kAgentProcess = 1'000;
inline constexpr std::uint64_t kTargetProcess = 2'000;
inline constexpr std::uint64_t kVio = 3'000;
inline constexpr std::uint64_t kCamera = 4'000;
inline constexpr std::uint64_t kUwbPair = 5'000;  // + pair index
inline constexpr std::uint64_t kRelativeInit = 6'000;  // + pair index
inline constexpr std::uint64_t kComms = 9'000;
}  // namespace streams

}  // namespace circnav
