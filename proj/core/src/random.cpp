#include "circnav/random.hpp"

namespace circnav {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x636e6176u};
  engine_.seed(seq);
}

double RngStream::gaussian(double stddev) {
  if (stddev == 0.0) return 0.0;
  std::normal_distribution<double> dist(0.0, stddev);
  return dist(engine_);
}

double RngStream::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

bool RngStream::bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  std::bernoulli_distribution dist(p);
  return dist(engine_);
}

}  // namespace circnav
