#pragma once

#include <cstdint>
#include <random>

namespace roughstop {

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed for substream `stream` of a run seeded with `seed`. Each simulated
// path draws from its own substream, so output is independent of how paths
// are scheduled across threads.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream);

  double operator()() { return dist_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace roughstop
