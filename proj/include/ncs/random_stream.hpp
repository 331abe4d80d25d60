#pragma once

#include <cstdint>

#include "ncs/linalg.hpp"

namespace ncs {

enum class DrawKind : std::uint32_t {
  kInitialState = 1,
  kProcessNoise = 2,
  kObservationNoise = 3,
  kChannel = 4,
};

/// Counter-based random source. Every draw is a pure function of
/// (master_seed, replicate, step, kind, index), so a replicate's numbers do
/// not depend on which worker runs it or in what order.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t replicate)
      : master_seed_(master_seed), replicate_(replicate) {}

  std::uint64_t bits(std::uint64_t step, DrawKind kind,
                     std::uint64_t index) const;
  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t step, DrawKind kind, std::uint64_t index) const;
  double normal(std::uint64_t step, DrawKind kind, std::uint64_t index) const;
  /// Fills `out` with independent standard normals.
  void normals(std::uint64_t step, DrawKind kind, Vector& out) const;

  std::uint64_t master_seed() const { return master_seed_; }
  std::uint64_t replicate() const { return replicate_; }

 private:
  std::uint64_t master_seed_;
  std::uint64_t replicate_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ncs
