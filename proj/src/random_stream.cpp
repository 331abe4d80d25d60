#include "ncs/random_stream.hpp"

#include <cmath>
#include <numbers>

namespace ncs {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t RandomStream::bits(std::uint64_t step, DrawKind kind,
                                 std::uint64_t index) const {
  std::uint64_t h = splitmix64(master_seed_);
  h = splitmix64(h ^ replicate_);
  h = splitmix64(h ^ step);
  h = splitmix64(h ^ static_cast<std::uint64_t>(kind));
  return splitmix64(h ^ index);
}

double RandomStream::uniform(std::uint64_t step, DrawKind kind,
                             std::uint64_t index) const {
  const std::uint64_t b = bits(step, kind, index) >> 11;
  return (static_cast<double>(b) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal(std::uint64_t step, DrawKind kind,
                            std::uint64_t index) const {
  // Box-Muller on a dedicated pair of uniforms per index.
  const double u1 = uniform(step, kind, 2 * index);
  const double u2 = uniform(step, kind, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

void RandomStream::normals(std::uint64_t step, DrawKind kind,
                           Vector& out) const {
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = normal(step, kind, static_cast<std::uint64_t>(i));
  }
}

}  // namespace ncs
