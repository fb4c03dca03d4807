#pragma once

#include "ltt/types.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace ltt {

using Engine = std::mt19937_64;

// Immutable description of a random stream. The (base_seed, path) pair is
// hashed into a 64-bit engine seed, so sub-streams are addressed rather than
// advanced and any worker can rebuild any stream on its own.
class RngStream {
 public:
  explicit RngStream(std::uint64_t base_seed, std::vector<std::uint64_t> path = {});

  RngStream child(std::uint64_t tag) const;
  Engine engine() const { return Engine(seed_); }

  std::uint64_t base_seed() const { return base_seed_; }
  const std::vector<std::uint64_t>& path() const { return path_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t base_seed_;
  std::vector<std::uint64_t> path_;
  std::uint64_t seed_;
};

std::uint64_t splitmix64(std::uint64_t x);

double draw_std_normal(Engine& eng);
double draw_uniform01(Engine& eng);
// dof == 0 returns 0.
double draw_chi_squared(double dof, Engine& eng);
void fill_std_normal(double* out, std::size_t n, Engine& eng);
void fill_std_normal(Matrix& out, Engine& eng);

Vector sample_std_normal_vector(std::size_t d, const RngStream& rng);

}  // namespace ltt
