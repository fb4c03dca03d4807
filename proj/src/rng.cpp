#include "ltt/rng.hpp"

#include "ltt/errors.hpp"

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>

namespace ltt {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::uint64_t hash_path(std::uint64_t base, const std::vector<std::uint64_t>& path) {
  std::uint64_t h = splitmix64(base ^ 0x6a09e667f3bcc908ULL);
  for (std::size_t i = 0; i < path.size(); ++i) {
    // Mix in position as well as value so [1, 0] and [0, 1] differ.
    h = splitmix64(h ^ splitmix64(path[i] + 0x3c6ef372fe94f82bULL * (i + 1)));
  }
  return h;
}

}  // namespace

RngStream::RngStream(std::uint64_t base_seed, std::vector<std::uint64_t> path)
    : base_seed_(base_seed), path_(std::move(path)), seed_(hash_path(base_seed_, path_)) {}

RngStream RngStream::child(std::uint64_t tag) const {
  std::vector<std::uint64_t> p = path_;
  p.push_back(tag);
  return RngStream(base_seed_, std::move(p));
}

double draw_std_normal(Engine& eng) {
  boost::random::normal_distribution<double> dist;
  return dist(eng);
}

double draw_uniform01(Engine& eng) {
  boost::random::uniform_01<double> dist;
  return dist(eng);
}

double draw_chi_squared(double dof, Engine& eng) {
  if (dof < 0.0) throw DomainError("draw_chi_squared: negative degrees of freedom");
  if (dof == 0.0) return 0.0;
  boost::random::chi_squared_distribution<double> dist(dof);
  return dist(eng);
}

void fill_std_normal(double* out, std::size_t n, Engine& eng) {
  boost::random::normal_distribution<double> dist;
  for (std::size_t i = 0; i < n; ++i) out[i] = dist(eng);
}

void fill_std_normal(Matrix& out, Engine& eng) {
  fill_std_normal(out.data(), static_cast<std::size_t>(out.size()), eng);
}

Vector sample_std_normal_vector(std::size_t d, const RngStream& rng) {
  if (d == 0) throw DomainError("sample_std_normal_vector: dimension must be >= 1");
  Vector out(static_cast<Eigen::Index>(d));
  Engine eng = rng.engine();
  fill_std_normal(out.data(), d, eng);
  return out;
}

}  // namespace ltt
