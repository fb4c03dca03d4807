#pragma once

#include "ltt/rng.hpp"
#include "ltt/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ltt {

enum class Prior { PointMass, Subspace };

std::string to_string(Prior p);
Prior parse_prior(const std::string& s);

struct ModelParams {
  double gamma = 0.2;
  double h = 4.0;
  std::size_t m = 1000;
  std::size_t d = 200;
  Prior prior = Prior::PointMass;
  double q = 0.1;
  Vector v;  // unit alternative direction, length d

  double c() const { return static_cast<double>(d) / static_cast<double>(m); }

  void validate() const;

  // d is rounded from c * m; the exact ratio actually used is c().
  static ModelParams make(Prior prior, double gamma, double c, double h, std::size_t m,
                          double q = 0.1);
  static ModelParams defaults(Prior prior) { return make(prior, 0.2, 0.2, 4.0, 1000); }
};

Vector random_unit_vector(std::size_t d, const RngStream& rng);

// Latent means are stored as a per-row coefficient b_j along v, so that
// theta_j = b_j * v; theta() materializes the full matrix on request.
struct Dataset {
  Matrix X;
  std::vector<std::uint8_t> labels;  // 1 = drawn as alternative
  Vector coef;
  ModelParams params;

  std::size_t m() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t d() const { return static_cast<std::size_t>(X.cols()); }
  // Member of H1, i.e. theta_j != 0.
  bool nonnull(std::size_t j) const { return labels[j] != 0 && coef[static_cast<Eigen::Index>(j)] != 0.0; }
  std::size_t num_nonnull() const;
  Vector theta_row(std::size_t j) const;
  Matrix theta() const;
};

struct MaskedData {
  Matrix X_learn;
  Matrix X_score;
  std::vector<std::uint8_t> learn_synthetic;  // empty for fission
};

Dataset generate_dataset(const ModelParams& params, const RngStream& rng);

MaskedData fission_split(const Dataset& data, double pi_split, const RngStream& rng);
// Inverse of the fission rotation: x = sqrt(pi) x_learn + sqrt(1 - pi) x_score.
Matrix fission_invert(const MaskedData& masked, double pi_split);

MaskedData augment_nulls(const Dataset& data, std::size_t m_tilde, const RngStream& rng);
// The m_tilde null rows that augment_nulls would append, drawn sequentially
// from the stream so a shorter pool is a prefix of a longer one.
Matrix draw_null_rows(std::size_t rows, std::size_t d, const RngStream& rng);

Matrix generate_knockoff_copies(const Dataset& data, const RngStream& rng);

double loglik_ratio(const Eigen::Ref<const Vector>& x, Prior prior, double h, const Vector& v_hat);
double transformed_score(const Eigen::Ref<const Vector>& x, Prior prior, const Vector& v_hat);
Vector transformed_scores(const Matrix& X, Prior prior, const Vector& v_hat);
Vector loglik_ratios(const Matrix& X, Prior prior, double h, const Vector& v_hat);

}  // namespace ltt
