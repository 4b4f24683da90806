#pragma once

#include <optional>
#include <vector>

#include "rdbridge/types.hpp"

namespace rdbridge {

inline constexpr double kMassTolerance = 1e-12;

/// A finite probability distribution, optionally tagged with the real-valued
/// alphabet points it lives on. Construction validates: weights must be
/// nonnegative and sum to one within kMassTolerance. Inputs that fail are
/// rejected, never silently renormalized.
class ProbabilityVector {
 public:
  ProbabilityVector() = default;
  explicit ProbabilityVector(Vector weights, std::optional<Vector> labels = std::nullopt);
  ProbabilityVector(std::vector<double> weights,
                    std::optional<std::vector<double>> labels = std::nullopt);

  static ProbabilityVector uniform(Index n);
  static ProbabilityVector point_mass(Index n, Index at);
  /// Rescales a nonnegative vector with positive finite sum; for solver
  /// internals, where the unnormalized mass is a rounding artifact.
  static ProbabilityVector normalized(Vector weights, std::optional<Vector> labels = std::nullopt);

  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }
  const Vector& weights() const { return weights_; }
  bool has_labels() const { return labels_.has_value(); }
  const std::optional<Vector>& labels() const { return labels_; }

  ProbabilityVector with_labels(Vector labels) const;
  Index support_size() const;

 private:
  Vector weights_;
  std::optional<Vector> labels_;
};

/// A joint distribution on X x Y. Rows are indexed by the source alphabet;
/// row i divided by its row sum is the disintegration pi_x.
class Coupling {
 public:
  Coupling() = default;
  explicit Coupling(Matrix joint);

  Index source_dim() const { return joint_.rows(); }
  Index target_dim() const { return joint_.cols(); }
  const Matrix& joint() const { return joint_; }
  double operator()(Index i, Index j) const { return joint_(i, j); }

  Vector row_sums() const;
  Vector col_sums() const;
  /// True when the row sums reproduce mu within tol (membership in Pi(mu, .)).
  bool has_source_marginal(const ProbabilityVector& mu, double tol = 1e-10) const;
  /// Row-normalized conditional law of Y given X = x_i. Zero rows map to zero.
  Vector disintegration(Index i) const;

 private:
  Matrix joint_;
};

/// sum p_i ln(p_i / q_i) in nats; +inf when p is not absolutely continuous
/// with respect to q.
double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q);

/// D_KL(pi || mu (x) nu) with the marginals taken from pi itself.
double mutual_information(const Coupling& pi);

double entropy(const ProbabilityVector& p);

}  // namespace rdbridge
