#include "rdbridge/measures.hpp"

#include <cmath>
#include <string>

#include "rdbridge/errors.hpp"
#include "rdbridge/logmath.hpp"

namespace rdbridge {

namespace {

void validate_weights(const Vector& w) {
  if (w.size() == 0) throw InvalidInput("probability vector is empty");
  double total = 0.0;
  for (Index i = 0; i < w.size(); ++i) {
    if (!std::isfinite(w[i]) || w[i] < 0.0)
      throw InvalidInput("probability weight " + std::to_string(i) + " is negative or not finite");
    total += w[i];
  }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw InvalidInput("probability weights sum to " + std::to_string(total) + ", not 1");
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

ProbabilityVector::ProbabilityVector(Vector weights, std::optional<Vector> labels)
    : weights_(std::move(weights)), labels_(std::move(labels)) {
  validate_weights(weights_);
  if (labels_ && labels_->size() != weights_.size())
    throw InvalidInput("labels and weights differ in length");
}

ProbabilityVector::ProbabilityVector(std::vector<double> weights,
                                     std::optional<std::vector<double>> labels)
    : ProbabilityVector(to_vector(weights),
                        labels ? std::optional<Vector>(to_vector(*labels)) : std::nullopt) {}

ProbabilityVector ProbabilityVector::uniform(Index n) {
  if (n < 1) throw InvalidInput("uniform distribution needs n >= 1");
  return ProbabilityVector(Vector::Constant(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::point_mass(Index n, Index at) {
  if (n < 1 || at < 0 || at >= n) throw InvalidInput("point mass index out of range");
  Vector w = Vector::Zero(n);
  w[at] = 1.0;
  return ProbabilityVector(std::move(w));
}

ProbabilityVector ProbabilityVector::normalized(Vector weights, std::optional<Vector> labels) {
  double total = 0.0;
  for (Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0)
      throw InvalidInput("cannot normalize a vector with negative or non-finite entries");
    total += weights[i];
  }
  if (!(total > 0.0)) throw InvalidInput("cannot normalize a vector with zero mass");
  weights /= total;
  return ProbabilityVector(std::move(weights), std::move(labels));
}

ProbabilityVector ProbabilityVector::with_labels(Vector labels) const {
  return ProbabilityVector(weights_, std::move(labels));
}

Index ProbabilityVector::support_size() const {
  return static_cast<Index>((weights_.array() > 0.0).count());
}

Coupling::Coupling(Matrix joint) : joint_(std::move(joint)) {
  if (joint_.size() == 0) throw InvalidInput("coupling is empty");
  double total = 0.0;
  for (Index i = 0; i < joint_.rows(); ++i)
    for (Index j = 0; j < joint_.cols(); ++j) {
      const double v = joint_(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw InvalidInput("coupling entry is negative or not finite");
      total += v;
    }
  if (std::abs(total - 1.0) > kMassTolerance)
    throw InvalidInput("coupling mass is " + std::to_string(total) + ", not 1");
}

Vector Coupling::row_sums() const { return joint_.rowwise().sum(); }

Vector Coupling::col_sums() const { return joint_.colwise().sum().transpose(); }

bool Coupling::has_source_marginal(const ProbabilityVector& mu, double tol) const {
  if (mu.size() != source_dim()) return false;
  return (row_sums() - mu.weights()).cwiseAbs().maxCoeff() <= tol;
}

Vector Coupling::disintegration(Index i) const {
  Vector row = joint_.row(i).transpose();
  const double s = row.sum();
  if (s > 0.0) row /= s;
  return row;
}

double kl_divergence(const ProbabilityVector& p, const ProbabilityVector& q) {
  if (p.size() != q.size()) throw InvalidInput("kl_divergence: dimension mismatch");
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) {
    const double term = xlogxy(p[i], q[i]);
    if (std::isinf(term)) return kInf;
    acc += term;
  }
  return acc;
}

double mutual_information(const Coupling& pi) {
  const Vector rows = pi.row_sums();
  const Vector cols = pi.col_sums();
  double acc = 0.0;
  for (Index i = 0; i < pi.source_dim(); ++i)
    for (Index j = 0; j < pi.target_dim(); ++j) acc += xlogxy(pi(i, j), rows[i] * cols[j]);
  return acc;
}

double entropy(const ProbabilityVector& p) {
  double acc = 0.0;
  for (Index i = 0; i < p.size(); ++i) acc -= xlogx(p[i]);
  return acc;
}

}  // namespace rdbridge
