#include "rdbridge/distortion.hpp"

#include <cmath>
#include <numbers>

#include "rdbridge/errors.hpp"
#include "rdbridge/logmath.hpp"

namespace rdbridge {

namespace {

double row_min(const Matrix& rho, Index i) {
  double m = kInf;
  for (Index j = 0; j < rho.cols(); ++j) m = std::min(m, rho(i, j));
  return m;
}

void check_dims(const ProbabilityVector& mu, const DistortionMatrix& rho) {
  if (mu.size() != rho.rows())
    throw InvalidInput("source distribution has " + std::to_string(mu.size()) +
                       " atoms but the loss has " + std::to_string(rho.rows()) + " rows");
}

}  // namespace

DistortionMatrix::DistortionMatrix(Matrix rho, LossKind kind) : rho_(std::move(rho)), kind_(kind) {
  if (rho_.size() == 0) throw InvalidInput("distortion matrix is empty");
  for (Index i = 0; i < rho_.rows(); ++i)
    for (Index j = 0; j < rho_.cols(); ++j)
      if (std::isnan(rho_(i, j)) || rho_(i, j) < 0.0)
        throw InvalidInput("distortion entries must be nonnegative");
  normalized_ = true;
  for (Index i = 0; i < rho_.rows() && normalized_; ++i) normalized_ = row_min(rho_, i) == 0.0;
}

double DistortionMatrix::max_finite() const {
  double m = 0.0;
  for (Index i = 0; i < rho_.rows(); ++i)
    for (Index j = 0; j < rho_.cols(); ++j)
      if (std::isfinite(rho_(i, j))) m = std::max(m, rho_(i, j));
  return m;
}

DistortionMatrix DistortionMatrix::permute_columns(const std::vector<Index>& perm) const {
  if (static_cast<Index>(perm.size()) != cols()) throw InvalidInput("permutation size mismatch");
  Matrix out(rows(), cols());
  for (Index j = 0; j < cols(); ++j) out.col(j) = rho_.col(perm[static_cast<std::size_t>(j)]);
  return DistortionMatrix(std::move(out), kind_);
}

double SourceSpec::differential_entropy() const { return entropy(weights) + diff_entropy_offset; }

double SourceSpec::mean() const { return weights.weights().dot(grid); }

double SourceSpec::second_moment() const {
  return weights.weights().dot(grid.cwiseProduct(grid));
}

DistortionMatrix hamming(Index n) {
  if (n < 1) throw InvalidInput("hamming loss needs n >= 1");
  Matrix rho = Matrix::Ones(n, n);
  rho.diagonal().setZero();
  return DistortionMatrix(std::move(rho), LossKind::hamming);
}

DistortionMatrix squared_error(const Vector& xgrid, const Vector& ygrid) {
  if (xgrid.size() == 0 || ygrid.size() == 0) throw InvalidInput("squared_error: empty grid");
  Matrix rho(xgrid.size(), ygrid.size());
  for (Index i = 0; i < xgrid.size(); ++i)
    for (Index j = 0; j < ygrid.size(); ++j) {
      const double d = xgrid[i] - ygrid[j];
      rho(i, j) = d * d;
    }
  return DistortionMatrix(std::move(rho), LossKind::squared_error);
}

NormalizedLoss normalize_loss(const DistortionMatrix& rho) {
  Matrix out = rho.values();
  Vector offsets(rho.rows());
  for (Index i = 0; i < rho.rows(); ++i) {
    const double m = row_min(out, i);
    if (!std::isfinite(m))
      throw InvalidInput("row " + std::to_string(i) + " of the loss is entirely +inf");
    offsets[i] = m;
    for (Index j = 0; j < out.cols(); ++j) out(i, j) -= m;
  }
  return {DistortionMatrix(std::move(out), rho.kind()), std::move(offsets)};
}

DMax d_max(const ProbabilityVector& mu, const DistortionMatrix& rho) {
  check_dims(mu, rho);
  DMax best{kInf, 0};
  for (Index j = 0; j < rho.cols(); ++j) {
    double e = 0.0;
    for (Index i = 0; i < rho.rows(); ++i)
      if (mu[i] > 0.0) e += mu[i] * rho(i, j);
    if (e < best.value) best = {e, j};
  }
  return best;
}

double d_floor(const ProbabilityVector& mu, const DistortionMatrix& rho) {
  check_dims(mu, rho);
  double acc = 0.0;
  for (Index i = 0; i < rho.rows(); ++i)
    if (mu[i] > 0.0) acc += mu[i] * row_min(rho.values(), i);
  return acc;
}

double slb_mse(double diff_entropy, double distortion) {
  if (!(distortion > 0.0)) throw InvalidInput("slb_mse: distortion must be positive");
  return diff_entropy - 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * distortion);
}

ProbabilityVector bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("bernoulli: p must lie in [0, 1]");
  Vector w(2);
  w << 1.0 - p, p;
  Vector labels(2);
  labels << 0.0, 1.0;
  return ProbabilityVector(std::move(w), std::move(labels));
}

SourceSpec discretize_gaussian(double sigma, double half_width_sigmas, Index points) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidInput("gaussian: sigma must be positive");
  if (!(half_width_sigmas >= 4.0)) throw InvalidInput("gaussian: half width must be >= 4 sigma");
  if (points < 3 || points % 2 == 0) throw InvalidInput("gaussian: points must be odd and >= 3");

  const double half = half_width_sigmas * sigma;
  const double step = 2.0 * half / static_cast<double>(points - 1);
  SourceSpec s;
  s.grid.resize(points);
  Vector w(points);
  for (Index i = 0; i < points; ++i) {
    // Mirror the upper half so the grid (and hence the mean) is exactly symmetric.
    const Index k = i - (points - 1) / 2;
    s.grid[i] = static_cast<double>(k) * step;
    const double z = s.grid[i] / sigma;
    w[i] = std::exp(-0.5 * z * z);
  }
  s.weights = ProbabilityVector::normalized(std::move(w), s.grid);
  s.cell_widths = Vector::Constant(points, step);
  s.diff_entropy_offset = std::log(step);
  return s;
}

SourceSpec discretize_uniform(double lo, double hi, Index points) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw InvalidInput("uniform: need finite lo < hi");
  if (points < 2) throw InvalidInput("uniform: points must be >= 2");
  const double step = (hi - lo) / static_cast<double>(points - 1);
  SourceSpec s;
  s.grid = Vector::LinSpaced(points, lo, hi);
  s.weights = ProbabilityVector(Vector::Constant(points, 1.0 / static_cast<double>(points)), s.grid);
  s.cell_widths = Vector::Constant(points, step);
  s.diff_entropy_offset = std::log(step);
  return s;
}

}  // namespace rdbridge
