#pragma once

#include <utility>
#include <vector>

#include "rdbridge/measures.hpp"
#include "rdbridge/types.hpp"

namespace rdbridge {

enum class LossKind { custom, hamming, squared_error };

/// Loss rho(x, y) tabulated on alphabet pairs. Entries are nonnegative and
/// may be +inf. `normalized()` reports whether every row minimum is zero.
class DistortionMatrix {
 public:
  DistortionMatrix() = default;
  explicit DistortionMatrix(Matrix rho, LossKind kind = LossKind::custom);

  Index rows() const { return rho_.rows(); }
  Index cols() const { return rho_.cols(); }
  double operator()(Index i, Index j) const { return rho_(i, j); }
  const Matrix& values() const { return rho_; }
  LossKind kind() const { return kind_; }
  bool normalized() const { return normalized_; }

  /// Largest finite entry (0 for an all-infinite matrix).
  double max_finite() const;
  /// Copy with reconstruction columns reordered: column j of the result is
  /// column perm[j] of this matrix.
  DistortionMatrix permute_columns(const std::vector<Index>& perm) const;

 private:
  Matrix rho_;
  LossKind kind_ = LossKind::custom;
  bool normalized_ = false;
};

/// A finite alphabet with quadrature weights, standing in for a continuous
/// source. `diff_entropy_offset` = sum_i w_i ln(cell_width_i), so that
/// entropy(weights) + offset estimates the differential entropy.
struct SourceSpec {
  Vector grid;
  ProbabilityVector weights;
  Vector cell_widths;
  double diff_entropy_offset = 0.0;

  double differential_entropy() const;
  double mean() const;
  double second_moment() const;
};

DistortionMatrix hamming(Index n);
DistortionMatrix squared_error(const Vector& xgrid, const Vector& ygrid);

struct NormalizedLoss {
  DistortionMatrix rho;
  Vector offsets;
};

/// Subtracts each row minimum. R computed on the result at D corresponds to
/// the original loss at D + sum_i mu_i * offsets_i.
NormalizedLoss normalize_loss(const DistortionMatrix& rho);

struct DMax {
  double value = 0.0;
  Index argmin = 0;
};

/// min_j sum_i mu_i rho(i, j): the distortion of the best constant
/// reconstruction, beyond which R(D) = 0. Ties go to the smallest index.
DMax d_max(const ProbabilityVector& mu, const DistortionMatrix& rho);

/// sum_i mu_i min_j rho(i, j): the smallest distortion with finite rate.
double d_floor(const ProbabilityVector& mu, const DistortionMatrix& rho);

/// Shannon lower bound h - 0.5 ln(2 pi e D) for scalar squared error.
double slb_mse(double diff_entropy, double distortion);

ProbabilityVector bernoulli(double p);

SourceSpec discretize_gaussian(double sigma, double half_width_sigmas, Index points);

/// Uniform source on [lo, hi] sampled at `points` equally spaced grid points
/// (endpoints included), each carrying a cell of width (hi - lo) / (points - 1).
SourceSpec discretize_uniform(double lo, double hi, Index points);

}  // namespace rdbridge
