#pragma once

#include <vector>

#include "gibbs_kernel.hpp"
#include "rdbridge/blahut.hpp"

namespace rdbridge::detail {

// min 1/2 y'Hy - b'y over y >= 0, primal active set started from the support
// of x0 (x0 >= 0). An inactive coordinate enters when its gradient is below
// -enter_tol. Returns the best iterate found within max_iter.
Vector nonneg_qp(const Eigen::MatrixXd& h, const Vector& b, const Vector& x0, int max_iter,
                 double enter_tol = 0.0);

struct PolishStats {
  int newton_steps = 0;
  double kkt_before = 0.0;
  double kkt_after = 0.0;
};

// Newton refinement of the reconstruction weights on
//   f(x) = -sum_i mu_i ln (K x)_i + sum_j x_j,   x >= 0,
// whose minimizer has sum 1 and satisfies c_j <= 1 with equality on the
// support: exactly the fixed point of the alternating iteration. Each step
// solves the local quadratic model with nonneg_qp and backtracks (Armijo).
// Leaves x untouched when a source row would need the logsumexp fallback.
PolishStats polish_reconstruction(const GibbsKernel& kernel, const Vector& mu, Vector& x,
                                  double target, long iteration,
                                  std::vector<SupportEvent>& events);

}  // namespace rdbridge::detail
