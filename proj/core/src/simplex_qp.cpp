#include "simplex_qp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace ej::detail {

Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& b, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& start) {
  const auto m = static_cast<int>(c.size());
  Eigen::VectorXd z = start;
  std::vector<bool> active(static_cast<std::size_t>(m), false);
  for (int i = 0; i < m; ++i) {
    if (z[i] <= 0.0) {
      z[i] = 0.0;
      active[static_cast<std::size_t>(i)] = true;
    }
  }

  const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
  const int max_iter = 20 * m + 50;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<int> free;
    for (int i = 0; i < m; ++i) {
      if (!active[static_cast<std::size_t>(i)]) free.push_back(i);
    }
    const auto nf = static_cast<int>(free.size());
    const Eigen::VectorXd q = b * z + c;

    Eigen::VectorXd step = Eigen::VectorXd::Zero(m);
    double mu = 0.0;
    if (nf == 1) {
      mu = -q[free[0]];
    } else {
      Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(nf + 1, nf + 1);
      Eigen::VectorXd rhs(nf + 1);
      for (int r = 0; r < nf; ++r) {
        for (int s = 0; s < nf; ++s) kkt(r, s) = b(free[r], free[s]);
        kkt(r, nf) = 1.0;
        kkt(nf, r) = 1.0;
        rhs[r] = -q[free[r]];
      }
      rhs[nf] = 0.0;
      const Eigen::VectorXd sol = kkt.fullPivLu().solve(rhs);
      for (int r = 0; r < nf; ++r) step[free[r]] = sol[r];
      mu = sol[nf];
    }

    if (step.cwiseAbs().maxCoeff() <= 1e-15 * std::max(1.0, z.cwiseAbs().maxCoeff())) {
      // Stationary on the working set; release the bound with the most
      // negative multiplier, if any.
      int release = -1;
      double most_negative = -1e-12 * scale;
      for (int i = 0; i < m; ++i) {
        if (!active[static_cast<std::size_t>(i)]) continue;
        const double nu = q[i] + mu;
        if (nu < most_negative) {
          most_negative = nu;
          release = i;
        }
      }
      if (release < 0) break;
      active[static_cast<std::size_t>(release)] = false;
      continue;
    }

    double alpha = 1.0;
    int blocking = -1;
    for (int i : free) {
      if (step[i] < 0.0) {
        const double ratio = -z[i] / step[i];
        if (ratio < alpha) {
          alpha = ratio;
          blocking = i;
        }
      }
    }
    z += alpha * step;
    if (blocking >= 0) {
      z[blocking] = 0.0;
      active[static_cast<std::size_t>(blocking)] = true;
    }
  }

  for (int i = 0; i < m; ++i) z[i] = std::max(0.0, z[i]);
  const double sum = z.sum();
  if (sum > 0.0) z /= sum;
  return z;
}

}  // namespace ej::detail
