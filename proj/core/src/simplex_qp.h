#pragma once

#include <Eigen/Dense>

namespace ej::detail {

// Primal active-set solve of
//   min 0.5 z'Bz + c'z  s.t.  sum(z) = 1, z >= 0
// starting from the feasible point `start`. B must be symmetric positive
// definite.
Eigen::VectorXd solve_simplex_qp(const Eigen::MatrixXd& b, const Eigen::VectorXd& c,
                                 const Eigen::VectorXd& start);

}  // namespace ej::detail
