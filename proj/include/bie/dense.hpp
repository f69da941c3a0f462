#pragma once

#include <Eigen/Dense>

#include "bie/nystrom.hpp"

namespace bie {

/// Dense LU oracle: assemble the full system on a discretization and solve.
/// Intended for N small enough that O(N^3) is cheap.
template <class Scalar>
struct DenseSolve {
  MatrixX<Scalar> matrix;
  Eigen::PartialPivLU<MatrixX<Scalar>> lu;

  explicit DenseSolve(const Discretization& disc, const KernelSpec& spec) {
    const Assembler<Scalar> assembler(spec);
    matrix = assemble_system(assembler, disc);
    lu = Eigen::PartialPivLU<MatrixX<Scalar>>(matrix);
  }

  VectorX<Scalar> solve(const VectorX<Scalar>& g) const { return lu.solve(g); }
  double condition_estimate() const {
    const double rc = lu.rcond();
    return rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  }
};

}  // namespace bie
