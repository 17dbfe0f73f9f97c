#pragma once

#include <Eigen/Dense>
#include <vector>

namespace cqed::kernels {

using Op = Eigen::MatrixXcd;

/// Precomputed pieces of the Lindblad generator
///   d rho/dt = -i[H, rho] + sum_k (C_k rho C_k^dag - {C_k^dag C_k, rho}/2)
/// written as K rho + rho K^dag + sum_k C_k rho C_k^dag with
/// K = -i H - sum_k C_k^dag C_k / 2.
struct LindbladGenerator {
  Op k;
  std::vector<Op> c;
  std::vector<Op> c_dag;

  LindbladGenerator() = default;
  LindbladGenerator(const Op& hamiltonian, const std::vector<Op>& collapse);
  Eigen::Index dim() const { return k.rows(); }
};

/// Reference implementation built from whole-matrix Eigen products.
void lindblad_rhs_serial(const LindbladGenerator& gen, const Op& rho, Op& out);

/// Same result, parallel over output columns. Agrees with the serial
/// version to rounding.
void lindblad_rhs_parallel(const LindbladGenerator& gen, const Op& rho, Op& out);

/// Column-stacked superoperator L with vec(d rho/dt) = L vec(rho).
Op liouvillian_serial(const Op& hamiltonian, const std::vector<Op>& collapse);
Op liouvillian_parallel(const Op& hamiltonian, const std::vector<Op>& collapse);

}  // namespace cqed::kernels
