#include "cqed/kernels.hpp"

#include "cqed/error.hpp"

namespace cqed::kernels {

using cplx = std::complex<double>;

LindbladGenerator::LindbladGenerator(const Op& hamiltonian, const std::vector<Op>& collapse) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw ValidationError("Hamiltonian must be square");
  const auto d = hamiltonian.rows();
  k = cplx{0.0, -1.0} * hamiltonian;
  for (const Op& op : collapse) {
    if (op.rows() != d || op.cols() != d) throw ValidationError("collapse operator dimension mismatch");
    c.push_back(op);
    c_dag.push_back(op.adjoint());
    k.noalias() -= 0.5 * c_dag.back() * op;
  }
}

void lindblad_rhs_serial(const LindbladGenerator& gen, const Op& rho, Op& out) {
  out.noalias() = gen.k * rho;
  out.noalias() += rho * gen.k.adjoint();
  for (std::size_t i = 0; i < gen.c.size(); ++i) out.noalias() += gen.c[i] * (rho * gen.c_dag[i]);
}

void lindblad_rhs_parallel(const LindbladGenerator& gen, const Op& rho, Op& out) {
  const Eigen::Index d = gen.dim();
  out.resize(d, d);
  const Op k_dag = gen.k.adjoint();
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < d; ++j) {
    Eigen::VectorXcd col = gen.k * rho.col(j) + rho * k_dag.col(j);
    for (std::size_t i = 0; i < gen.c.size(); ++i) col.noalias() += gen.c[i] * (rho * gen.c_dag[i].col(j));
    out.col(j) = col;
  }
}

namespace {

// out += kron(b, a), i.e. the superoperator of rho -> a rho b^T.
void add_kron(Op& out, const Op& b, const Op& a) {
  const Eigen::Index d = a.rows();
  for (Eigen::Index l = 0; l < d; ++l)
    for (Eigen::Index j = 0; j < d; ++j) {
      const cplx s = b(j, l);
      if (s == cplx{}) continue;
      out.block(j * d, l * d, d, d) += s * a;
    }
}

}  // namespace

Op liouvillian_serial(const Op& hamiltonian, const std::vector<Op>& collapse) {
  const LindbladGenerator gen(hamiltonian, collapse);
  const Eigen::Index d = gen.dim();
  const Op id = Op::Identity(d, d);
  Op l = Op::Zero(d * d, d * d);
  add_kron(l, id, gen.k);           // K rho
  add_kron(l, gen.k.conjugate(), id);  // rho K^dag
  for (const Op& c : gen.c) add_kron(l, c.conjugate(), c);
  return l;
}

Op liouvillian_parallel(const Op& hamiltonian, const std::vector<Op>& collapse) {
  const LindbladGenerator gen(hamiltonian, collapse);
  const Eigen::Index d = gen.dim();
  Op l = Op::Zero(d * d, d * d);
  std::vector<Op> c_conj;
  for (const Op& c : gen.c) c_conj.push_back(c.conjugate());
  const Op k_conj = gen.k.conjugate();
  // Each thread owns a block column (fixed l), so writes never overlap.
#pragma omp parallel for schedule(static)
  for (Eigen::Index col = 0; col < d; ++col) {
    for (Eigen::Index j = 0; j < d; ++j) {
      auto block = l.block(j * d, col * d, d, d);
      if (j == col) block += gen.k;
      block.diagonal().array() += k_conj(j, col);
      for (std::size_t i = 0; i < gen.c.size(); ++i) {
        const cplx s = c_conj[i](j, col);
        if (s != cplx{}) block += s * gen.c[i];
      }
    }
  }
  return l;
}

}  // namespace cqed::kernels
