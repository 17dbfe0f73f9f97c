#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "cqed/bbq.hpp"
#include "cqed/kernels.hpp"

namespace cqed::dyn {

using Op = Eigen::MatrixXcd;
using cplx = std::complex<double>;

/// Truncation of the transmon and of each jointly simulated mode.
struct HilbertConfig {
  int transmon_dim = 3;
  std::vector<int> mode_dims{6};
  std::vector<std::size_t> active_modes{0};  // indices into DressedSystem modes
  std::size_t max_dim = 4096;

  std::size_t total_dim() const;
  /// dims >= 2, one dim per active mode, total within max_dim (the error
  /// message suggests smaller truncations).
  void validate() const;
};

/// Tensor-product space; subsystem 0 is the transmon when built from a
/// HilbertConfig. The first subsystem is the most significant index.
class Space {
 public:
  explicit Space(std::vector<int> dims, std::size_t max_dim = 4096);
  explicit Space(const HilbertConfig& config);

  Eigen::Index dim() const { return total_; }
  std::size_t parts() const { return dims_.size(); }
  int dim_of(std::size_t sub) const { return dims_.at(sub); }

  Op identity() const;
  Op embed(std::size_t sub, const Op& local) const;
  Op destroy(std::size_t sub) const;
  Op number(std::size_t sub) const;
  Op projector(std::size_t sub, int level) const;
  Eigen::Index index(const std::vector<int>& levels) const;
  Eigen::VectorXcd ket(const std::vector<int>& levels) const;
  /// Reduced density matrix of one subsystem.
  Op partial_trace_keep(const Op& rho, std::size_t keep) const;
  /// Diagonal operator from a function of the level tuple.
  Op diagonal(const std::function<double(const std::vector<int>&)>& f) const;

 private:
  std::vector<int> dims_;
  Eigen::Index total_ = 1;
};

Op destroy(int dim);
Op projector(const Eigen::VectorXcd& ket);

struct Decay {
  double t1_s = std::numeric_limits<double>::infinity();
  double t_phi_s = std::numeric_limits<double>::infinity();
  double n_th = 0.0;
  void validate() const;
};

/// Decay per subsystem, in Space order (transmon first).
struct Channels {
  std::vector<Decay> subsystems;
};

/// sqrt(g(1+n)) a, sqrt(g n) a^dag with g = 1/T1, and sqrt(2/T_phi) a^dag a,
/// which dephases |0><1| at 1/T_phi.
std::vector<Op> collapse_operators(const Space& space, const Channels& channels);

/// H(t) = h0 + sum_k [f_k(t) A_k + conj(f_k(t)) A_k^dag], in rad/s.
struct Hamiltonian {
  Op h0;
  struct Drive {
    Op op;
    std::function<cplx(double)> envelope;
  };
  std::vector<Drive> drives;

  Op at(double t) const;
  bool constant() const { return drives.empty(); }
};

struct Frame {
  double transmon_hz = 0.0;
  std::vector<double> mode_hz;  // per active mode
};

/// Diagonal dressed Hamiltonian in a rotating frame (rad/s):
///   (w_t - f_t) n_t - alpha/2 n_t(n_t-1) + sum_m (w_m - f_m) n_m - sum_m chi_m n_t n_m
///   - sum_m K_m/2 n_m(n_m-1) - sum_{i<j} K_ij n_i n_j
/// for the transmon (subsystem 0) and config.active_modes.
Op dispersive_hamiltonian(const bbq::DressedSystem& dressed, const Space& space,
                          const std::vector<std::size_t>& active_modes, const Frame& frame);

/// Lab-frame sum_i Omega_i n_i - (E_C/12)(sum_i beta_i X_i)^4 with the
/// linear normal-mode frequencies, for oracle comparisons.
Op quartic_hamiltonian(const bbq::DressedSystem& dressed, const Space& space,
                       const std::vector<std::size_t>& active_modes);

/// Caps the Hilbert space and builds the dispersive Hamiltonian in the
/// dressed frame (all detunings zero).
Op build_hamiltonian(const bbq::DressedSystem& dressed, const HilbertConfig& config);

struct Observable {
  std::string name;
  Op op;
};

struct EvolveOptions {
  double step_tolerance = 1e-6;   // max |rho_h - rho_{h/2}| accepted per sample
  double max_step_s = 0.0;        // initial RK4 step cap (0: sample spacing)
  double trace_tolerance = 1e-6;  // trace drift that aborts the run
  std::size_t expm_max_dim = 48;  // use the exact propagator up to this Hilbert dim
  bool parallel_kernel = false;
};

struct EvolutionResult {
  std::vector<double> times;
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // values[k][i] = <names[k]>(times[i])
  Op final_state;
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;

  const std::vector<double>& series(const std::string& name) const;
  void write_csv(std::ostream& out) const;
};

/// Lindblad evolution sampled on `times` (times[0] is the time of rho0).
/// Constant Hamiltonians use exp(L dt); time-dependent ones use RK4 with
/// step halving. Throws NumericalError on trace drift.
EvolutionResult evolve(const Hamiltonian& h, const Op& rho0, const std::vector<Op>& collapse,
                       const std::vector<double>& times, const std::vector<Observable>& observables,
                       const EvolveOptions& opts = {});

/// Exact propagation of rho over `duration` under a constant generator.
Op propagate_constant(const Op& h, const std::vector<Op>& collapse, const Op& rho, double duration);

/// Column-stacked superoperator exp(L t).
Op propagator(const Op& h, const std::vector<Op>& collapse, double duration);

double expectation(const Op& rho, const Op& op);

}  // namespace cqed::dyn
