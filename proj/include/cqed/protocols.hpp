#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "cqed/bbq.hpp"
#include "cqed/drive_control.hpp"
#include "cqed/dynamics.hpp"

namespace cqed::protocols {

// ---------------------------------------------------------------- sideband

struct SidebandOptions {
  int transmon_dim = 4;
  int mode_dim = 3;
  int samples = 600;
  dyn::Channels channels;  // transmon, mode
};

struct SidebandResult {
  drive::SidebandPlan plan;
  dyn::EvolutionResult evolution;  // p_f, p_f0, p_g1, n_mode
  double zeta = 0.0;               // junction displacement used in the simulation
  double pi_time_s = 0.0;          // first minimum of P_f, infinity if none
  double g_hz = 0.0;               // 1 / (4 sqrt(2) pi_time)
  double min_p_f = 1.0;
  double rate_ratio = 0.0;         // simulated g / plan g
};

/// Prepares |f,0>, drives at the plan frequency and records P_f(t). The
/// drive enters through the quartic term with the junction phase displaced
/// by zeta = beta_r xi_r + beta_t eta; only terms static in the frame
/// rotating at (w_d + w_m)/2 for the transmon and w_m for the mode are
/// kept, and the drive-free part is the dressed diagonal Hamiltonian.
/// `duration_s` <= 0 picks 1.5x the planned pi time.
SidebandResult sideband_protocol(const bbq::DressedSystem& dressed, std::size_t mode, double epsilon_hz,
                                 double duration_s = 0.0, const SidebandOptions& opts = {});

// ---------------------------------------------------------------- blockade

struct BlockadeOptions {
  int transmon_dim = 2;
  int mode_dim = 5;
  int samples = 800;
  dyn::Channels channels;
  double t1_q_s = 86e-6;  // for the validity report only
  double t2_q_s = 86e-6;
};

struct BlockadeResult {
  drive::BlockadeReport report;
  dyn::EvolutionResult evolution;  // p0, p1, p2, p3plus, p_e
  double cavity_detuning_hz = 0.0;  // dressed |g0>-|g1> offset the cavity drive follows
  double predicted_rabi_hz = 0.0;   // 2 eps |<1~|a^dag|0~>|, projected two-level model
  double rabi_hz = 0.0;             // simulated, from the first P1 maximum
  double max_p2 = 0.0;              // P(n >= 2) maximum over the run
};

/// Transmon drive Omega (sigma+ + sigma-) resonant with |g2>-|e2> and a cavity
/// drive eps (a + a^dag) resonant with the dressed |g0>-|g1> transition.
/// `duration_s` <= 0 runs one predicted subspace Rabi period.
BlockadeResult blockade_protocol(const bbq::DressedSystem& dressed, std::size_t mode, double omega_hz,
                                 double epsilon_hz, double duration_s = 0.0, const BlockadeOptions& opts = {});

// -------------------------------------------------------------------- SNAP

struct SnapStep {
  enum class Kind { Displace, Snap } kind = Kind::Displace;
  std::complex<double> beta{};
  std::vector<std::pair<int, double>> phases;  // (Fock level, phase) for Kind::Snap

  static SnapStep displace(std::complex<double> b) { return {Kind::Displace, b, {}}; }
  static SnapStep snap(std::vector<std::pair<int, double>> p) { return {Kind::Snap, {}, std::move(p)}; }
};

struct SnapOptions {
  int mode_dim = 10;
  dyn::Channels channels;             // transmon, mode
  double sigma_chi_product = 4.0;     // selective pulse sigma = this / chi (chi in Hz)
  double truncation_sigmas = 4.0;
  double displacement_sigma_s = 10e-9;
  int samples_per_pulse = 20;
  /// Self-Kerr phases accumulated during a SNAP are diagonal in n, so they
  /// are folded into the SNAP angles (pulsing every level that needs it).
  bool compensate_kerr = true;
};

struct SnapResult {
  dyn::EvolutionResult evolution;  // p_e, n_mode
  Eigen::VectorXcd ideal_state;    // ideal composition acting on |0>
  double fidelity = 0.0;           // <g, ideal| rho |g, ideal>
  double gate_time_s = 0.0;
  dyn::Op mode_state;              // reduced density matrix of the mode
  std::vector<std::string> warnings;
};

/// Applies `steps` in time order to |g,0>. A SNAP phase theta on level n is
/// two selective pi pulses on |g,n>-|e,n> whose axes differ by theta + pi.
SnapResult snap_sequence(const bbq::DressedSystem& dressed, std::size_t mode, const std::vector<SnapStep>& steps,
                         const SnapOptions& opts = {});

/// Ideal unitary composition on |0> in a `dim`-level mode.
Eigen::VectorXcd ideal_snap_state(const std::vector<SnapStep>& steps, int dim);

/// D(beta) restricted to `dim` levels, computed in a larger space so the
/// retained block is accurate.
dyn::Op displacement_operator(int dim, std::complex<double> beta);

// --------------------------------------------------------------- coherence

struct CoherenceOptions {
  double t1_q_s = 86e-6;
  double n_th_q = 0.012;
  double t_phi_q_s = std::numeric_limits<double>::infinity();
  double t1_mode_s = 2e-3;
  double omega_hz = 107e3;
  double epsilon_hz = 10e3;
  int mode_dim = 4;
  int t1_points = 41;
  int ramsey_points = 161;
  double ramsey_detuning_hz = 0.0;  // 0: chosen from the expected T2
};

struct CoherenceResult {
  std::vector<double> t1_delays_s, t1_population;
  std::vector<double> t1_mean_photons;  // <n> decays as exp(-t/T1) whatever leaked into |2>
  std::vector<double> ramsey_delays_s, ramsey_population;
  double t1_fit_s = 0.0;
  double t2_fit_s = 0.0;
  double ramsey_frequency_hz = 0.0;
  double t2_closed_form_s = 0.0;  // t2_limit(T1, dephasing_limit(chi, 1/T1q, n_th))
};

/// T1 (pi, wait, fit <n>; P1 is recorded too) and Ramsey (pi/2, wait, pi/2 with advancing phase)
/// on the |0>-|1> blockade qubit, with a thermal transmon.
CoherenceResult coherence_protocols(const bbq::DressedSystem& dressed, std::size_t mode,
                                    const CoherenceOptions& opts = {});

// ---------------------------------------------------------------- readout

/// P(n) for n < n_max read out by a selective pi pulse on |g,n>-|e,n>
/// followed by P_e, starting from |g><g| (x) rho_mode.
std::vector<double> photon_distribution(const bbq::DressedSystem& dressed, std::size_t mode, const dyn::Op& rho_mode,
                                        int n_max, double sigma_chi_product = 4.0);

}  // namespace cqed::protocols
