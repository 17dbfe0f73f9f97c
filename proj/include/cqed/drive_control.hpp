#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cqed/bbq.hpp"

namespace cqed::drive {

/// Steady-state displacements of a readout-port drive at `drive_hz`:
///   xi  = eps / (2 delta_r)         (readout)
///   eta = beta_r eps / (2 delta_t)  (transmon)
/// with delta = dressed frequency - drive frequency. Ratios of frequencies,
/// so the 2 pi convention cancels.
struct Displacements {
  double xi = 0.0;
  double eta = 0.0;
};
Displacements steady_displacements(const bbq::DressedSystem& dressed, double epsilon_hz, double drive_hz);

struct SidebandPlan {
  std::size_t mode = 0;
  double epsilon_hz = 0.0;
  double drive_hz = 0.0;        // f0 -> g1 resonance including the drive-induced shift
  double bare_drive_hz = 0.0;   // 2 w_t - w_m - alpha
  double g_hz = 0.0;            // E_C beta_t^2 beta_m beta_r xi_d
  double g_approx_hz = 0.0;     // sqrt(chi_m chi_r) xi_d / 2
  double g_ratio = 0.0;         // g / g_approx
  double xi_t = 0.0;            // eps / (2 delta_t)
  double xi_r = 0.0;            // eps / (2 delta_r)
  double xi_d = 0.0;            // xi_t + xi_r
  double stark_hz = 0.0;        // 2 alpha beta_r^2 (beta_t^2 - beta_m^2) |xi_d|^2
  double resonance_shift_hz = 0.0;  // shift of the f0 - g1 condition applied to drive_hz
  double n_r = 0.0;             // |xi_r|^2
  double n_t = 0.0;             // beta_r^2 |xi_t|^2
  /// Full f0 -> g1 transfer. The transition matrix element is sqrt(2) g,
  /// so populations swap at 1 / (4 sqrt(2) g).
  double pi_time_s = 0.0;
  double half_period_1_over_2g_s = 0.0;  // 1/(2g), the other common convention
  std::vector<std::string> warnings;
};

/// Throws ValidationError if the system has no readout or `mode` is not a
/// storage mode.
SidebandPlan sideband_plan(const bbq::DressedSystem& dressed, std::size_t mode, double epsilon_hz);

/// Drive amplitude that gives sideband rate `target_g_hz`.
double epsilon_for_rate(const bbq::DressedSystem& dressed, std::size_t mode, double target_g_hz);

/// Pure dephasing of a mode from thermal transmon excitations:
///   Gamma = gamma/2 Re[ sqrt((1 + i chi/gamma)^2 + 4 i chi n_th / gamma) - 1 ]
/// chi in Hz (converted to rad/s internally), gamma = 1/T1 of the transmon.
double dephasing_limit(double chi_hz, double gamma_per_s, double n_th);

/// 1/T2 = 1/(2 T1) + Gamma_phi.
double t2_limit(double t1_s, double gamma_phi_per_s);

struct BlockadeReport {
  double omega_hz = 0.0;
  double epsilon_hz = 0.0;
  double chi_hz = 0.0;
  double t_q_s = 0.0;        // min(T1, T2) of the transmon
  bool hierarchy_ok = false; // margin * eps <= Omega and margin * Omega <= chi
  double leakage = 0.0;      // eps / (Omega^2 T_q), angular units
  double purcell = 0.0;      // Omega^2 / (eps chi^2 T_q)
  double optimal_epsilon_hz = 0.0;  // Omega^2 / chi
  double minimum_error = 0.0;       // 2 / (chi T_q)
  double floor = 0.0;               // 1 / (chi T_q)
  double subspace_rabi_hz = 0.0;    // 2 eps
  std::vector<std::string> warnings;
};

BlockadeReport blockade_params(double chi_hz, double omega_hz, double epsilon_hz, double t1_q_s, double t2_q_s,
                               double margin = 5.0);
BlockadeReport blockade_params(const bbq::DressedSystem& dressed, std::size_t mode, double omega_hz,
                               double epsilon_hz, double t1_q_s, double t2_q_s, double margin = 5.0);

}  // namespace cqed::drive
