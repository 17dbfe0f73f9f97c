#include "cqed/drive_control.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed::drive {

namespace {

std::size_t require_readout(const bbq::DressedSystem& d) {
  const auto r = d.readout_index();
  if (!r) throw ValidationError("system has no readout mode; the drive enters through the readout port");
  return *r;
}

void require_storage(const bbq::DressedSystem& d, std::size_t mode) {
  if (mode >= d.size()) throw ValidationError("mode index " + std::to_string(mode) + " out of range");
  if (d.roles[mode] != bbq::ModeRole::Storage) throw ValidationError("mode " + std::to_string(mode) + " is not a storage mode");
}

}  // namespace

Displacements steady_displacements(const bbq::DressedSystem& dressed, double epsilon_hz, double drive_hz) {
  if (epsilon_hz < 0.0) throw ValidationError("drive amplitude must be non-negative");
  const std::size_t r = require_readout(dressed);
  const double delta_r = dressed.mode_hz[r] - drive_hz;
  const double delta_t = dressed.transmon_hz - drive_hz;
  if (delta_r == 0.0 || delta_t == 0.0) throw ValidationError("resonant drive has no steady displacement");
  return {epsilon_hz / (2.0 * delta_r), dressed.beta[r] * epsilon_hz / (2.0 * delta_t)};
}

SidebandPlan sideband_plan(const bbq::DressedSystem& dressed, std::size_t mode, double epsilon_hz) {
  const std::size_t r = require_readout(dressed);
  require_storage(dressed, mode);
  if (epsilon_hz < 0.0) throw ValidationError("drive amplitude must be non-negative");

  const double bt = dressed.beta_t, bm = dressed.beta[mode], br = dressed.beta[r];
  SidebandPlan p;
  p.mode = mode;
  p.epsilon_hz = epsilon_hz;
  p.bare_drive_hz = 2.0 * dressed.transmon_hz - dressed.mode_hz[mode] - dressed.alpha_hz;
  p.drive_hz = p.bare_drive_hz;

  // The shift depends on the displacements, which depend on the drive
  // frequency; a few passes converge since the shift is tiny.
  for (int pass = 0; pass < 8; ++pass) {
    const Displacements d = steady_displacements(dressed, epsilon_hz, p.drive_hz);
    p.xi_r = d.xi;
    p.xi_t = d.eta / br;
    p.xi_d = p.xi_t + p.xi_r;
    const double zeta = br * p.xi_d;
    // First-order AC Stark shifts of w_t and w_m from the drive-displaced
    // junction phase: each is -2 E_C beta^2 |zeta|^2.
    p.resonance_shift_hz = -2.0 * dressed.e_c_hz * zeta * zeta * (2.0 * bt * bt - bm * bm);
    const double next = p.bare_drive_hz + p.resonance_shift_hz;
    const bool done = std::abs(next - p.drive_hz) < 1e-6;
    p.drive_hz = next;
    if (done) break;
  }

  p.stark_hz = 2.0 * dressed.alpha_hz * br * br * (bt * bt - bm * bm) * p.xi_d * p.xi_d;
  p.g_hz = dressed.e_c_hz * bt * bt * bm * br * std::abs(p.xi_d);
  p.g_approx_hz = std::sqrt(dressed.chi_hz[mode] * dressed.chi_hz[r]) * std::abs(p.xi_d) / 2.0;
  p.g_ratio = p.g_approx_hz > 0.0 ? p.g_hz / p.g_approx_hz : 1.0;
  p.n_r = p.xi_r * p.xi_r;
  p.n_t = br * br * p.xi_t * p.xi_t;
  if (p.g_hz > 0.0) {
    p.pi_time_s = 1.0 / (4.0 * std::sqrt(2.0) * p.g_hz);
    p.half_period_1_over_2g_s = 1.0 / (2.0 * p.g_hz);
  } else {
    p.pi_time_s = p.half_period_1_over_2g_s = std::numeric_limits<double>::infinity();
  }
  if (std::abs(p.xi_d) > 0.3) p.warnings.push_back("xi_d > 0.3: displacement expansion is losing accuracy");
  if (p.n_r > 100.0) p.warnings.push_back("readout occupation n_r > 100");
  for (const auto& w : dressed.warnings)
    if (w.find("dispersive") != std::string::npos) p.warnings.push_back(w);
  return p;
}

double epsilon_for_rate(const bbq::DressedSystem& dressed, std::size_t mode, double target_g_hz) {
  if (!(target_g_hz > 0.0)) throw ValidationError("target rate must be positive");
  double eps = 1e6;
  for (int i = 0; i < 50; ++i) {
    const double g = sideband_plan(dressed, mode, eps).g_hz;
    if (!(g > 0.0)) throw NumericalError("sideband rate vanishes for this mode");
    const double next = eps * target_g_hz / g;
    if (std::abs(next - eps) <= 1e-12 * eps) return next;
    eps = next;
  }
  return eps;
}

double dephasing_limit(double chi_hz, double gamma_per_s, double n_th) {
  if (!(gamma_per_s > 0.0)) throw ValidationError("gamma must be positive");
  if (n_th < 0.0) throw ValidationError("n_th must be non-negative");
  using cplx = std::complex<double>;
  const double x = angular(chi_hz) / gamma_per_s;
  const cplx one_ix{1.0, x};
  const cplx root = std::sqrt(one_ix * one_ix + cplx{0.0, 4.0 * x * n_th});
  // Re[root - 1] loses digits when it is small; rationalise instead:
  // root - 1 = (root^2 - 1) / (root + 1).
  const cplx diff = (one_ix * one_ix + cplx{0.0, 4.0 * x * n_th} - 1.0) / (root + 1.0);
  return 0.5 * gamma_per_s * diff.real();
}

double t2_limit(double t1_s, double gamma_phi_per_s) {
  if (!(t1_s > 0.0)) throw ValidationError("T1 must be positive");
  if (gamma_phi_per_s < 0.0) throw ValidationError("dephasing rate must be non-negative");
  return 1.0 / (0.5 / t1_s + gamma_phi_per_s);
}

BlockadeReport blockade_params(double chi_hz, double omega_hz, double epsilon_hz, double t1_q_s, double t2_q_s,
                               double margin) {
  if (!(omega_hz > 0.0) || !(epsilon_hz > 0.0)) throw ValidationError("Omega and epsilon must be positive");
  if (!(t1_q_s > 0.0) || !(t2_q_s > 0.0)) throw ValidationError("transmon lifetimes must be positive");
  if (!(margin >= 1.0)) throw ValidationError("hierarchy margin must be >= 1");
  BlockadeReport b;
  const double chi = std::abs(chi_hz);
  b.omega_hz = omega_hz;
  b.epsilon_hz = epsilon_hz;
  b.chi_hz = chi;
  b.t_q_s = std::min(t1_q_s, t2_q_s);
  const double w_eps = angular(epsilon_hz), w_om = angular(omega_hz), w_chi = angular(chi);
  b.leakage = w_eps / (w_om * w_om * b.t_q_s);
  b.purcell = w_om * w_om / (w_eps * w_chi * w_chi * b.t_q_s);
  b.optimal_epsilon_hz = omega_hz * omega_hz / chi;
  b.minimum_error = 2.0 / (w_chi * b.t_q_s);
  b.floor = 1.0 / (w_chi * b.t_q_s);
  b.subspace_rabi_hz = 2.0 * epsilon_hz;
  const bool eps_ok = margin * epsilon_hz <= omega_hz;
  const bool om_ok = margin * omega_hz <= chi;
  b.hierarchy_ok = eps_ok && om_ok;
  if (!eps_ok) b.warnings.push_back("hierarchy violated: epsilon is not << Omega");
  if (!om_ok) b.warnings.push_back("hierarchy violated: Omega is not << chi");
  return b;
}

BlockadeReport blockade_params(const bbq::DressedSystem& dressed, std::size_t mode, double omega_hz,
                               double epsilon_hz, double t1_q_s, double t2_q_s, double margin) {
  if (mode >= dressed.size()) throw ValidationError("mode index " + std::to_string(mode) + " out of range");
  return blockade_params(dressed.chi_hz[mode], omega_hz, epsilon_hz, t1_q_s, t2_q_s, margin);
}

}  // namespace cqed::drive
