#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cqed::bbq {

enum class ModeRole { Readout, Storage };

struct BareMode {
  double freq_hz = 0.0;
  double g_hz = 0.0;  // coupling to the transmon, g (a + a^dag)(b + b^dag)
  ModeRole role = ModeRole::Storage;
  std::string label;
};

/// Bare circuit parameters. `transmon_hz` is the linear (plasma) frequency
/// sqrt(8 E_J E_C); the 0-1 transition sits roughly E_C below it.
struct SystemSpec {
  double transmon_hz = 0.0;
  double e_j_hz = 0.0;  // optional; only used for the E_J/E_C regime check
  double e_c_hz = 0.0;
  std::vector<BareMode> modes;

  /// Throws ValidationError on non-positive frequencies or E_C, or more than
  /// one readout mode.
  void validate() const;
  /// Regime warnings: E_J/E_C < 20, g >= |nu_t - nu_k|.
  std::vector<std::string> warnings() const;
  std::optional<std::size_t> readout_index() const;
};

/// Builds the spec used throughout the examples: a 4.3 GHz transmon with
/// E_C = 140 MHz, nine storage modes 5.45-7.45 GHz with couplings falling
/// from 170 to 50 MHz, and a readout at 8.05 GHz.
SystemSpec nine_mode_system();

struct DressedSystem {
  double e_c_hz = 0.0;
  // Normal-mode frequencies of the linear circuit.
  double transmon_linear_hz = 0.0;
  std::vector<double> mode_linear_hz;
  // 0 -> 1 transition frequencies including the quartic shifts.
  double transmon_hz = 0.0;
  std::vector<double> mode_hz;
  double beta_t = 1.0;
  std::vector<double> beta;
  /// Positive magnitudes. The energies carry them with a minus sign:
  ///   H = ... - alpha/2 n_t(n_t-1) - sum chi_m n_t n_m - sum K_m/2 n_m(n_m-1) - sum_{i<j} K_ij n_i n_j
  double alpha_hz = 0.0;
  std::vector<double> chi_hz;  // transmon-mode cross-Kerr
  Eigen::MatrixXd kerr_hz;     // mode-mode: self-Kerr on the diagonal, cross-Kerr off it
  // Leading-order values for comparison.
  double alpha_first_order_hz = 0.0;
  std::vector<double> chi_first_order_hz;
  int perturbation_order = 1;
  std::vector<ModeRole> roles;
  std::vector<std::string> labels;
  std::vector<std::string> warnings;

  std::optional<std::size_t> readout_index() const;
  std::size_t size() const { return beta.size(); }
};

/// Linear part only: normal modes of the position-coupled quadratic
/// Hamiltonian, dominant-partner assignment, and junction participations
/// normalised so beta_t^2 + sum beta_k^2 = 1. Kerr fields are left empty.
/// Throws NumericalError if two normal modes share a dominant bare partner.
DressedSystem diagonalize_linear(const SystemSpec& spec);

/// beta from mode impedances at the junction port: beta_k / beta_t = sqrt(Z_k / Z_t),
/// normalised to unit sum of squares. Element 0 is beta_t.
std::vector<double> participations_from_impedance(std::span<const double> z_modes_ohm, double z_t_ohm);

/// Reduced zero-point phase fluctuation sqrt(2 pi G_Q Z).
double zpf_phase(double z_ohm);

struct QuarticOptions {
  /// Rayleigh-Schrodinger order (1, 2 or 3) used for alpha, chi and the
  /// transition frequencies. Third order tracks exact diagonalisation to ~1%.
  int order = 3;
  /// Also take mode-mode Kerr entries to `order` (slow for many modes);
  /// otherwise they are first order.
  bool mode_kerr_full_order = false;
};

/// Expands -(E_C/12)(sum_i beta_i (a_i + a_i^dag))^4 in the normal-mode Fock
/// basis and reads alpha, chi and Kerr from energy differences of low-lying
/// product states. Matrix elements come from the operator algebra directly;
/// no closed forms are assumed.
DressedSystem quartic_couplings(const DressedSystem& linear, const QuarticOptions& opts = {});

/// Keeps the transmon and the listed modes with their participations as
/// they are (no renormalisation), dropping the Kerr data. Useful for
/// comparing perturbation theory and numeric_couplings on the same model.
DressedSystem subsystem(const DressedSystem& dressed, std::span<const std::size_t> modes);

/// diagonalize_linear followed by quartic_couplings.
DressedSystem quantize(const SystemSpec& spec, const QuarticOptions& opts = {});

/// Brute-force reference: exact diagonalisation of
///   sum_i Omega_i n_i - (E_C/12)(sum_i beta_i X_i)^4
/// for the transmon and the listed modes, each truncated at `dim` levels.
struct NumericCouplings {
  double alpha_hz = 0.0;
  std::vector<double> chi_hz;      // per listed mode
  std::vector<double> self_kerr_hz;
  double transmon_hz = 0.0;        // E(e) - E(g)
  std::vector<double> mode_hz;
};
NumericCouplings numeric_couplings(const DressedSystem& dressed, std::span<const std::size_t> modes, int dim = 6);

/// floor(T1_cavity / T1_qubit).
int mode_budget(double t1_cavity_s, double t1_qubit_s);

/// Fock-space matrix element <m| (sum_i beta_i X_i)^4 |k> with X = a + a^dag.
double quartic_matrix_element(std::span<const int> m, std::span<const int> k, std::span<const double> betas);

}  // namespace cqed::bbq
