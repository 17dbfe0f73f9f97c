#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cqed::bcs {

enum class GapModel {
  Interpolation,  // Delta0 tanh(1.74 sqrt(Tc/T - 1)), Delta0 = 1.764 k_B Tc
  GapEquation,    // weak-coupling BCS gap equation solved by quadrature (slow, for validation)
};

/// Superconducting gap in joules.
double gap(double temperature_k, double tc_k, GapModel model = GapModel::Interpolation);

/// Complex conductivity normalised to the normal-state value.
struct Conductivity {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

/// Mattis-Bardeen sigma1/sigma_n and sigma2/sigma_n for hf < 2 Delta(T).
/// Throws ValidationError for T <= 0, T >= Tc and in the pair-breaking regime.
Conductivity mattis_bardeen(double frequency_hz, double temperature_k, double tc_k,
                            GapModel model = GapModel::Interpolation, double rel_tol = 1e-8);

/// Exact T = 0 value of sigma2/sigma_n in terms of complete elliptic integrals.
/// Tends to pi Delta0 / (h f) for h f << Delta0.
double sigma2_zero_temperature(double frequency_hz, double tc_k);

/// mattis_bardeen over a temperature grid, evaluated in parallel.
std::vector<Conductivity> mattis_bardeen_sweep(double frequency_hz, std::span<const double> temperatures_k,
                                               double tc_k, GapModel model = GapModel::Interpolation);

struct TempSweep {
  std::vector<double> temperature_k;
  std::vector<double> df_over_f;  // may be empty
  std::vector<double> q_int;      // may be empty
  double f0_hz = 0.0;

  bool has_shift() const { return !df_over_f.empty(); }
  bool has_q() const { return !q_int.empty(); }
  /// Increasing temperatures, matched lengths, f0 > 0, at least one data column.
  void validate() const;
};

/// Fractional frequency shift, using delta sigma2 = sigma2(0) - sigma2(T):
///   df/f0 = -p_mag [ (sigma2(T) / sigma2(0))^nu - 1 ].
/// With nu = -1/3 this is -p_mag (lambda(T)/lambda(0) - 1), which starts at 0
/// and is negative for T > 0.
double frequency_shift_model(double temperature_k, double f0_hz, double p_mag, double tc_k, double nu = -1.0 / 3.0);

/// Q_int(T) = (1/Q_max + p_mag sigma1/sigma2)^-1.
double q_int_model(double temperature_k, double f0_hz, double p_mag, double tc_k, double q_max);

struct BcsFit {
  double p_mag = 0.0;
  double tc_k = 0.0;
  double nu = -1.0 / 3.0;
  std::optional<double> q_int_max;
  std::optional<double> lambda_l_m;  // p_mag / S_m, only when S_m was given
  double p_mag_sigma = 0.0;
  double tc_sigma = 0.0;
  double residual_norm = 0.0;  // in the weighted units of the fit
  int iterations = 0;
};

struct BcsFitOptions {
  double nu = -1.0 / 3.0;
  std::optional<double> p_mag_fixed;  // Q fit only: reuse p_mag from a frequency fit
  std::optional<double> surface_participation_per_m;  // S_m, enables lambda_L
  int max_iterations = 200;
};

BcsFit fit_frequency_shift(const TempSweep& sweep, const BcsFitOptions& opts = {});
BcsFit fit_q_vs_temperature(const TempSweep& sweep, const BcsFitOptions& opts = {});
/// Shares p_mag and Tc between both data columns.
BcsFit fit_joint(const TempSweep& sweep, const BcsFitOptions& opts = {});

/// Squared weighted residual of the joint model at given parameters, the
/// quantity fit_joint minimises.
double joint_cost(const TempSweep& sweep, double p_mag, double tc_k, double q_max, double nu = -1.0 / 3.0);

/// lambda_L = p_mag / S_m.
double london_depth(double p_mag, double surface_participation_per_m);

/// Mean free path from lambda = lambda0 sqrt(1 + xi0 / l).
double pippard_mean_free_path(double lambda_m, double lambda0_m = 16e-9, double xi0_m = 1600e-9);

}  // namespace cqed::bcs
