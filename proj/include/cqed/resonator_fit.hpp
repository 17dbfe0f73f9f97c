#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cqed/least_squares.hpp"

namespace cqed::fit {

enum class TraceKind { Transmission, Reflection };

/// A measured or synthetic complex S-parameter trace.
struct Trace {
  std::vector<double> frequency_hz;
  std::vector<std::complex<double>> value;
  TraceKind kind = TraceKind::Transmission;
  std::map<std::string, std::string> metadata;

  /// Throws ValidationError: >= 16 points, equal lengths, strictly increasing frequency.
  void validate() const;
};

/// Resonator rates, all in ordinary frequency (Hz). The line-shape models use
/// (f - f0) and the rates directly, so no 2 pi enters; kappas are half-width
/// (amplitude) rates: |S21|^2 has FWHM 2 (kappa_1 + kappa_2 + kappa_i).
struct ResonatorParams {
  double f0_hz = 0.0;
  double kappa_i_hz = 0.0;
  double kappa1_hz = 0.0;
  double kappa2_hz = 0.0;
  double gamma1_hz = 0.0;  // complex-loss asymmetry, kappa~_n = kappa_n + i gamma_n
  double gamma2_hz = 0.0;

  /// Internal quality factor f0 / (2 kappa_i), i.e. f0 over the internal FWHM.
  double q_int() const { return f0_hz / (2.0 * kappa_i_hz); }
};

std::complex<double> model_s21(const ResonatorParams& p, double f_hz);
std::complex<double> model_s11(const ResonatorParams& p, double f_hz);

struct FitOptions {
  std::optional<ResonatorParams> initial_guess;
  /// S21 alone fixes only the total rate and the product kappa~_1 kappa~_2, so
  /// transmission fits take kappa_2 = coupling_ratio * kappa_1 and gamma_n = 0.
  double coupling_ratio = 1.0;
  /// Transmission traces are assumed magnitude-calibrated; only the gain
  /// phase is fitted. Reflection fits the full complex gain.
  double transmission_gain_magnitude = 1.0;
  bool fit_delay = true;
  LeastSquaresOptions solver{};
};

struct ResonatorFit {
  ResonatorParams params;
  std::complex<double> gain{1.0, 0.0};
  double delay_s = 0.0;
  double q_int = 0.0;
  double residual_norm = 0.0;
  double initial_residual_norm = 0.0;  // at the starting point
  std::vector<std::string> names;      // fitted parameter names (physical units)
  std::vector<double> values;
  std::vector<double> uncertainties;   // 1 sigma, Gauss-Newton
  Eigen::MatrixXd covariance;          // in the physical parameters listed in `names`
  int iterations = 0;
};

/// Joint real+imaginary least squares of a trace against model_s21/model_s11
/// with a complex gain and linear electrical delay as nuisance terms.
/// Auto-initialises from the extremum location, height and 3 dB width.
/// Throws ValidationError for invalid or degenerate traces and FitError on
/// non-convergence.
ResonatorFit fit_trace(const Trace& trace, const FitOptions& opts = {});

/// Independent fits in parallel. Results are in input order; a failed fit
/// rethrows the first error after all workers finish.
std::vector<ResonatorFit> fit_traces(std::span<const Trace> traces, const FitOptions& opts = {});

struct SynthesisOptions {
  double f_lo_hz = 0.0;
  double f_hi_hz = 0.0;
  int points = 401;
  double noise_rel = 0.0;  // sigma per quadrature, relative to max |S|
  std::complex<double> gain{1.0, 0.0};
  double delay_s = 0.0;
  std::uint64_t seed = 1;
};

/// Evaluates the model on a uniform grid with optional gain, delay and noise.
Trace synthesize_trace(TraceKind kind, const ResonatorParams& p, const SynthesisOptions& opts);

/// y = A exp(-t / tau) + C. Returns {A, tau, C}.
struct ExponentialFit {
  double amplitude = 0.0;
  double tau = 0.0;
  double offset = 0.0;
  double residual_norm = 0.0;
};
ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, bool with_offset = true);

/// y = A + B exp(-t / tau) cos(2 pi f t + phi).
struct DampedCosineFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double tau = 0.0;
  double frequency_hz = 0.0;
  double phase = 0.0;
  double residual_norm = 0.0;
};
DampedCosineFit fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                                  std::optional<double> frequency_guess_hz = std::nullopt);

}  // namespace cqed::fit
