#pragma once

#include <complex>
#include <span>
#include <utility>
#include <vector>

namespace cqed::geometry {

enum class ModeFamily { TE, TM };

/// Circular-waveguide mode TE_nm / TM_nm (m >= 1).
struct WaveguideMode {
  ModeFamily family = ModeFamily::TE;
  int n = 1;
  int m = 1;
};

/// A drilled hole treated as a circular waveguide below cutoff.
struct HoleSpec {
  double radius_m = 0.0;
  double depth_m = 0.0;
  WaveguideMode mode{};
};

/// m-th positive root of J'_n (TE) or J_n (TM), located by bracketed
/// root finding to 1e-12 relative. Throws ValidationError for n < 0 or m < 1.
double bessel_root(ModeFamily family, int n, int m);

/// f_c = p c / (2 pi a) in vacuum.
double cutoff_frequency(const HoleSpec& hole);

/// sqrt(k^2 - k_c^2). Below cutoff the root is imaginary; `magnitude` then
/// holds the attenuation constant |beta| and `evanescent` is set.
struct Propagation {
  double magnitude = 0.0;  // 1/m
  bool evanescent = false;
  std::complex<double> value() const {
    return evanescent ? std::complex<double>(0.0, magnitude) : std::complex<double>(magnitude, 0.0);
  }
};

Propagation propagation_constant(const HoleSpec& hole, double frequency_hz);

/// Field attenuation exp(-|beta| L) through the hole. Its square bounds the
/// leaked power. Throws ValidationError when f >= f_c ("not evanescent").
///
/// The evanescent external Q grows as exp(+2|beta|L). The printed scaling
/// "Q_ext ~ exp(-beta L)" with imaginary beta is ambiguous in sign; this is the
/// physically forced reading.
double evanescent_attenuation(const HoleSpec& hole, double frequency_hz);

/// Relative external-Q figure of merit exp(2|beta|L) / exp(2|beta_ref|L_ref).
/// Only ratios are meaningful; there is no absolute Q_ext here.
double external_q_ratio(const HoleSpec& hole, const HoleSpec& reference, double frequency_hz);

struct ModeSpectrum {
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<double> spacings;     // Hz, size = frequencies.size() - 1
  std::vector<std::pair<int, int>> labels;  // (n, m) when known, else empty
};

/// nu_nm = (c/2) sqrt((n/h)^2 + (m/l)^2), 1 <= n <= n_max, 1 <= m <= m_max.
/// Exactly degenerate pairs are merged so the result is strictly increasing.
ModeSpectrum rect_spectrum(double height_m, double length_m, int n_max, int m_max);

/// Rectangular cavity with height h(x) = h0 - taper_coeff x^2, x in [0, length].
struct CavityProfile {
  double length_m = 0.0;
  double h0_m = 0.0;
  double taper_coeff = 0.0;  // 1/m
  double width_m = 0.0;      // metadata only
  int grid_points = 2048;

  double height(double x) const { return h0_m - taper_coeff * x * x; }
};

/// Eigenfrequencies below f_max of the lowest-height-branch 1D problem
///   psi'' + (w^2/c^2 - (pi/h(x))^2) psi = 0,  psi(0) = psi(l) = 0,
/// discretised with second-order central differences on `grid_points` nodes.
/// Returns an empty spectrum if nothing lies below f_max.
ModeSpectrum tapered_spectrum(const CavityProfile& profile, double f_max_hz);

/// Runs tapered_spectrum over many profiles in parallel.
std::vector<ModeSpectrum> tapered_spectrum_sweep(std::span<const CavityProfile> profiles, double f_max_hz);

/// Relative standard deviation of consecutive spacings between 0-based mode
/// indices [first, last].
double spacing_spread(const ModeSpectrum& spectrum, std::size_t first, std::size_t last);

}  // namespace cqed::geometry
