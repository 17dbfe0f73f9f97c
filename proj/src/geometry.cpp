#include "cqed/geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <string>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed::geometry {

namespace {

double bessel_j(int n, double x) {
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * std::cyl_bessel_j(static_cast<double>(-n), x);
  return std::cyl_bessel_j(static_cast<double>(n), x);
}

double bessel_j_prime(int n, double x) { return 0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x)); }

std::string mode_name(ModeFamily family, int n, int m) {
  return std::string(family == ModeFamily::TE ? "TE_" : "TM_") + std::to_string(n) + std::to_string(m);
}

void validate_hole(const HoleSpec& hole) {
  if (!(hole.radius_m > 0.0)) throw ValidationError("hole radius must be positive");
  if (!(hole.depth_m >= 0.0)) throw ValidationError("hole depth must be non-negative");
}

}  // namespace

double bessel_root(ModeFamily family, int n, int m) {
  if (n < 0 || m < 1) throw ValidationError("invalid mode index " + mode_name(family, n, m) + " (need n >= 0, m >= 1)");

  auto fn = [&](double x) { return family == ModeFamily::TE ? bessel_j_prime(n, x) : bessel_j(n, x); };

  // The first root of J_n and J'_n lies above n (above 0 for the trivial
  // x = 0 root of J'_0, which is excluded). Consecutive roots are separated
  // by roughly pi, so a 0.2 scan step cannot skip a bracket.
  constexpr double step = 0.2;
  double lo = std::max(static_cast<double>(n), 1e-3);
  double f_lo = fn(lo);
  int found = 0;
  for (int iter = 0; iter < 100000; ++iter) {
    const double hi = lo + step;
    const double f_hi = fn(hi);
    if (f_lo == 0.0) {
      if (++found == m) return lo;
    } else if (f_lo * f_hi < 0.0) {
      if (++found == m) {
        std::uintmax_t max_iter = 200;
        auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); };
        auto [a, b] = boost::math::tools::toms748_solve(fn, lo, hi, f_lo, f_hi, tol, max_iter);
        return 0.5 * (a + b);
      }
    }
    lo = hi;
    f_lo = f_hi;
  }
  throw NumericalError("root search failed for " + mode_name(family, n, m));
}

double cutoff_frequency(const HoleSpec& hole) {
  validate_hole(hole);
  const double p = bessel_root(hole.mode.family, hole.mode.n, hole.mode.m);
  return p * constants::c / (two_pi * hole.radius_m);
}

Propagation propagation_constant(const HoleSpec& hole, double frequency_hz) {
  if (!(frequency_hz > 0.0)) throw ValidationError("frequency must be positive");
  validate_hole(hole);
  const double kc = bessel_root(hole.mode.family, hole.mode.n, hole.mode.m) / hole.radius_m;
  const double k = two_pi * frequency_hz / constants::c;
  // (k - kc)(k + kc) keeps precision near cutoff.
  const double d = (k - kc) * (k + kc);
  Propagation out;
  out.evanescent = d < 0.0;
  out.magnitude = std::sqrt(std::abs(d));
  return out;
}

double evanescent_attenuation(const HoleSpec& hole, double frequency_hz) {
  const Propagation beta = propagation_constant(hole, frequency_hz);
  if (!beta.evanescent) throw ValidationError("not evanescent: frequency is at or above the hole cutoff");
  return std::exp(-beta.magnitude * hole.depth_m);
}

double external_q_ratio(const HoleSpec& hole, const HoleSpec& reference, double frequency_hz) {
  const Propagation b = propagation_constant(hole, frequency_hz);
  const Propagation b_ref = propagation_constant(reference, frequency_hz);
  if (!b.evanescent || !b_ref.evanescent) throw ValidationError("not evanescent: external Q ratio needs f < f_c");
  return std::exp(2.0 * (b.magnitude * hole.depth_m - b_ref.magnitude * reference.depth_m));
}

namespace {

ModeSpectrum finalize(std::vector<double> freqs, std::vector<std::pair<int, int>> labels) {
  ModeSpectrum s;
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    if (!s.frequencies.empty() && freqs[i] <= s.frequencies.back() * (1.0 + 1e-12)) continue;
    s.frequencies.push_back(freqs[i]);
    if (!labels.empty()) s.labels.push_back(labels[i]);
  }
  for (std::size_t i = 1; i < s.frequencies.size(); ++i) s.spacings.push_back(s.frequencies[i] - s.frequencies[i - 1]);
  return s;
}

}  // namespace

ModeSpectrum rect_spectrum(double height_m, double length_m, int n_max, int m_max) {
  if (!(height_m > 0.0) || !(length_m > 0.0)) throw ValidationError("cavity height and length must be positive");
  if (n_max < 1 || m_max < 1) throw ValidationError("n_max and m_max must be >= 1");
  std::vector<std::pair<double, std::pair<int, int>>> modes;
  for (int n = 1; n <= n_max; ++n)
    for (int m = 1; m <= m_max; ++m) {
      const double f = 0.5 * constants::c * std::hypot(n / height_m, m / length_m);
      modes.push_back({f, {n, m}});
    }
  std::sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<double> freqs;
  std::vector<std::pair<int, int>> labels;
  for (const auto& [f, nm] : modes) {
    freqs.push_back(f);
    labels.push_back(nm);
  }
  return finalize(std::move(freqs), std::move(labels));
}

ModeSpectrum tapered_spectrum(const CavityProfile& profile, double f_max_hz) {
  if (!(profile.length_m > 0.0)) throw ValidationError("cavity length must be positive");
  if (profile.grid_points < 64) throw ValidationError("grid_points must be >= 64");
  const int n_nodes = profile.grid_points;
  const int n_inner = n_nodes - 2;
  const double dx = profile.length_m / (n_nodes - 1);
  const double inv_dx2 = 1.0 / (dx * dx);

  Eigen::VectorXd diag(n_inner);
  Eigen::VectorXd sub = Eigen::VectorXd::Constant(n_inner - 1, -inv_dx2);
  // Check the end points too, not only interior nodes.
  if (!(profile.height(0.0) > 0.0) || !(profile.height(profile.length_m) > 0.0))
    throw ValidationError("cavity height must stay positive over the full length");
  for (int i = 0; i < n_inner; ++i) {
    const double x = (i + 1) * dx;
    const double h = profile.height(x);
    if (!(h > 0.0)) throw ValidationError("cavity height must stay positive over the full length");
    const double kc = std::numbers::pi / h;
    diag[i] = 2.0 * inv_dx2 + kc * kc;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");

  std::vector<double> freqs;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    const double k2 = solver.eigenvalues()[i];
    if (k2 <= 0.0) continue;
    const double f = constants::c * std::sqrt(k2) / two_pi;
    if (f >= f_max_hz) break;
    freqs.push_back(f);
  }
  return finalize(std::move(freqs), {});
}

std::vector<ModeSpectrum> tapered_spectrum_sweep(std::span<const CavityProfile> profiles, double f_max_hz) {
  std::vector<ModeSpectrum> out(profiles.size());
  std::vector<std::exception_ptr> errors(profiles.size());
  const auto count = static_cast<std::ptrdiff_t>(profiles.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[i] = tapered_spectrum(profiles[i], f_max_hz);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

double spacing_spread(const ModeSpectrum& spectrum, std::size_t first, std::size_t last) {
  if (last >= spectrum.frequencies.size() || last <= first + 1)
    throw ValidationError("spacing_spread needs at least three modes in range");
  std::vector<double> s;
  for (std::size_t i = first + 1; i <= last; ++i) s.push_back(spectrum.frequencies[i] - spectrum.frequencies[i - 1]);
  double mean = 0.0;
  for (double v : s) mean += v;
  mean /= static_cast<double>(s.size());
  double var = 0.0;
  for (double v : s) var += (v - mean) * (v - mean);
  var /= static_cast<double>(s.size());
  return std::sqrt(var) / mean;
}

}  // namespace cqed::geometry
