#include "cqed/bcs_surface.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <string>

#include "cqed/error.hpp"
#include "cqed/least_squares.hpp"
#include "cqed/units.hpp"

namespace cqed::bcs {

using constants::h;
using constants::k_B;

namespace {

constexpr double kGapRatio = 1.764;

double gap_equation(double t, double tc) {
  // Cutoff-free form: the integrand difference decays like Delta^2 / xi^3.
  const double kt = k_B * t;
  const double ktc = k_B * tc;
  auto mismatch = [&](double delta) {
    auto integrand = [&](double xi) {
      const double e = std::hypot(xi, delta);
      const double ref = xi < 1e-12 * ktc ? 0.5 / ktc : std::tanh(xi / (2.0 * ktc)) / xi;
      return std::tanh(e / (2.0 * kt)) / e - ref;
    };
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(integrand, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
  };
  const double hi = 1.2 * kGapRatio * ktc;
  double lo = 1e-6 * ktc;
  if (mismatch(lo) <= 0.0) return 0.0;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::abs(a); };
  auto [a, b] = boost::math::tools::toms748_solve(mismatch, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

// f(a) - f(b) for Fermi functions, written so neither branch overflows into
// a cancellation.
double fermi_difference(double a, double b, double kt) {
  const double ca = std::cosh(a / (2.0 * kt));
  const double cb = std::cosh(b / (2.0 * kt));
  if (!std::isfinite(ca) || !std::isfinite(cb)) return 0.0;
  return std::sinh((b - a) / (2.0 * kt)) / (2.0 * ca * cb);
}

}  // namespace

double gap(double temperature_k, double tc_k, GapModel model) {
  if (!(tc_k > 0.0)) throw ValidationError("Tc must be positive");
  if (!(temperature_k > 0.0)) throw ValidationError("temperature must be positive");
  if (temperature_k >= tc_k) throw ValidationError("temperature must be below Tc");
  if (model == GapModel::GapEquation) return gap_equation(temperature_k, tc_k);
  return kGapRatio * k_B * tc_k * std::tanh(1.74 * std::sqrt(tc_k / temperature_k - 1.0));
}

Conductivity mattis_bardeen(double frequency_hz, double temperature_k, double tc_k, GapModel model, double rel_tol) {
  if (!(frequency_hz > 0.0)) throw ValidationError("frequency must be positive");
  const double delta = gap(temperature_k, tc_k, model);
  const double w = h * frequency_hz;
  if (w >= 2.0 * delta)
    throw ValidationError("pair-breaking regime unsupported: h f >= 2 Delta(T) at T = " + std::to_string(temperature_k) + " K");
  const double kt = k_B * temperature_k;

  Conductivity out;

  // sigma1: E = Delta cosh u removes the sqrt(E^2 - Delta^2) edge singularity.
  // Thermal factors vanish beyond ~50 kT above the gap.
  {
    const double u_max = std::acosh(1.0 + 60.0 * kt / delta);
    auto integrand = [&](double u) {
      const double e = delta * std::cosh(u);
      const double ew = e + w;
      const double num = e * e + delta * delta + w * e;
      return fermi_difference(e, ew, kt) * num / std::sqrt((ew - delta) * (ew + delta));
    };
    const double integral =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, u_max, 15, rel_tol);
    out.sigma1 = 2.0 / w * integral;
  }

  // sigma2 over [Delta - hf, Delta], E = m - r cos(theta) absorbs both
  // inverse-square-root endpoints.
  {
    const double m = delta - 0.5 * w;
    const double r = 0.5 * w;
    auto integrand = [&](double theta) {
      const double s = std::sin(theta);
      const double e = m - r * std::cos(theta);
      const double ew = e + w;
      const double a = (delta - e) * (delta + e);
      const double b = (ew - delta) * (ew + delta);
      if (a <= 0.0 || b <= 0.0) return 0.0;
      const double num = e * e + delta * delta + w * e;
      return std::tanh(ew / (2.0 * kt)) * num * r * s / std::sqrt(a * b);
    };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        integrand, 0.0, std::numbers::pi, 15, rel_tol);
    out.sigma2 = integral / w;
  }
  return out;
}

double sigma2_zero_temperature(double frequency_hz, double tc_k) {
  if (!(frequency_hz > 0.0) || !(tc_k > 0.0)) throw ValidationError("frequency and Tc must be positive");
  const double delta = kGapRatio * k_B * tc_k;
  const double w = h * frequency_hz;
  if (w >= 2.0 * delta) throw ValidationError("pair-breaking regime unsupported: h f >= 2 Delta(0)");
  const double x = w / (2.0 * delta);
  const double y = 1.0 / x;
  const double k = 2.0 * std::sqrt(x) / (1.0 + x);
  return 0.5 * (1.0 + y) * std::comp_ellint_2(k) - 0.5 * (1.0 - y) * std::comp_ellint_1(k);
}

std::vector<Conductivity> mattis_bardeen_sweep(double frequency_hz, std::span<const double> temperatures_k,
                                               double tc_k, GapModel model) {
  std::vector<Conductivity> out(temperatures_k.size());
  std::vector<std::exception_ptr> errors(temperatures_k.size());
  const auto count = static_cast<std::ptrdiff_t>(temperatures_k.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[i] = mattis_bardeen(frequency_hz, temperatures_k[i], tc_k, model);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

void TempSweep::validate() const {
  if (!(f0_hz > 0.0)) throw ValidationError("sweep f0 must be positive");
  if (temperature_k.size() < 3) throw ValidationError("sweep needs at least 3 temperatures");
  if (!has_shift() && !has_q()) throw ValidationError("sweep has neither df_over_f nor q_int data");
  if (has_shift() && df_over_f.size() != temperature_k.size())
    throw ValidationError("df_over_f length does not match temperature_k");
  if (has_q() && q_int.size() != temperature_k.size()) throw ValidationError("q_int length does not match temperature_k");
  for (std::size_t i = 0; i < temperature_k.size(); ++i) {
    if (!(temperature_k[i] > 0.0)) throw ValidationError("temperatures must be positive");
    if (i > 0 && !(temperature_k[i] > temperature_k[i - 1]))
      throw ValidationError("temperatures must be strictly increasing (row " + std::to_string(i) + ")");
  }
  if (has_q())
    for (double q : q_int)
      if (!(q > 0.0)) throw ValidationError("q_int values must be positive");
}

double frequency_shift_model(double temperature_k, double f0_hz, double p_mag, double tc_k, double nu) {
  const double s0 = sigma2_zero_temperature(f0_hz, tc_k);
  const double s = mattis_bardeen(f0_hz, temperature_k, tc_k).sigma2;
  return -p_mag * (std::pow(s / s0, nu) - 1.0);
}

double q_int_model(double temperature_k, double f0_hz, double p_mag, double tc_k, double q_max) {
  const Conductivity c = mattis_bardeen(f0_hz, temperature_k, tc_k);
  return 1.0 / (1.0 / q_max + p_mag * c.sigma1 / c.sigma2);
}

namespace {

// Tc is parameterised as T_max (1 + e^u) so the model never sees T >= Tc.
struct TcMap {
  double t_max;
  double tc(double u) const { return t_max * (1.0 + std::exp(std::max(u, std::log(2e-3)))); }
  double u(double tc) const { return std::log(std::max(tc / t_max - 1.0, 2e-3)); }
};

struct Columns {
  std::vector<double> s2_ratio;  // sigma2(T)/sigma2(0)
  std::vector<double> loss;      // sigma1/sigma2
};

Columns evaluate_columns(const TempSweep& sw, double tc) {
  Columns c;
  const double s0 = sigma2_zero_temperature(sw.f0_hz, tc);
  for (double t : sw.temperature_k) {
    const Conductivity s = mattis_bardeen(sw.f0_hz, t, tc, GapModel::Interpolation, 1e-10);
    c.s2_ratio.push_back(s.sigma2 / s0);
    c.loss.push_back(s.sigma1 / s.sigma2);
  }
  return c;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

struct Layout {
  bool shift = false;
  bool q = false;
  bool p_free = true;
};

struct Problem {
  const TempSweep& sw;
  Layout L;
  double nu;
  double p_fixed = 0.0;
  TcMap map;
  double shift_scale = 1.0;

  // x = [ln p]? , u, [ln qmax]?
  int n_params() const { return (L.p_free ? 1 : 0) + 1 + (L.q ? 1 : 0); }
  int n_residuals() const {
    const int n = static_cast<int>(sw.temperature_k.size());
    return (L.shift ? n : 0) + (L.q ? n : 0);
  }
  double p(const Eigen::VectorXd& x) const { return L.p_free ? std::exp(x[0]) : p_fixed; }
  double tc(const Eigen::VectorXd& x) const { return map.tc(x[L.p_free ? 1 : 0]); }
  double qmax(const Eigen::VectorXd& x) const { return std::exp(x[n_params() - 1]); }

  void residuals(const Eigen::VectorXd& x, Eigen::VectorXd& r) const {
    const Columns c = evaluate_columns(sw, tc(x));
    const double p_mag = p(x);
    Eigen::Index k = 0;
    if (L.shift)
      for (std::size_t i = 0; i < c.s2_ratio.size(); ++i)
        r[k++] = (-p_mag * (std::pow(c.s2_ratio[i], nu) - 1.0) - sw.df_over_f[i]) / shift_scale;
    if (L.q) {
      const double qm = qmax(x);
      for (std::size_t i = 0; i < c.loss.size(); ++i) r[k++] = -std::log(1.0 / qm + p_mag * c.loss[i]) - std::log(sw.q_int[i]);
    }
  }
};

// Coarse scan over Tc with p_mag (and Q_max) profiled out in closed form.
Eigen::VectorXd initial_point(const Problem& pb) {
  const auto& sw = pb.sw;
  const std::size_t n = sw.temperature_k.size();
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best(pb.n_params());
  double q_max0 = 0.0;
  if (pb.L.q) q_max0 = *std::max_element(sw.q_int.begin(), sw.q_int.end());

  for (int k = 0; k < 40; ++k) {
    const double tc = pb.map.t_max * (1.0 + 0.005 * std::pow(1.15, k));
    Columns c;
    try {
      c = evaluate_columns(sw, tc);
    } catch (const std::exception&) {
      continue;
    }
    double p = pb.p_fixed;
    if (pb.L.p_free) {
      double num = 0.0, den = 0.0;
      if (pb.L.shift)
        for (std::size_t i = 0; i < n; ++i) {
          const double basis = -(std::pow(c.s2_ratio[i], pb.nu) - 1.0);
          num += basis * sw.df_over_f[i];
          den += basis * basis;
        }
      else
        for (std::size_t i = 0; i < n; ++i) {
          const double excess = 1.0 / sw.q_int[i] - 1.0 / q_max0;
          num += c.loss[i] * excess;
          den += c.loss[i] * c.loss[i];
        }
      p = den > 0.0 ? std::max(num / den, 1e-12) : 1e-6;
    }
    Eigen::VectorXd x(pb.n_params());
    int j = 0;
    if (pb.L.p_free) x[j++] = std::log(p);
    x[j++] = pb.map.u(tc);
    if (pb.L.q) x[j++] = std::log(q_max0);
    Eigen::VectorXd r(pb.n_residuals());
    pb.residuals(x, r);
    const double cost = r.squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = x;
    }
  }
  if (!std::isfinite(best_cost)) throw NumericalError("BCS fit: no admissible starting Tc");
  return best;
}

BcsFit run_fit(const TempSweep& sweep, Layout L, const BcsFitOptions& opts) {
  sweep.validate();
  if (L.shift && !sweep.has_shift()) throw ValidationError("sweep has no df_over_f column");
  if (L.q && !sweep.has_q()) throw ValidationError("sweep has no q_int column");
  Problem pb{sweep, L, opts.nu, 0.0, {}, 1.0};
  if (!L.p_free) {
    if (!(*opts.p_mag_fixed > 0.0)) throw ValidationError("fixed p_mag must be positive");
    pb.p_fixed = *opts.p_mag_fixed;
  }
  pb.map.t_max = sweep.temperature_k.back();
  if (L.shift) {
    pb.shift_scale = max_abs(sweep.df_over_f);
    if (!(pb.shift_scale > 0.0)) {
      // All-zero shift data: p_mag = 0 exactly; Tc is unconstrained.
      BcsFit out;
      out.nu = opts.nu;
      out.tc_k = std::numeric_limits<double>::quiet_NaN();
      return out;
    }
  }

  const Eigen::VectorXd x0 = initial_point(pb);
  LeastSquaresOptions lso;
  lso.max_iterations = opts.max_iterations;
  lso.diff_step = 1e-6;
  ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    try {
      pb.residuals(x, r);
    } catch (const ValidationError&) {
      r.setConstant(1e6);
    }
  };
  const auto res = solve_least_squares(fn, pb.n_residuals(), x0, lso);

  BcsFit out;
  out.nu = opts.nu;
  out.p_mag = pb.p(res.params);
  out.tc_k = pb.tc(res.params);
  if (L.q) out.q_int_max = pb.qmax(res.params);
  out.residual_norm = res.residual_norm;
  out.iterations = res.iterations;
  const int iu = L.p_free ? 1 : 0;
  if (L.p_free) out.p_mag_sigma = out.p_mag * std::sqrt(std::max(0.0, res.covariance(0, 0)));
  out.tc_sigma = (out.tc_k - pb.map.t_max) * std::sqrt(std::max(0.0, res.covariance(iu, iu)));
  if (opts.surface_participation_per_m) out.lambda_l_m = london_depth(out.p_mag, *opts.surface_participation_per_m);
  if (!res.converged)
    throw FitError("BCS fit did not converge", {out.p_mag, out.tc_k, out.q_int_max.value_or(0.0)}, out.residual_norm);
  return out;
}

}  // namespace

BcsFit fit_frequency_shift(const TempSweep& sweep, const BcsFitOptions& opts) {
  return run_fit(sweep, Layout{true, false, true}, opts);
}

BcsFit fit_q_vs_temperature(const TempSweep& sweep, const BcsFitOptions& opts) {
  return run_fit(sweep, Layout{false, true, !opts.p_mag_fixed.has_value()}, opts);
}

BcsFit fit_joint(const TempSweep& sweep, const BcsFitOptions& opts) {
  return run_fit(sweep, Layout{true, true, true}, opts);
}

double joint_cost(const TempSweep& sweep, double p_mag, double tc_k, double q_max, double nu) {
  sweep.validate();
  Problem pb{sweep, Layout{true, true, true}, nu, 0.0, {}, 1.0};
  pb.map.t_max = sweep.temperature_k.back();
  pb.shift_scale = max_abs(sweep.df_over_f);
  Eigen::VectorXd x(3);
  x << std::log(p_mag), pb.map.u(tc_k), std::log(q_max);
  Eigen::VectorXd r(pb.n_residuals());
  pb.residuals(x, r);
  return r.squaredNorm();
}

double london_depth(double p_mag, double surface_participation_per_m) {
  if (!(surface_participation_per_m > 0.0)) throw ValidationError("S_m must be positive");
  if (!(p_mag >= 0.0)) throw ValidationError("p_mag must be non-negative");
  return p_mag / surface_participation_per_m;
}

double pippard_mean_free_path(double lambda_m, double lambda0_m, double xi0_m) {
  if (!(lambda0_m > 0.0) || !(xi0_m > 0.0)) throw ValidationError("lambda0 and xi0 must be positive");
  if (!(lambda_m > lambda0_m)) throw ValidationError("penetration depth must exceed lambda0 for a finite mean free path");
  const double r = lambda_m / lambda0_m;
  return xi0_m / (r * r - 1.0);
}

}  // namespace cqed::bcs
