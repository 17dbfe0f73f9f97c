#include "cqed/resonator_fit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed::fit {

using cplx = std::complex<double>;
constexpr cplx I{0.0, 1.0};

void Trace::validate() const {
  if (frequency_hz.size() != value.size()) throw ValidationError("trace frequency and value lengths differ");
  if (frequency_hz.size() < 16) throw ValidationError("trace needs at least 16 points");
  for (std::size_t i = 1; i < frequency_hz.size(); ++i)
    if (!(frequency_hz[i] > frequency_hz[i - 1]))
      throw ValidationError("trace frequencies must be strictly increasing (row " + std::to_string(i) + ")");
}

cplx model_s21(const ResonatorParams& p, double f_hz) {
  const cplx k1{p.kappa1_hz, p.gamma1_hz};
  const cplx k2{p.kappa2_hz, p.gamma2_hz};
  return 2.0 * std::sqrt(k1 * k2) / ((f_hz - p.f0_hz) + I * (k1 + k2 + p.kappa_i_hz));
}

cplx model_s11(const ResonatorParams& p, double f_hz) {
  const cplx k1{p.kappa1_hz, p.gamma1_hz};
  const cplx d = I * (f_hz - p.f0_hz);
  return (d + (p.kappa_i_hz - k1)) / (d + (p.kappa_i_hz + k1));
}

namespace {

// Internal parameterisation: frequencies relative to the window centre in
// units of the window half-width W, rates as log(kappa / W), delay as tau W.
struct Frame {
  double center = 0.0;
  double half_width = 1.0;
  double scale = 1.0;  // max |S|, normalises residuals
};

struct Layout {
  TraceKind kind;
  double ratio = 1.0;       // kappa2 / kappa1 (transmission)
  double gain_mag = 1.0;    // fixed |gain| (transmission)
  bool fit_delay = true;
  int size() const {
    const int base = kind == TraceKind::Transmission ? 4 : 6;  // S21: x0, ki, k1, phase; S11: x0, ki, k1, g1, gre, gim
    return base + (fit_delay ? 1 : 0);
  }
};

struct Unpacked {
  ResonatorParams p;
  cplx gain;
  double delay = 0.0;
};

Unpacked unpack(const Eigen::VectorXd& x, const Layout& L, const Frame& fr) {
  Unpacked u;
  const double W = fr.half_width;
  u.p.f0_hz = fr.center + W * x[0];
  u.p.kappa_i_hz = W * std::exp(x[1]);
  u.p.kappa1_hz = W * std::exp(x[2]);
  int next = 0;
  if (L.kind == TraceKind::Transmission) {
    u.p.kappa2_hz = L.ratio * u.p.kappa1_hz;
    u.gain = std::polar(L.gain_mag, x[3]);
    next = 4;
  } else {
    u.p.gamma1_hz = W * x[3];
    u.gain = cplx{x[4], x[5]};
    next = 6;
  }
  if (L.fit_delay) u.delay = x[next] / W;
  return u;
}

cplx evaluate(const Unpacked& u, TraceKind kind, double f, const Frame& fr) {
  const cplx s = kind == TraceKind::Transmission ? model_s21(u.p, f) : model_s11(u.p, f);
  return u.gain * std::exp(-I * (two_pi * (f - fr.center) * u.delay)) * s;
}

struct Candidate {
  Eigen::VectorXd x;
};

double interp_crossing(double f_a, double v_a, double f_b, double v_b, double level) {
  if (v_a == v_b) return f_a;
  return f_a + (level - v_a) * (f_b - f_a) / (v_b - v_a);
}

// Full width at `level` of a single-peaked profile around index `pk`.
double width_at(const std::vector<double>& f, const std::vector<double>& prof, std::size_t pk, double level) {
  double left = std::numeric_limits<double>::quiet_NaN();
  double right = left;
  for (std::size_t i = pk; i > 0; --i)
    if (prof[i - 1] < level) {
      left = interp_crossing(f[i - 1], prof[i - 1], f[i], prof[i], level);
      break;
    }
  for (std::size_t i = pk; i + 1 < f.size(); ++i)
    if (prof[i + 1] < level) {
      right = interp_crossing(f[i], prof[i], f[i + 1], prof[i + 1], level);
      break;
    }
  if (std::isnan(left) && std::isnan(right)) return f.back() - f.front();
  if (std::isnan(left)) return 2.0 * (right - f[pk]);
  if (std::isnan(right)) return 2.0 * (f[pk] - left);
  return right - left;
}

std::vector<Candidate> initial_candidates(const Trace& tr, const Layout& L, const Frame& fr,
                                          const std::optional<ResonatorParams>& guess) {
  const auto n = tr.value.size();
  const double W = fr.half_width;
  std::vector<double> mag(n);
  for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(tr.value[i]);
  const auto [mn_it, mx_it] = std::minmax_element(mag.begin(), mag.end());
  if (*mx_it - *mn_it < 0.05 * *mx_it) throw ValidationError("degenerate trace: no resonance contrast");

  auto pack = [&](const ResonatorParams& p, cplx gain) {
    Eigen::VectorXd x(L.size());
    x[0] = (p.f0_hz - fr.center) / W;
    x[1] = std::log(std::max(p.kappa_i_hz, 1e-6 * W) / W);
    x[2] = std::log(std::max(p.kappa1_hz, 1e-6 * W) / W);
    if (L.kind == TraceKind::Transmission) {
      x[3] = std::arg(gain);
    } else {
      x[3] = p.gamma1_hz / W;
      x[4] = gain.real();
      x[5] = gain.imag();
    }
    if (L.fit_delay) x[L.size() - 1] = 0.0;
    return Candidate{x};
  };

  if (L.kind == TraceKind::Transmission) {
    const auto pk = static_cast<std::size_t>(mx_it - mag.begin());
    if (pk == 0 || pk + 1 == n) throw ValidationError("resonance peak is not inside the frequency window");
    if (guess) {
      const cplx s = model_s21(*guess, tr.frequency_hz[pk]);
      return {pack(*guess, tr.value[pk] / s)};
    }
    std::vector<double> p2(n);
    for (std::size_t i = 0; i < n; ++i) p2[i] = mag[i] * mag[i];
    const double total = 0.5 * width_at(tr.frequency_hz, p2, pk, 0.5 * p2[pk]);
    const double height = mag[pk] / L.gain_mag;
    ResonatorParams p;
    p.f0_hz = tr.frequency_hz[pk];
    p.kappa1_hz = std::clamp(height * total / (2.0 * std::sqrt(L.ratio)), 1e-3 * total, total / (1.0 + L.ratio));
    p.kappa2_hz = L.ratio * p.kappa1_hz;
    p.kappa_i_hz = std::max(total - p.kappa1_hz - p.kappa2_hz, 0.05 * total);
    const double phase = std::arg(tr.value[pk]) + 0.5 * std::numbers::pi;
    return {pack(p, std::polar(1.0, phase))};
  }

  const auto dip = static_cast<std::size_t>(mn_it - mag.begin());
  if (dip == 0 || dip + 1 == n) throw ValidationError("resonance dip is not inside the frequency window");
  const std::size_t edge = std::max<std::size_t>(2, n / 20);
  cplx edge_sum{0.0, 0.0};
  double edge_mag = 0.0;
  for (std::size_t i = 0; i < edge; ++i) {
    edge_sum += tr.value[i] / std::abs(tr.value[i]) + tr.value[n - 1 - i] / std::abs(tr.value[n - 1 - i]);
    edge_mag += mag[i] + mag[n - 1 - i];
  }
  edge_mag /= static_cast<double>(2 * edge);
  const cplx gain = std::polar(edge_mag, std::arg(edge_sum));
  if (guess) return {pack(*guess, gain)};

  const double d = std::min(mag[dip] / edge_mag, 0.99);
  std::vector<double> depth(n);
  for (std::size_t i = 0; i < n; ++i) depth[i] = 1.0 - mag[i] * mag[i] / (edge_mag * edge_mag);
  const double total = 0.5 * width_at(tr.frequency_hz, depth, dip, 0.5 * depth[dip]);
  ResonatorParams under;
  under.f0_hz = tr.frequency_hz[dip];
  under.kappa1_hz = 0.5 * total * (1.0 - d);
  under.kappa_i_hz = 0.5 * total * (1.0 + d);
  ResonatorParams over = under;
  std::swap(over.kappa1_hz, over.kappa_i_hz);
  return {pack(under, gain), pack(over, gain)};
}

}  // namespace

ResonatorFit fit_trace(const Trace& trace, const FitOptions& opts) {
  trace.validate();
  if (!(opts.coupling_ratio > 0.0)) throw ValidationError("coupling_ratio must be positive");

  Frame fr;
  fr.center = 0.5 * (trace.frequency_hz.front() + trace.frequency_hz.back());
  fr.half_width = 0.5 * (trace.frequency_hz.back() - trace.frequency_hz.front());
  for (const auto& v : trace.value) fr.scale = std::max(fr.scale == 1.0 ? 0.0 : fr.scale, std::abs(v));
  if (!(fr.scale > 0.0)) throw ValidationError("degenerate trace: all samples are zero");

  Layout L{trace.kind, opts.coupling_ratio, opts.transmission_gain_magnitude, opts.fit_delay};
  const int m = static_cast<int>(2 * trace.value.size());

  ResidualFn residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const Unpacked u = unpack(x, L, fr);
    for (std::size_t i = 0; i < trace.value.size(); ++i) {
      const cplx diff = (evaluate(u, trace.kind, trace.frequency_hz[i], fr) - trace.value[i]) / fr.scale;
      r[static_cast<Eigen::Index>(2 * i)] = diff.real();
      r[static_cast<Eigen::Index>(2 * i + 1)] = diff.imag();
    }
  };

  const auto candidates = initial_candidates(trace, L, fr, opts.initial_guess);
  LeastSquaresResult best;
  bool have = false;
  double best_start = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) {
    auto res = solve_least_squares(residual, m, c.x, opts.solver);
    best_start = std::min(best_start, res.initial_norm);
    if (!have || res.residual_norm < best.residual_norm) {
      best = std::move(res);
      have = true;
    }
  }

  const Unpacked u = unpack(best.params, L, fr);
  if (!best.converged) {
    throw FitError("resonator fit did not converge", {u.p.f0_hz, u.p.kappa_i_hz, u.p.kappa1_hz, u.p.kappa2_hz},
                   best.residual_norm * fr.scale);
  }

  ResonatorFit out;
  out.params = u.p;
  out.gain = u.gain;
  out.delay_s = u.delay;
  out.q_int = u.p.q_int();
  out.residual_norm = best.residual_norm * fr.scale;
  out.initial_residual_norm = best_start * fr.scale;
  out.iterations = best.iterations;

  // Jacobian of physical parameters with respect to internal ones (diagonal).
  const double W = fr.half_width;
  std::vector<std::string> names;
  std::vector<double> values, dphys;
  names = {"f0_hz", "kappa_i_hz", "kappa1_hz"};
  values = {u.p.f0_hz, u.p.kappa_i_hz, u.p.kappa1_hz};
  dphys = {W, u.p.kappa_i_hz, u.p.kappa1_hz};
  if (trace.kind == TraceKind::Transmission) {
    names.push_back("gain_phase_rad");
    values.push_back(std::arg(u.gain));
    dphys.push_back(1.0);
  } else {
    names.insert(names.end(), {"gamma1_hz", "gain_re", "gain_im"});
    values.insert(values.end(), {u.p.gamma1_hz, u.gain.real(), u.gain.imag()});
    dphys.insert(dphys.end(), {W, 1.0, 1.0});
  }
  if (opts.fit_delay) {
    names.push_back("delay_s");
    values.push_back(u.delay);
    dphys.push_back(1.0 / W);
  }
  const Eigen::Index k = static_cast<Eigen::Index>(names.size());
  Eigen::VectorXd D(k);
  for (Eigen::Index i = 0; i < k; ++i) D[i] = dphys[static_cast<std::size_t>(i)];
  // Residuals were normalised by fr.scale; covariance is scale invariant in the
  // parameters because s^2 and J^T J scale together.
  out.covariance = D.asDiagonal() * best.covariance * D.asDiagonal();
  out.names = names;
  out.values = values;
  for (Eigen::Index i = 0; i < k; ++i) out.uncertainties.push_back(std::sqrt(std::max(0.0, out.covariance(i, i))));
  return out;
}

std::vector<ResonatorFit> fit_traces(std::span<const Trace> traces, const FitOptions& opts) {
  std::vector<ResonatorFit> out(traces.size());
  std::vector<std::exception_ptr> errors(traces.size());
  const auto count = static_cast<std::ptrdiff_t>(traces.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      out[i] = fit_trace(traces[i], opts);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

Trace synthesize_trace(TraceKind kind, const ResonatorParams& p, const SynthesisOptions& opts) {
  if (opts.points < 16 || !(opts.f_hi_hz > opts.f_lo_hz)) throw ValidationError("invalid synthesis grid");
  Trace tr;
  tr.kind = kind;
  tr.frequency_hz.resize(static_cast<std::size_t>(opts.points));
  tr.value.resize(tr.frequency_hz.size());
  const double center = 0.5 * (opts.f_lo_hz + opts.f_hi_hz);
  double peak = 0.0;
  for (int i = 0; i < opts.points; ++i) {
    const double f = opts.f_lo_hz + (opts.f_hi_hz - opts.f_lo_hz) * i / (opts.points - 1);
    const cplx s = kind == TraceKind::Transmission ? model_s21(p, f) : model_s11(p, f);
    const auto idx = static_cast<std::size_t>(i);
    tr.frequency_hz[idx] = f;
    tr.value[idx] = opts.gain * std::exp(-I * (two_pi * (f - center) * opts.delay_s)) * s;
    peak = std::max(peak, std::abs(tr.value[idx]));
  }
  if (opts.noise_rel > 0.0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> normal(0.0, opts.noise_rel * peak);
    for (auto& v : tr.value) v += cplx{normal(rng), normal(rng)};
  }
  tr.metadata["source"] = "synthetic";
  return tr;
}

ExponentialFit fit_exponential(std::span<const double> t, std::span<const double> y, bool with_offset) {
  if (t.size() != y.size() || t.size() < 4) throw ValidationError("exponential fit needs >= 4 matched samples");
  const std::size_t n = t.size();
  const double c0 = with_offset ? y.back() : 0.0;
  const double a0 = y.front() - c0;
  if (a0 == 0.0) throw FitError("exponential fit: no decay contrast", {}, 0.0);
  double tau0 = (t.back() - t.front()) / 3.0;
  for (std::size_t i = 1; i < n; ++i)
    if ((y[i] - c0) / a0 < std::exp(-1.0)) {
      tau0 = std::max(t[i] - t.front(), 1e-12);
      break;
    }
  const double tscale = t.back() - t.front();
  ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double tau = tscale * std::exp(x[1]);
    const double c = with_offset ? x[2] : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<Eigen::Index>(i)] = x[0] * std::exp(-(t[i] - t.front()) / tau) + c - y[i];
  };
  Eigen::VectorXd x0(with_offset ? 3 : 2);
  x0[0] = a0;
  x0[1] = std::log(tau0 / tscale);
  if (with_offset) x0[2] = c0;
  auto res = solve_least_squares(fn, static_cast<int>(n), x0);
  if (!res.converged) throw FitError("exponential fit did not converge", {res.params[0], tscale * std::exp(res.params[1])}, res.residual_norm);
  ExponentialFit out;
  out.tau = tscale * std::exp(res.params[1]);
  out.amplitude = res.params[0] * std::exp(t.front() / out.tau);
  out.offset = with_offset ? res.params[2] : 0.0;
  out.residual_norm = res.residual_norm;
  return out;
}

DampedCosineFit fit_damped_cosine(std::span<const double> t, std::span<const double> y,
                                  std::optional<double> frequency_guess_hz) {
  if (t.size() != y.size() || t.size() < 8) throw ValidationError("damped cosine fit needs >= 8 matched samples");
  const std::size_t n = t.size();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  const double span = t.back() - t.front();

  double f0 = frequency_guess_hz.value_or(0.0);
  if (!frequency_guess_hz) {
    // Periodogram peak up to the grid Nyquist frequency.
    const double nyquist = 0.5 * static_cast<double>(n - 1) / span;
    double best = -1.0;
    const int n_freq = 4000;
    for (int k = 1; k <= n_freq; ++k) {
      const double f = nyquist * k / n_freq;
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) acc += (y[i] - mean) * std::exp(-I * (two_pi * f * t[i]));
      if (std::norm(acc) > best) {
        best = std::norm(acc);
        f0 = f;
      }
    }
  }
  std::complex<double> proj{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) proj += (y[i] - mean) * std::exp(-I * (two_pi * f0 * t[i]));
  const double amp0 = 2.0 * std::abs(proj) / static_cast<double>(n);
  const double phase0 = -std::arg(proj);

  ResidualFn fn = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    const double tau = span * std::exp(x[2]);
    for (std::size_t i = 0; i < n; ++i)
      r[static_cast<Eigen::Index>(i)] =
          x[0] + x[1] * std::exp(-t[i] / tau) * std::cos(two_pi * x[3] / span * t[i] + x[4]) - y[i];
  };
  Eigen::VectorXd x0(5);
  x0 << mean, amp0, std::log(0.7), f0 * span, phase0;
  auto res = solve_least_squares(fn, static_cast<int>(n), x0);
  if (!res.converged)
    throw FitError("damped cosine fit did not converge", {res.params[0], res.params[1], span * std::exp(res.params[2])},
                   res.residual_norm);
  DampedCosineFit out;
  out.offset = res.params[0];
  out.amplitude = res.params[1];
  out.tau = span * std::exp(res.params[2]);
  out.frequency_hz = res.params[3] / span;
  out.phase = res.params[4];
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.phase += std::numbers::pi;
  }
  if (out.frequency_hz < 0.0) {
    out.frequency_hz = -out.frequency_hz;
    out.phase = -out.phase;
  }
  out.residual_norm = res.residual_norm;
  return out;
}

}  // namespace cqed::fit
