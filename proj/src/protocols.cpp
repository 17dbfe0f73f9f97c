#include "cqed/protocols.hpp"

#include <algorithm>
#include <array>
#include <exception>
#include <cmath>
#include <numbers>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/error.hpp"
#include "cqed/resonator_fit.hpp"
#include "cqed/units.hpp"

namespace cqed::protocols {

using dyn::cplx;
using dyn::Op;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) t[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return t;
}

// Position of the first interior extremum passing `threshold`, refined with
// a parabola through the neighbouring samples. NaN if there is none.
double first_extremum(const std::vector<double>& t, const std::vector<double>& y, bool minimum, double threshold) {
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const double s = minimum ? -1.0 : 1.0;
    const bool is_ext = s * y[i] >= s * y[i - 1] && s * y[i] > s * y[i + 1];
    if (!is_ext || s * y[i] < s * threshold) continue;
    const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
    const double h = t[i + 1] - t[i];
    const double shift = denom != 0.0 ? 0.5 * h * (y[i - 1] - y[i + 1]) / denom : 0.0;
    return t[i] + std::clamp(shift, -h, h);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void check_mode(const bbq::DressedSystem& dressed, std::size_t mode) {
  if (mode >= dressed.size()) throw ValidationError("mode index " + std::to_string(mode) + " out of range");
  if (dressed.chi_hz.size() != dressed.size()) throw ValidationError("dressed system has no Kerr coefficients");
}

Op thermal_qubit(double n_th) {
  Op rho = Op::Zero(2, 2);
  rho(0, 0) = 1.0 / (1.0 + n_th);
  rho(1, 1) = n_th / (1.0 + n_th);
  return rho;
}

// Gaussian of unit area sampled on [0, 2 * cut * sigma].
struct Gaussian {
  double sigma;
  double cut;
  double length() const { return 2.0 * cut * sigma; }
  double operator()(double t) const {
    if (t < 0.0 || t > length()) return 0.0;
    const double x = (t - cut * sigma) / sigma;
    return std::exp(-0.5 * x * x) / (sigma * std::sqrt(2.0 * std::numbers::pi) * std::erf(cut / std::numbers::sqrt2));
  }
};

}  // namespace

// ---------------------------------------------------------------- sideband

SidebandResult sideband_protocol(const bbq::DressedSystem& dressed, std::size_t mode, double epsilon_hz,
                                 double duration_s, const SidebandOptions& opts) {
  check_mode(dressed, mode);
  if (opts.transmon_dim < 3) throw ValidationError("the sideband needs the |f> level: transmon_dim >= 3");
  if (opts.mode_dim < 2) throw ValidationError("mode_dim must be at least 2");
  if (opts.samples < 3) throw ValidationError("need at least 3 samples");

  SidebandResult res;
  res.plan = drive::sideband_plan(dressed, mode, epsilon_hz);
  const drive::SidebandPlan& p = res.plan;
  const std::size_t r = *dressed.readout_index();
  const double beta_r = dressed.beta[r];
  const double beta_t = dressed.beta_t;
  const double beta_m = dressed.beta[mode];
  // Junction displacement: the readout field through beta_r plus the
  // transmon's own response eta = beta_r xi_t.
  res.zeta = beta_r * p.xi_r + beta_t * beta_r * p.xi_t;

  if (duration_s <= 0.0) duration_s = std::isfinite(p.pi_time_s) && p.pi_time_s > 0.0 ? 1.5 * p.pi_time_s : 1e-6;

  const dyn::Space space({opts.transmon_dim, opts.mode_dim});
  dyn::Frame frame;
  frame.mode_hz = {dressed.mode_hz[mode]};
  frame.transmon_hz = 0.5 * (p.drive_hz + frame.mode_hz[0]);
  Op h = dyn::dispersive_hamiltonian(dressed, space, {mode}, frame);

  // (beta_t X_t + beta_m X_m + zeta e^{-i w_d t} + zeta* e^{i w_d t})^4, keeping
  // the drive-dependent words that are static in this frame.
  const Op a_t = space.destroy(0), a_m = space.destroy(1), id = space.identity();
  struct Letter {
    Op op;
    int p, q, r;
  };
  const std::array<Letter, 6> letters{{
      {beta_t * a_t, -1, 0, 0},
      {beta_t * Op(a_t.adjoint()), 1, 0, 0},
      {beta_m * a_m, 0, -1, 0},
      {beta_m * Op(a_m.adjoint()), 0, 1, 0},
      {res.zeta * id, 0, 0, -1},
      {res.zeta * id, 0, 0, 1},
  }};
  Op quartic = Op::Zero(space.dim(), space.dim());
  for (int w = 0; w < 6 * 6 * 6 * 6; ++w) {
    int idx[4] = {w % 6, (w / 6) % 6, (w / 36) % 6, w / 216};
    int np = 0, nq = 0, nr = 0, n_drive = 0;
    for (int k : idx) {
      np += letters[k].p;
      nq += letters[k].q;
      nr += letters[k].r;
      n_drive += k >= 4;
    }
    if (n_drive == 0 || n_drive == 4) continue;
    if (np + 2 * nr != 0 || nq != nr) continue;
    quartic += letters[idx[0]].op * letters[idx[1]].op * letters[idx[2]].op * letters[idx[3]].op;
  }
  h -= angular(dressed.e_c_hz / 12.0) * quartic;

  dyn::Hamiltonian ham{h, {}};
  const Op rho0 = dyn::projector(space.ket({2, 0}));
  const std::vector<dyn::Observable> obs{
      {"p_f", space.projector(0, 2)},
      {"p_f0", dyn::projector(space.ket({2, 0}))},
      {"p_g1", dyn::projector(space.ket({0, 1}))},
      {"n_mode", space.number(1)},
  };
  res.evolution = dyn::evolve(ham, rho0, dyn::collapse_operators(space, opts.channels),
                              linspace(0.0, duration_s, opts.samples), obs);

  const Op& rho_end = res.evolution.final_state;
  const double top = std::max(dyn::expectation(rho_end, space.projector(0, opts.transmon_dim - 1)),
                              dyn::expectation(rho_end, space.projector(1, opts.mode_dim - 1)));
  const auto& pn = res.evolution.series("n_mode");
  const double top_seen = std::max(top, *std::max_element(pn.begin(), pn.end()) - 1.0);
  if (top_seen > 1e-3) {
    std::ostringstream msg;
    msg << "population " << top_seen << " reaches the top of the truncation at eps = " << epsilon_hz
        << " Hz; raise transmon_dim or mode_dim";
    throw ValidationError(msg.str());
  }

  const auto& pf = res.evolution.series("p_f");
  res.min_p_f = *std::min_element(pf.begin(), pf.end());
  const double t_min = first_extremum(res.evolution.times, pf, true, 0.5);
  if (std::isnan(t_min)) {
    res.pi_time_s = inf;
    res.g_hz = 0.0;
  } else {
    res.pi_time_s = t_min;
    res.g_hz = 1.0 / (4.0 * std::numbers::sqrt2 * t_min);
  }
  res.rate_ratio = p.g_hz != 0.0 ? res.g_hz / p.g_hz : 0.0;
  return res;
}

// ---------------------------------------------------------------- blockade

namespace {

struct BlockadeModel {
  dyn::Space space;
  Op h_idle;       // no drives, cavity frame on the dressed |g0>-|g1> line
  Op transmon_x;   // 2 pi Omega (sigma+ + sigma-)
  Op a;            // cavity lowering operator
  double detuning_hz = 0.0;
  double matrix_element = 1.0;  // |<1~|a^dag|0~>|

  Op pulse(double epsilon_hz, double phase) const {
    const cplx f = angular(epsilon_hz) * std::exp(cplx{0.0, phase});
    return h_idle + transmon_x + f * a + std::conj(f) * Op(a.adjoint());
  }
};

BlockadeModel blockade_model(const bbq::DressedSystem& dressed, std::size_t mode, double omega_hz, int transmon_dim,
                             int mode_dim) {
  check_mode(dressed, mode);
  if (mode_dim < 3) throw ValidationError("blockade needs mode_dim >= 3 to see |2>");
  if (transmon_dim < 2) throw ValidationError("transmon_dim must be at least 2");
  BlockadeModel m{dyn::Space({transmon_dim, mode_dim}), {}, {}, {}, 0.0, 1.0};
  dyn::Frame frame;
  frame.transmon_hz = dressed.transmon_hz - 2.0 * dressed.chi_hz[mode];  // |g2> and |e2> degenerate
  frame.mode_hz = {dressed.mode_hz[mode]};
  const Op h0 = dyn::dispersive_hamiltonian(dressed, m.space, {mode}, frame);
  const Op at = m.space.destroy(0);
  m.transmon_x = angular(omega_hz) * (at + Op(at.adjoint()));
  m.a = m.space.destroy(1);

  // Dressed |g0> and |g1> with the transmon drive on; the cavity drive
  // follows their splitting.
  Eigen::SelfAdjointEigenSolver<Op> es(h0 + m.transmon_x);
  auto dressed_state = [&](int n) {
    const Eigen::VectorXcd bare = m.space.ket({0, n});
    Eigen::Index best = 0;
    (es.eigenvectors().adjoint() * bare).cwiseAbs().maxCoeff(&best);
    return best;
  };
  const Eigen::Index i0 = dressed_state(0), i1 = dressed_state(1);
  if (i0 == i1) throw NumericalError("could not identify the dressed |g0> and |g1> states");
  const double split = es.eigenvalues()(i1) - es.eigenvalues()(i0);
  m.detuning_hz = ordinary(split);
  m.matrix_element = std::abs(cplx(es.eigenvectors().col(i1).adjoint() * m.a.adjoint() * es.eigenvectors().col(i0)));
  m.h_idle = h0 - split * m.space.number(1);
  return m;
}

}  // namespace

BlockadeResult blockade_protocol(const bbq::DressedSystem& dressed, std::size_t mode, double omega_hz,
                                 double epsilon_hz, double duration_s, const BlockadeOptions& opts) {
  if (!(omega_hz >= 0.0) || !(epsilon_hz > 0.0)) throw ValidationError("need Omega >= 0 and eps > 0");
  if (opts.samples < 3) throw ValidationError("need at least 3 samples");
  BlockadeResult res;
  // Omega = 0 is the harmonic reference run; there is no hierarchy to report on.
  if (omega_hz > 0.0) res.report = drive::blockade_params(dressed, mode, omega_hz, epsilon_hz, opts.t1_q_s, opts.t2_q_s);
  else res.report.warnings.push_back("blockade drive off: the cavity drive is not confined to |0>-|1>");
  const BlockadeModel m = blockade_model(dressed, mode, omega_hz, opts.transmon_dim, opts.mode_dim);
  res.cavity_detuning_hz = m.detuning_hz;
  res.predicted_rabi_hz = 2.0 * epsilon_hz * m.matrix_element;
  if (duration_s <= 0.0) duration_s = 1.0 / res.predicted_rabi_hz;

  const dyn::Space& sp = m.space;
  Op p3 = Op::Zero(sp.dim(), sp.dim());
  for (int n = 3; n < sp.dim_of(1); ++n) p3 += sp.projector(1, n);
  const std::vector<dyn::Observable> obs{
      {"p0", sp.projector(1, 0)}, {"p1", sp.projector(1, 1)}, {"p2", sp.projector(1, 2)},
      {"p3plus", p3},             {"p_e", Op(Op::Identity(sp.dim(), sp.dim()) - sp.projector(0, 0))},
  };
  const Op rho0 = dyn::projector(sp.ket({0, 0}));
  res.evolution = dyn::evolve({m.pulse(epsilon_hz, 0.0), {}}, rho0, dyn::collapse_operators(sp, opts.channels),
                              linspace(0.0, duration_s, opts.samples), obs);
  const auto& p2 = res.evolution.series("p2");
  const auto& p3s = res.evolution.series("p3plus");
  for (std::size_t i = 0; i < p2.size(); ++i) res.max_p2 = std::max(res.max_p2, p2[i] + p3s[i]);
  const double t_max = first_extremum(res.evolution.times, res.evolution.series("p1"), false, 0.5);
  res.rabi_hz = std::isnan(t_max) ? 0.0 : 1.0 / (2.0 * t_max);
  return res;
}

// -------------------------------------------------------------------- SNAP

Op displacement_operator(int dim, std::complex<double> beta) {
  if (dim < 1) throw ValidationError("dimension must be positive");
  const int big = dim + 30 + static_cast<int>(4.0 * std::norm(beta));
  const Op a = dyn::destroy(big);
  const Op gen = beta * Op(a.adjoint()) - std::conj(beta) * a;
  const Op d = gen.exp();
  return d.topLeftCorner(dim, dim);
}

Eigen::VectorXcd ideal_snap_state(const std::vector<SnapStep>& steps, int dim) {
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dim);
  psi(0) = 1.0;
  for (const SnapStep& s : steps) {
    if (s.kind == SnapStep::Kind::Displace) {
      psi = displacement_operator(dim, s.beta) * psi;
    } else {
      for (const auto& [n, theta] : s.phases) {
        if (n < 0 || n >= dim) throw ValidationError("SNAP level " + std::to_string(n) + " outside the truncation");
        psi(n) *= std::exp(cplx{0.0, theta});
      }
    }
  }
  return psi;
}

namespace {

// Selective pi pulses on |g,n> - |e,n> for several n at once, starting at t0.
// The drive sits on sigma+ with envelope (Omega(t)/2) e^{-i phi} e^{i n chi t}.
dyn::Hamiltonian::Drive selective_pulses(const dyn::Space& space, double chi_hz, const Gaussian& g, double t0,
                                         std::vector<std::pair<int, double>> level_phases) {
  const double chi = angular(chi_hz);
  return {Op(space.destroy(0).adjoint()), [=](double t) {
            const double env = 0.5 * std::numbers::pi * g(t - t0);
            if (env == 0.0) return cplx{};
            cplx f{};
            for (const auto& [n, phi] : level_phases) f += std::exp(cplx{0.0, n * chi * t - phi});
            return env * f;
          }};
}

double selective_sigma(double chi_hz, double product) {
  if (!(chi_hz > 0.0)) throw ValidationError("selective pulses need chi > 0");
  if (!(product > 0.0)) throw ValidationError("sigma * chi must be positive");
  return product / chi_hz;
}

}  // namespace

SnapResult snap_sequence(const bbq::DressedSystem& dressed, std::size_t mode, const std::vector<SnapStep>& steps,
                         const SnapOptions& opts) {
  check_mode(dressed, mode);
  if (opts.mode_dim < 2) throw ValidationError("mode_dim must be at least 2");
  if (opts.samples_per_pulse < 2) throw ValidationError("samples_per_pulse must be at least 2");
  SnapResult res;
  const double chi_hz = dressed.chi_hz[mode];
  const Gaussian sel{selective_sigma(chi_hz, opts.sigma_chi_product), opts.truncation_sigmas};
  const double bandwidth_hz = 1.0 / (2.0 * std::numbers::pi * sel.sigma);
  if (bandwidth_hz > chi_hz / 5.0) {
    std::ostringstream w;
    w << "selective pulse bandwidth " << bandwidth_hz << " Hz exceeds chi/5 = " << chi_hz / 5.0 << " Hz";
    res.warnings.push_back(w.str());
  }
  const Gaussian disp{opts.displacement_sigma_s, 4.0};

  const dyn::Space space({2, opts.mode_dim});
  dyn::Frame frame{dressed.transmon_hz, {dressed.mode_hz[mode]}};
  const Op h0 = dyn::dispersive_hamiltonian(dressed, space, {mode}, frame);
  const auto collapse = dyn::collapse_operators(space, opts.channels);
  const std::vector<dyn::Observable> obs{{"p_e", space.projector(0, 1)}, {"n_mode", space.number(1)}};

  Op rho = dyn::projector(space.ket({0, 0}));
  double t = 0.0;
  bool first = true;
  auto run = [&](const dyn::Hamiltonian& h, double length) {
    const auto grid = linspace(t, t + length, opts.samples_per_pulse);
    dyn::EvolutionResult seg = dyn::evolve(h, rho, collapse, grid, obs);
    rho = seg.final_state;
    if (first) {
      res.evolution = std::move(seg);
      first = false;
    } else {
      auto& ev = res.evolution;
      ev.times.insert(ev.times.end(), seg.times.begin() + 1, seg.times.end());
      for (std::size_t k = 0; k < ev.values.size(); ++k)
        ev.values[k].insert(ev.values[k].end(), seg.values[k].begin() + 1, seg.values[k].end());
      ev.max_trace_error = std::max(ev.max_trace_error, seg.max_trace_error);
      ev.max_hermiticity_error = std::max(ev.max_hermiticity_error, seg.max_hermiticity_error);
    }
    t += length;
  };

  for (const SnapStep& s : steps) {
    if (s.kind == SnapStep::Kind::Displace) {
      // H = f a + f* a^dag with integral of f equal to -i conj(beta).
      const double t0 = t;
      const cplx amp = cplx{0.0, -1.0} * std::conj(s.beta);
      dyn::Hamiltonian h{h0, {{space.destroy(1), [=](double tt) { return amp * disp(tt - t0); }}}};
      run(h, disp.length());
    } else {
      std::vector<double> theta(static_cast<std::size_t>(opts.mode_dim), 0.0);
      for (const auto& [n, th] : s.phases) {
        if (n < 0 || n >= opts.mode_dim)
          throw ValidationError("SNAP level " + std::to_string(n) + " outside the truncation");
        theta[static_cast<std::size_t>(n)] += th;
      }
      if (opts.compensate_kerr) {
        const auto mi = static_cast<Eigen::Index>(mode);
        const double k = angular(dressed.kerr_hz(mi, mi)) * 2.0 * sel.length();
        for (int n = 2; n < opts.mode_dim; ++n) theta[static_cast<std::size_t>(n)] -= 0.5 * k * n * (n - 1);
      }
      std::vector<std::pair<int, double>> first_pulse, second_pulse;
      for (int n = 0; n < opts.mode_dim; ++n) {
        const double th = std::remainder(theta[static_cast<std::size_t>(n)], two_pi);
        if (std::abs(th) < 1e-9) continue;
        first_pulse.emplace_back(n, 0.0);
        second_pulse.emplace_back(n, th - std::numbers::pi);
      }
      if (first_pulse.empty()) continue;
      dyn::Hamiltonian h1{h0, {selective_pulses(space, chi_hz, sel, t, first_pulse)}};
      run(h1, sel.length());
      dyn::Hamiltonian h2{h0, {selective_pulses(space, chi_hz, sel, t, second_pulse)}};
      run(h2, sel.length());
    }
  }
  if (first) run({h0, {}}, 0.0);

  res.evolution.final_state = rho;
  res.gate_time_s = t;
  res.ideal_state = ideal_snap_state(steps, opts.mode_dim);
  Eigen::VectorXcd target = Eigen::VectorXcd::Zero(space.dim());
  target.head(opts.mode_dim) = res.ideal_state;  // transmon |g> block
  res.fidelity = std::real(cplx(target.adjoint() * rho * target));
  res.mode_state = space.partial_trace_keep(rho, 1);
  const double top = res.mode_state(opts.mode_dim - 1, opts.mode_dim - 1).real();
  if (top > 1e-3) {
    std::ostringstream w;
    w << "population " << top << " in the highest mode level; raise mode_dim";
    res.warnings.push_back(w.str());
  }
  return res;
}

// --------------------------------------------------------------- coherence

CoherenceResult coherence_protocols(const bbq::DressedSystem& dressed, std::size_t mode, const CoherenceOptions& o) {
  if (o.t1_points < 5 || o.ramsey_points < 9) throw ValidationError("too few delay points for a fit");
  const BlockadeModel m = blockade_model(dressed, mode, o.omega_hz, 2, o.mode_dim);
  const dyn::Space& sp = m.space;
  dyn::Channels ch;
  ch.subsystems = {{o.t1_q_s, o.t_phi_q_s, o.n_th_q}, {o.t1_mode_s, inf, 0.0}};
  const auto collapse = dyn::collapse_operators(sp, ch);

  CoherenceResult res;
  const double gamma_phi = drive::dephasing_limit(dressed.chi_hz[mode], 1.0 / o.t1_q_s, o.n_th_q);
  res.t2_closed_form_s = drive::t2_limit(o.t1_mode_s, gamma_phi);

  const double rabi = 2.0 * o.epsilon_hz * m.matrix_element;
  const double t_pi = 1.0 / (2.0 * rabi), t_half = 0.5 * t_pi;
  const Op p1 = sp.projector(1, 1);
  const Op n_mode = sp.number(1);

  Op rho0 = Op::Zero(sp.dim(), sp.dim());
  const Op q = thermal_qubit(o.n_th_q);
  for (int i = 0; i < 2; ++i) rho0(sp.index({i, 0}), sp.index({i, 0})) = q(i, i);

  const Eigen::Index d = sp.dim();
  auto vec = [](const Op& r) -> Eigen::VectorXcd { return Eigen::Map<const Eigen::VectorXcd>(r.data(), r.size()); };
  auto unvec = [d](const Eigen::VectorXcd& v) -> Op { return Eigen::Map<const Op>(v.data(), d, d); };

  // T1: pi pulse, wait, read P1.
  {
    const Op after_pi = dyn::propagate_constant(m.pulse(o.epsilon_hz, 0.0), collapse, rho0, t_pi);
    const double t_max = 3.0 * o.t1_mode_s;
    res.t1_delays_s = linspace(0.0, t_max, o.t1_points);
    const Op step = dyn::propagator(m.h_idle, collapse, res.t1_delays_s[1]);
    Eigen::VectorXcd v = vec(after_pi);
    for (int i = 0; i < o.t1_points; ++i) {
      if (i > 0) v = step * v;
      const Op rho = unvec(v);
      res.t1_population.push_back(dyn::expectation(rho, p1));
      res.t1_mean_photons.push_back(dyn::expectation(rho, n_mode));
    }
    res.t1_fit_s = fit::fit_exponential(res.t1_delays_s, res.t1_mean_photons, true).tau;
  }

  // Ramsey: the second pulse phase advances at the detuning.
  {
    const double tau_max = 2.5 * res.t2_closed_form_s;
    const double detuning = o.ramsey_detuning_hz > 0.0 ? o.ramsey_detuning_hz : 8.0 / tau_max;
    const Op after_half = dyn::propagate_constant(m.pulse(o.epsilon_hz, 0.0), collapse, rho0, t_half);
    res.ramsey_delays_s = linspace(0.0, tau_max, o.ramsey_points);
    const Op step = dyn::propagator(m.h_idle, collapse, res.ramsey_delays_s[1]);
    Eigen::VectorXcd v = vec(after_half);
    for (int i = 0; i < o.ramsey_points; ++i) {
      if (i > 0) v = step * v;
      const double tau = res.ramsey_delays_s[static_cast<std::size_t>(i)];
      // The idle mode runs detuning_hz away from the pulse frame; fold that
      // into the phase so the fringes sit at `detuning`.
      const double phase = two_pi * (detuning - m.detuning_hz) * tau;
      const Op u = dyn::propagator(m.pulse(o.epsilon_hz, phase), collapse, t_half);
      res.ramsey_population.push_back(dyn::expectation(unvec(u * v), p1));
    }
    const auto f = fit::fit_damped_cosine(res.ramsey_delays_s, res.ramsey_population, detuning);
    res.t2_fit_s = f.tau;
    res.ramsey_frequency_hz = f.frequency_hz;
  }
  return res;
}

// ---------------------------------------------------------------- readout

std::vector<double> photon_distribution(const bbq::DressedSystem& dressed, std::size_t mode, const Op& rho_mode,
                                        int n_max, double sigma_chi_product) {
  check_mode(dressed, mode);
  const int dim = static_cast<int>(rho_mode.rows());
  if (rho_mode.cols() != dim || dim < 1) throw ValidationError("mode state must be square");
  if (n_max < 1 || n_max > dim) throw ValidationError("n_max must lie in [1, mode dimension]");
  if (std::abs(rho_mode.trace() - 1.0) > 1e-6) throw ValidationError("mode state must have unit trace");
  const double chi_hz = dressed.chi_hz[mode];
  const Gaussian sel{selective_sigma(chi_hz, sigma_chi_product), 4.0};
  const dyn::Space space({2, dim});
  const Op h0 = dyn::dispersive_hamiltonian(dressed, space, {mode}, {dressed.transmon_hz, {dressed.mode_hz[mode]}});
  Op g = Op::Zero(2, 2);
  g(0, 0) = 1.0;
  Op rho0 = Op::Zero(space.dim(), space.dim());
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) rho0(space.index({0, i}), space.index({0, j})) = rho_mode(i, j);
  const Op pe = space.projector(0, 1);
  std::vector<double> out(static_cast<std::size_t>(n_max));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_max));
#pragma omp parallel for schedule(dynamic)
  for (int n = 0; n < n_max; ++n) {
    try {
      dyn::Hamiltonian h{h0, {selective_pulses(space, chi_hz, sel, 0.0, {{n, 0.0}})}};
      const auto r = dyn::evolve(h, rho0, {}, {0.0, sel.length()}, {{"p_e", pe}});
      out[static_cast<std::size_t>(n)] = r.values[0].back();
    } catch (...) {
      errors[static_cast<std::size_t>(n)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace cqed::protocols
