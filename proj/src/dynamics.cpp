#include "cqed/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed::dyn {

std::size_t HilbertConfig::total_dim() const {
  std::size_t d = static_cast<std::size_t>(std::max(transmon_dim, 0));
  for (int m : mode_dims) d *= static_cast<std::size_t>(std::max(m, 0));
  return d;
}

void HilbertConfig::validate() const {
  if (transmon_dim < 2) throw ValidationError("transmon_dim must be >= 2");
  if (mode_dims.size() != active_modes.size())
    throw ValidationError("mode_dims and active_modes must have the same length");
  for (int m : mode_dims)
    if (m < 2) throw ValidationError("mode dims must be >= 2");
  if (total_dim() > max_dim) {
    std::ostringstream msg;
    msg << "Hilbert dimension " << total_dim() << " exceeds the cap " << max_dim << "; try transmon_dim "
        << std::min(transmon_dim, 3) << " with mode dims of " << std::max(2, static_cast<int>(std::floor(std::pow(
                                                                     static_cast<double>(max_dim) / std::min(transmon_dim, 3),
                                                                     1.0 / std::max<std::size_t>(1, mode_dims.size())))))
        << " or fewer active modes";
    throw ValidationError(msg.str());
  }
}

Space::Space(std::vector<int> dims, std::size_t max_dim) : dims_(std::move(dims)) {
  if (dims_.empty()) throw ValidationError("space needs at least one subsystem");
  std::size_t total = 1;
  for (int d : dims_) {
    if (d < 2) throw ValidationError("subsystem dimensions must be >= 2");
    total *= static_cast<std::size_t>(d);
  }
  if (total > max_dim)
    throw ValidationError("Hilbert dimension " + std::to_string(total) + " exceeds the cap " + std::to_string(max_dim));
  total_ = static_cast<Eigen::Index>(total);
}

Space::Space(const HilbertConfig& config) : Space([&] {
  config.validate();
  std::vector<int> d{config.transmon_dim};
  d.insert(d.end(), config.mode_dims.begin(), config.mode_dims.end());
  return d;
}(), config.max_dim) {}

Op destroy(int dim) {
  Op a = Op::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

Op projector(const Eigen::VectorXcd& ket) { return ket * ket.adjoint(); }

Op Space::identity() const { return Op::Identity(total_, total_); }

Op Space::embed(std::size_t sub, const Op& local) const {
  if (sub >= dims_.size()) throw ValidationError("subsystem index out of range");
  if (local.rows() != dims_[sub] || local.cols() != dims_[sub]) throw ValidationError("local operator has the wrong size");
  Eigen::Index inner = 1;
  for (std::size_t s = sub + 1; s < dims_.size(); ++s) inner *= dims_[s];
  const Eigen::Index outer = total_ / (inner * dims_[sub]);
  Op out = Op::Zero(total_, total_);
  const Eigen::Index d = dims_[sub];
  for (Eigen::Index o = 0; o < outer; ++o)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) {
        const cplx v = local(i, j);
        if (v == cplx{}) continue;
        for (Eigen::Index k = 0; k < inner; ++k) out((o * d + i) * inner + k, (o * d + j) * inner + k) = v;
      }
  return out;
}

Op Space::destroy(std::size_t sub) const { return embed(sub, dyn::destroy(dims_.at(sub))); }

Op Space::number(std::size_t sub) const {
  const Op a = dyn::destroy(dims_.at(sub));
  return embed(sub, a.adjoint() * a);
}

Op Space::projector(std::size_t sub, int level) const {
  if (level < 0 || level >= dims_.at(sub)) throw ValidationError("level outside truncation");
  Op p = Op::Zero(dims_[sub], dims_[sub]);
  p(level, level) = 1.0;
  return embed(sub, p);
}

Eigen::Index Space::index(const std::vector<int>& levels) const {
  if (levels.size() != dims_.size()) throw ValidationError("level tuple has the wrong length");
  Eigen::Index idx = 0;
  for (std::size_t s = 0; s < dims_.size(); ++s) {
    if (levels[s] < 0 || levels[s] >= dims_[s]) throw ValidationError("level outside truncation");
    idx = idx * dims_[s] + levels[s];
  }
  return idx;
}

Eigen::VectorXcd Space::ket(const std::vector<int>& levels) const {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(total_);
  v[index(levels)] = 1.0;
  return v;
}

Op Space::partial_trace_keep(const Op& rho, std::size_t keep) const {
  if (keep >= dims_.size()) throw ValidationError("subsystem index out of range");
  Eigen::Index inner = 1;
  for (std::size_t s = keep + 1; s < dims_.size(); ++s) inner *= dims_[s];
  const Eigen::Index d = dims_[keep];
  const Eigen::Index outer = total_ / (inner * d);
  Op out = Op::Zero(d, d);
  for (Eigen::Index o = 0; o < outer; ++o)
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index k = 0; k < inner; ++k) out(i, j) += rho((o * d + i) * inner + k, (o * d + j) * inner + k);
  return out;
}

Op Space::diagonal(const std::function<double(const std::vector<int>&)>& f) const {
  Op out = Op::Zero(total_, total_);
  std::vector<int> levels(dims_.size(), 0);
  for (Eigen::Index idx = 0; idx < total_; ++idx) {
    Eigen::Index rem = idx;
    for (std::size_t s = dims_.size(); s-- > 0;) {
      levels[s] = static_cast<int>(rem % dims_[s]);
      rem /= dims_[s];
    }
    out(idx, idx) = f(levels);
  }
  return out;
}

void Decay::validate() const {
  if (!(t1_s > 0.0)) throw ValidationError("T1 must be positive (use infinity to disable)");
  if (!(t_phi_s > 0.0)) throw ValidationError("T_phi must be positive (use infinity to disable)");
  if (!(n_th >= 0.0 && n_th < 1.0)) throw ValidationError("n_th must lie in [0, 1)");
}

std::vector<Op> collapse_operators(const Space& space, const Channels& channels) {
  if (channels.subsystems.size() > space.parts()) throw ValidationError("more channel entries than subsystems");
  std::vector<Op> out;
  for (std::size_t s = 0; s < channels.subsystems.size(); ++s) {
    const Decay& d = channels.subsystems[s];
    d.validate();
    if (std::isfinite(d.t1_s)) {
      const double gamma = 1.0 / d.t1_s;
      const Op a = space.destroy(s);
      out.push_back(std::sqrt(gamma * (1.0 + d.n_th)) * a);
      if (d.n_th > 0.0) out.push_back(std::sqrt(gamma * d.n_th) * a.adjoint());
    }
    if (std::isfinite(d.t_phi_s)) out.push_back(std::sqrt(2.0 / d.t_phi_s) * space.number(s));
  }
  return out;
}

Op Hamiltonian::at(double t) const {
  Op h = h0;
  for (const Drive& d : drives) {
    const cplx f = d.envelope(t);
    if (f == cplx{}) continue;
    h += f * d.op + std::conj(f) * d.op.adjoint();
  }
  return h;
}

Op dispersive_hamiltonian(const bbq::DressedSystem& dressed, const Space& space,
                          const std::vector<std::size_t>& active_modes, const Frame& frame) {
  if (space.parts() != active_modes.size() + 1) throw ValidationError("space does not match the active modes");
  if (frame.mode_hz.size() != active_modes.size()) throw ValidationError("frame needs one frequency per active mode");
  for (std::size_t m : active_modes)
    if (m >= dressed.size()) throw ValidationError("mode index " + std::to_string(m) + " out of range");
  return space.diagonal([&](const std::vector<int>& lv) {
    const double nt = lv[0];
    double e = (dressed.transmon_hz - frame.transmon_hz) * nt - 0.5 * dressed.alpha_hz * nt * (nt - 1.0);
    for (std::size_t i = 0; i < active_modes.size(); ++i) {
      const std::size_t m = active_modes[i];
      const double nm = lv[i + 1];
      const auto mi = static_cast<Eigen::Index>(m);
      e += (dressed.mode_hz[m] - frame.mode_hz[i]) * nm - dressed.chi_hz[m] * nt * nm -
           0.5 * dressed.kerr_hz(mi, mi) * nm * (nm - 1.0);
      for (std::size_t j = i + 1; j < active_modes.size(); ++j)
        e -= dressed.kerr_hz(mi, static_cast<Eigen::Index>(active_modes[j])) * nm * lv[j + 1];
    }
    return angular(e);
  });
}

Op quartic_hamiltonian(const bbq::DressedSystem& dressed, const Space& space,
                       const std::vector<std::size_t>& active_modes) {
  if (space.parts() != active_modes.size() + 1) throw ValidationError("space does not match the active modes");
  Op x = Op::Zero(space.dim(), space.dim());
  Op h = Op::Zero(space.dim(), space.dim());
  for (std::size_t s = 0; s < space.parts(); ++s) {
    const double beta = s == 0 ? dressed.beta_t : dressed.beta.at(active_modes[s - 1]);
    const double omega = s == 0 ? dressed.transmon_linear_hz : dressed.mode_linear_hz.at(active_modes[s - 1]);
    const Op a = space.destroy(s);
    x += beta * (a + a.adjoint());
    h += angular(omega) * a.adjoint() * a;
  }
  const Op x2 = x * x;
  h -= angular(dressed.e_c_hz / 12.0) * (x2 * x2);
  return h;
}

Op build_hamiltonian(const bbq::DressedSystem& dressed, const HilbertConfig& config) {
  const Space space(config);
  Frame frame;
  frame.transmon_hz = dressed.transmon_hz;
  for (std::size_t m : config.active_modes) frame.mode_hz.push_back(dressed.mode_hz.at(m));
  return dispersive_hamiltonian(dressed, space, config.active_modes, frame);
}

double expectation(const Op& rho, const Op& op) { return (rho * op).trace().real(); }

const std::vector<double>& EvolutionResult::series(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return values[k];
  throw ValidationError("no observable named '" + name + "'");
}

void EvolutionResult::write_csv(std::ostream& out) const {
  out << "time_s";
  for (const auto& n : names) out << ',' << n;
  out << '\n' << std::setprecision(12);
  for (std::size_t i = 0; i < times.size(); ++i) {
    out << times[i];
    for (const auto& v : values) out << ',' << v[i];
    out << '\n';
  }
}

Op propagator(const Op& h, const std::vector<Op>& collapse, double duration) {
  const Op l = kernels::liouvillian_serial(h, collapse);
  return (l * duration).exp();
}

namespace {

Eigen::VectorXcd vec(const Op& rho) { return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size()); }

Op unvec(const Eigen::VectorXcd& v, Eigen::Index d) { return Eigen::Map<const Op>(v.data(), d, d); }

// RK4 in the interaction picture of the diagonal of h0. Every operator X
// becomes P(t) o X with P_ij = exp(i (D_i - D_j) t), which is exact for the
// Lindblad form (C^dag C transforms the same way), so the integrator only has
// to follow the drives, the off-diagonal couplings and the dissipation.
struct Rk4 {
  Rk4(const Hamiltonian& ham, const std::vector<Op>& collapse, bool par)
      : h(ham), diag(ham.h0.diagonal().real()), scratch(ham.h0, collapse), parallel(par) {
    Op off = ham.h0;
    off.diagonal().setZero();
    const kernels::LindbladGenerator slow(off, collapse);
    static_k = slow.k;
    c = slow.c;
  }

  const Hamiltonian& h;
  Eigen::VectorXd diag;
  Op static_k;            // -i (h0 - D) - sum C^dag C / 2
  std::vector<Op> c;
  mutable kernels::LindbladGenerator scratch;
  mutable Op phase;
  bool parallel;

  const Op& phases(double t) const {
    const Eigen::Index d = diag.size();
    phase.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) phase(i, j) = std::polar(1.0, (diag(i) - diag(j)) * t);
    return phase;
  }

  Op to_interaction(const Op& rho, double t) const { return phases(t).cwiseProduct(rho); }
  Op from_interaction(const Op& rho, double t) const { return phases(t).conjugate().cwiseProduct(rho); }

  void rhs(double t, const Op& rho, Op& out) const {
    Op k = static_k;
    for (const Hamiltonian::Drive& d : h.drives) {
      const cplx f = d.envelope(t);
      if (f == cplx{}) continue;
      k.noalias() -= cplx{0.0, 1.0} * (f * d.op + std::conj(f) * d.op.adjoint());
    }
    const Op& p = phases(t);
    scratch.k = p.cwiseProduct(k);
    for (std::size_t i = 0; i < c.size(); ++i) {
      scratch.c[i] = p.cwiseProduct(c[i]);
      scratch.c_dag[i] = scratch.c[i].adjoint();
    }
    if (parallel) kernels::lindblad_rhs_parallel(scratch, rho, out);
    else kernels::lindblad_rhs_serial(scratch, rho, out);
  }

  // Takes and returns the Schroedinger-picture state.
  Op run(const Op& rho_s, double t0, double t1, long steps) const {
    Op rho = to_interaction(rho_s, t0);
    const double dt = (t1 - t0) / static_cast<double>(steps);
    Op k1, k2, k3, k4;
    for (long s = 0; s < steps; ++s) {
      const double t = t0 + dt * static_cast<double>(s);
      rhs(t, rho, k1);
      rhs(t + 0.5 * dt, rho + 0.5 * dt * k1, k2);
      rhs(t + 0.5 * dt, rho + 0.5 * dt * k2, k3);
      rhs(t + dt, rho + dt * k3, k4);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return from_interaction(rho, t1);
  }

  // Rate of the interaction-picture generator.
  double scale(double t) const {
    Op v = h.at(t);
    v.diagonal().setZero();
    double s = v.cwiseAbs().rowwise().sum().maxCoeff();
    for (const Op& op : c) s += op.cwiseAbs2().colwise().sum().maxCoeff();
    return s;
  }
};

}  // namespace

Op propagate_constant(const Op& h, const std::vector<Op>& collapse, const Op& rho, double duration) {
  if (duration == 0.0) return rho;
  return unvec(propagator(h, collapse, duration) * vec(rho), rho.rows());
}

EvolutionResult evolve(const Hamiltonian& h, const Op& rho0, const std::vector<Op>& collapse,
                       const std::vector<double>& times, const std::vector<Observable>& observables,
                       const EvolveOptions& opts) {
  if (times.empty()) throw ValidationError("time grid is empty");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] >= times[i - 1])) throw ValidationError("time grid must be non-decreasing");
  const Eigen::Index d = rho0.rows();
  if (rho0.cols() != d || h.h0.rows() != d) throw ValidationError("state and Hamiltonian dimensions differ");
  if (std::abs(rho0.trace() - cplx{1.0, 0.0}) > 1e-8) throw ValidationError("initial state must have unit trace");

  EvolutionResult res;
  for (const auto& o : observables) {
    if (o.op.rows() != d) throw ValidationError("observable '" + o.name + "' has the wrong dimension");
    res.names.push_back(o.name);
  }
  res.values.assign(observables.size(), {});

  Op rho = rho0;
  auto record = [&](double t) {
    const double tr_err = std::abs(rho.trace() - cplx{1.0, 0.0});
    res.max_trace_error = std::max(res.max_trace_error, tr_err);
    res.max_hermiticity_error = std::max(res.max_hermiticity_error, (rho - rho.adjoint()).cwiseAbs().maxCoeff());
    if (tr_err > opts.trace_tolerance) {
      std::ostringstream msg;
      msg << "trace drift " << tr_err << " at t = " << t << " s exceeds " << opts.trace_tolerance
          << "; reduce the integration step or the truncation";
      throw NumericalError(msg.str());
    }
    res.times.push_back(t);
    for (std::size_t k = 0; k < observables.size(); ++k) res.values[k].push_back(expectation(rho, observables[k].op));
  };
  record(times.front());

  if (h.constant() && static_cast<std::size_t>(d) <= opts.expm_max_dim) {
    const Op l = kernels::liouvillian_serial(h.h0, collapse);
    Op cached;
    double cached_dt = -1.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
      const double dt = times[i] - times[i - 1];
      if (dt > 0.0) {
        if (std::abs(dt - cached_dt) > 1e-12 * dt) {
          cached = (l * dt).exp();
          cached_dt = dt;
        }
        rho = unvec(cached * vec(rho), d);
      }
      record(times[i]);
    }
    res.final_state = rho;
    return res;
  }

  const Rk4 rk(h, collapse, opts.parallel_kernel);
  double step = opts.max_step_s;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double t0 = times[i - 1], t1 = times[i];
    const double span = t1 - t0;
    if (span > 0.0) {
      double h_try = step > 0.0 ? std::min(step, span) : span;
      // Start near the RK4 stability edge; the halving loop below sets the accuracy.
      h_try = std::min(h_try, 2.0 / std::max(rk.scale(t0), 1e-300));
      long n = std::max<long>(1, static_cast<long>(std::ceil(span / h_try)));
      Op coarse = rk.run(rho, t0, t1, n);
      for (int attempt = 0;; ++attempt) {
        Op fine = rk.run(rho, t0, t1, 2 * n);
        const double diff = (fine - coarse).cwiseAbs().maxCoeff();
        if (diff < opts.step_tolerance) {
          rho = fine;
          // diff estimates the error of the coarse run, which scales as h^4.
          const double grow = diff > 0.0 ? 0.8 * std::pow(opts.step_tolerance / diff, 0.25) : 2.0;
          step = span / static_cast<double>(n) * std::clamp(grow, 0.5, 2.0);
          break;
        }
        if (attempt > 20) throw NumericalError("RK4 step halving did not converge");
        coarse = std::move(fine);
        n *= 2;
      }
    }
    record(t1);
  }
  res.final_state = rho;
  return res;
}

}  // namespace cqed::dyn
