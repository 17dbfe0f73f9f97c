#include "cqed/bbq.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cqed/error.hpp"
#include "cqed/units.hpp"

namespace cqed::bbq {

void SystemSpec::validate() const {
  if (!(transmon_hz > 0.0)) throw ValidationError("transmon_hz must be positive");
  if (!(e_c_hz > 0.0)) throw ValidationError("e_c_hz must be positive");
  if (e_j_hz < 0.0) throw ValidationError("e_j_hz must be non-negative");
  int readouts = 0;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (!(modes[k].freq_hz > 0.0)) throw ValidationError("modes[" + std::to_string(k) + "].freq_hz must be positive");
    if (modes[k].role == ModeRole::Readout) ++readouts;
  }
  if (readouts > 1) throw ValidationError("at most one readout mode is allowed");
}

std::vector<std::string> SystemSpec::warnings() const {
  std::vector<std::string> out;
  if (e_j_hz > 0.0 && e_j_hz / e_c_hz < 20.0)
    out.push_back("E_J/E_C = " + std::to_string(e_j_hz / e_c_hz) + " is below the transmon regime (20)");
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (std::abs(modes[k].g_hz) >= std::abs(transmon_hz - modes[k].freq_hz))
      out.push_back("mode " + std::to_string(k) + ": g >= |nu_t - nu_k|, dispersive treatment is not valid");
  return out;
}

std::optional<std::size_t> SystemSpec::readout_index() const {
  for (std::size_t k = 0; k < modes.size(); ++k)
    if (modes[k].role == ModeRole::Readout) return k;
  return std::nullopt;
}

std::optional<std::size_t> DressedSystem::readout_index() const {
  for (std::size_t k = 0; k < roles.size(); ++k)
    if (roles[k] == ModeRole::Readout) return k;
  return std::nullopt;
}

SystemSpec nine_mode_system() {
  SystemSpec s;
  const double transition = 4.3e9;
  s.e_c_hz = 140e6;
  s.transmon_hz = transition + s.e_c_hz;
  s.e_j_hz = s.transmon_hz * s.transmon_hz / (8.0 * s.e_c_hz);
  for (int m = 1; m <= 9; ++m)
    s.modes.push_back({5.45e9 + 0.25e9 * (m - 1), 170e6 - 15e6 * (m - 1), ModeRole::Storage, "m" + std::to_string(m)});
  s.modes.push_back({8.05e9, 120e6, ModeRole::Readout, "readout"});
  return s;
}

DressedSystem diagonalize_linear(const SystemSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.modes.size() + 1);
  Eigen::VectorXd nu(n);
  nu[0] = spec.transmon_hz;
  for (Eigen::Index k = 1; k < n; ++k) nu[k] = spec.modes[static_cast<std::size_t>(k - 1)].freq_hz;

  // Scale to GHz-ish numbers so the eigensolver tolerances are meaningful.
  const double scale = nu.maxCoeff();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = (nu[i] / scale) * (nu[i] / scale);
  for (Eigen::Index k = 1; k < n; ++k) {
    const double g = spec.modes[static_cast<std::size_t>(k - 1)].g_hz / scale;
    m(0, k) = m(k, 0) = 2.0 * g * std::sqrt(nu[0] / scale * nu[k] / scale);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) throw NumericalError("linear normal-mode eigensolver failed");
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalError("coupling matrix is not positive definite; couplings are too strong for a stable circuit");

  Eigen::MatrixXd u = es.eigenvectors();
  const Eigen::VectorXd omega = es.eigenvalues().cwiseSqrt() * scale;

  // partner[j]: bare index dominating normal mode j.
  std::vector<Eigen::Index> partner(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i) {
      const double a = std::abs(u(i, j)), b = std::abs(u(best, j));
      if (a > b + 1e-12 || (std::abs(a - b) <= 1e-12 && std::abs(nu[i] - omega[j]) < std::abs(nu[best] - omega[j])))
        best = i;
    }
    partner[static_cast<std::size_t>(j)] = best;
    if (u(best, j) < 0.0) u.col(j) *= -1.0;
  }
  std::vector<Eigen::Index> dressed_of(static_cast<std::size_t>(n), -1);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& slot = dressed_of[static_cast<std::size_t>(partner[static_cast<std::size_t>(j)])];
    if (slot >= 0) {
      std::ostringstream msg;
      msg << "ambiguous mode assignment: normal modes " << slot << " and " << j << " both overlap most with bare index "
          << partner[static_cast<std::size_t>(j)] << " (overlaps " << u.col(slot).cwiseAbs().transpose() << " | "
          << u.col(j).cwiseAbs().transpose() << ")";
      throw NumericalError(msg.str());
    }
    slot = j;
  }

  Eigen::VectorXd beta(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = dressed_of[static_cast<std::size_t>(i)];
    beta[i] = u(0, j) * std::sqrt(nu[0] / omega[j]);
  }
  beta /= beta.norm();

  DressedSystem d;
  d.e_c_hz = spec.e_c_hz;
  d.transmon_linear_hz = omega[dressed_of[0]];
  d.transmon_hz = d.transmon_linear_hz;
  d.beta_t = beta[0];
  for (Eigen::Index i = 1; i < n; ++i) {
    const auto& mode = spec.modes[static_cast<std::size_t>(i - 1)];
    d.mode_linear_hz.push_back(omega[dressed_of[static_cast<std::size_t>(i)]]);
    d.mode_hz.push_back(d.mode_linear_hz.back());
    d.beta.push_back(beta[i]);
    d.roles.push_back(mode.role);
    d.labels.push_back(mode.label.empty() ? "mode" + std::to_string(i - 1) : mode.label);
  }
  d.chi_hz.assign(d.beta.size(), 0.0);
  d.chi_first_order_hz.assign(d.beta.size(), 0.0);
  d.kerr_hz = Eigen::MatrixXd::Zero(n - 1, n - 1);
  d.warnings = spec.warnings();
  return d;
}

std::vector<double> participations_from_impedance(std::span<const double> z_modes_ohm, double z_t_ohm) {
  if (!(z_t_ohm > 0.0)) throw ValidationError("transmon impedance must be positive");
  std::vector<double> b{1.0};
  for (std::size_t k = 0; k < z_modes_ohm.size(); ++k) {
    if (!(z_modes_ohm[k] > 0.0)) throw ValidationError("impedance Z[" + std::to_string(k) + "] must be positive");
    b.push_back(std::sqrt(z_modes_ohm[k] / z_t_ohm));
  }
  double norm = 0.0;
  for (double v : b) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : b) v /= norm;
  return b;
}

double zpf_phase(double z_ohm) {
  if (!(z_ohm > 0.0)) throw ValidationError("impedance must be positive");
  return std::sqrt(two_pi * constants::G_Q * z_ohm);
}

int mode_budget(double t1_cavity_s, double t1_qubit_s) {
  if (!(t1_cavity_s > 0.0) || !(t1_qubit_s > 0.0)) throw ValidationError("lifetimes must be positive");
  return static_cast<int>(std::floor(t1_cavity_s / t1_qubit_s * (1.0 + 1e-12)));
}

namespace {

using Occ = std::vector<int>;

// <m| X^c |k> for a single oscillator, summing all 2^c ladder paths.
double xpow_element(int c, int m, int k) {
  double total = 0.0;
  for (int mask = 0; mask < (1 << c); ++mask) {
    int level = k;
    double amp = 1.0;
    for (int s = 0; s < c && amp != 0.0; ++s) {
      if (mask & (1 << s)) {
        ++level;
        amp *= std::sqrt(static_cast<double>(level));
      } else {
        if (level == 0) amp = 0.0;
        else amp *= std::sqrt(static_cast<double>(level--));
      }
    }
    if (level == m) total += amp;
  }
  return total;
}

constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0, 24.0};

}  // namespace

double quartic_matrix_element(std::span<const int> m, std::span<const int> k, std::span<const double> betas) {
  const std::size_t n = betas.size();
  if (m.size() != n || k.size() != n) throw ValidationError("occupation and beta lengths differ");
  std::vector<int> c(n, 0);
  int s = 0;
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = std::abs(m[i] - k[i]);
    s += c[i];
    if (s > 4) return 0.0;
  }
  if ((4 - s) % 2 != 0) return 0.0;

  auto term = [&]() {
    double t = 24.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (c[i] == 0) continue;
      t *= std::pow(betas[i], c[i]) * xpow_element(c[i], m[i], k[i]) / kFactorial[c[i]];
      if (t == 0.0) return 0.0;
    }
    return t;
  };

  const int pairs = (4 - s) / 2;
  if (pairs == 0) return term();
  double total = 0.0;
  if (pairs == 1) {
    for (std::size_t j = 0; j < n; ++j) {
      c[j] += 2;
      total += term();
      c[j] -= 2;
    }
    return total;
  }
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t l = j; l < n; ++l) {
      c[j] += 2;
      c[l] += 2;
      total += term();
      c[j] -= 2;
      c[l] -= 2;
    }
  return total;
}

namespace {

struct Perturbation {
  std::vector<double> omega;  // linear normal-mode frequencies, index 0 = transmon
  std::vector<double> beta;
  double prefactor = 0.0;     // -E_C / 12
  int order = 3;

  double bare(const Occ& o) const {
    double e = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) e += omega[i] * o[i];
    return e;
  }

  double v(const Occ& a, const Occ& b) const { return prefactor * quartic_matrix_element(a, b, beta); }

  // All product states connected to `n` by the quartic.
  std::vector<std::pair<Occ, double>> connected(const Occ& n) const {
    std::set<Occ> frontier{n};
    for (int step = 0; step < 4; ++step) {
      std::set<Occ> next;
      for (const Occ& o : frontier)
        for (std::size_t i = 0; i < o.size(); ++i) {
          Occ up = o;
          ++up[i];
          next.insert(up);
          if (o[i] > 0) {
            Occ dn = o;
            --dn[i];
            next.insert(dn);
          }
        }
      frontier.swap(next);
    }
    std::vector<std::pair<Occ, double>> out;
    for (const Occ& o : frontier) {
      if (o == n) continue;
      const double val = v(o, n);
      if (val != 0.0) out.emplace_back(o, val);
    }
    return out;
  }

  // E(n) through `order`; `near_resonant` collects intermediate states with
  // a first-order admixture above 0.3.
  double energy(const Occ& n, std::vector<std::string>* near_resonant) const {
    const double e0 = bare(n);
    const double vnn = v(n, n);
    if (order == 1) return e0 + vnn;
    const auto links = connected(n);
    struct Link {
      const Occ* state;
      double vkn;
      double denom;
    };
    std::vector<Link> kept;
    double e2 = 0.0, renorm = 0.0;
    const double degenerate = 1e-9 * std::max(1.0, std::abs(e0));
    for (const auto& [k, vkn] : links) {
      const double d = e0 - bare(k);
      if (std::abs(d) < degenerate) continue;
      const double a = vkn / d;
      if (near_resonant && std::abs(a) > 0.3) {
        std::ostringstream msg;
        msg << "near-resonant intermediate state (admixture " << a << ")";
        near_resonant->push_back(msg.str());
      }
      e2 += vkn * a;
      renorm += a * a;
      // Admixtures this small cannot move third-order energies measurably.
      if (std::abs(a) > 1e-7) kept.push_back({&k, vkn, d});
    }
    if (order == 2) return e0 + vnn + e2;

    double e3 = -vnn * renorm;
    for (std::size_t i = 0; i < kept.size(); ++i)
      for (std::size_t j = 0; j < kept.size(); ++j) {
        const double vkm = v(*kept[i].state, *kept[j].state);
        if (vkm != 0.0) e3 += kept[i].vkn * vkm * kept[j].vkn / (kept[i].denom * kept[j].denom);
      }
    return e0 + vnn + e2 + e3;
  }
};

}  // namespace

DressedSystem quartic_couplings(const DressedSystem& linear, const QuarticOptions& opts) {
  if (opts.order < 1 || opts.order > 3) throw ValidationError("perturbation order must be 1, 2 or 3");
  if (!(linear.e_c_hz > 0.0)) throw ValidationError("E_C must be positive");
  DressedSystem d = linear;
  const std::size_t nm = d.beta.size();
  const std::size_t n = nm + 1;

  Perturbation full;
  full.omega.push_back(d.transmon_linear_hz);
  full.omega.insert(full.omega.end(), d.mode_linear_hz.begin(), d.mode_linear_hz.end());
  full.beta.push_back(d.beta_t);
  full.beta.insert(full.beta.end(), d.beta.begin(), d.beta.end());
  full.prefactor = -d.e_c_hz / 12.0;
  full.order = opts.order;
  Perturbation first = full;
  first.order = 1;

  auto occ = [&](std::initializer_list<std::pair<std::size_t, int>> entries) {
    Occ o(n, 0);
    for (auto [i, c] : entries) o[i] += c;
    return o;
  };

  // States needed: vacuum, single and double excitations of every mode, and
  // one transmon plus one mode excitation.
  std::vector<Occ> states{occ({}), occ({{0, 1}}), occ({{0, 2}})};
  for (std::size_t m = 1; m < n; ++m) {
    states.push_back(occ({{m, 1}}));
    states.push_back(occ({{0, 1}, {m, 1}}));
  }
  const std::size_t n_core = states.size();
  for (std::size_t m = 1; m < n; ++m) {
    states.push_back(occ({{m, 2}}));
    for (std::size_t l = m + 1; l < n; ++l) states.push_back(occ({{m, 1}, {l, 1}}));
  }

  std::vector<double> energy(states.size()), energy1(states.size());
  std::vector<std::vector<std::string>> notes(states.size());
  const auto count = static_cast<std::ptrdiff_t>(states.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t s = 0; s < count; ++s) {
    const bool high = static_cast<std::size_t>(s) < n_core || opts.mode_kerr_full_order;
    energy1[s] = first.energy(states[s], nullptr);
    energy[s] = high ? full.energy(states[s], &notes[s]) : energy1[s];
  }
  // Mode-mode entries are a second difference, so all four energies in it
  // have to come from the same order.
  auto lookup = [&](const std::vector<double>& table, const Occ& o) {
    const auto it = std::find(states.begin(), states.end(), o);
    return table[static_cast<std::size_t>(it - states.begin())];
  };
  auto e = [&](const Occ& o) { return lookup(energy, o); };
  auto e1 = [&](const Occ& o) { return lookup(energy1, o); };
  auto ek = [&](const Occ& o) { return opts.mode_kerr_full_order ? e(o) : e1(o); };

  const Occ vac = occ({}), t1 = occ({{0, 1}}), t2 = occ({{0, 2}});
  d.perturbation_order = opts.order;
  d.transmon_hz = e(t1) - e(vac);
  d.alpha_hz = -(e(t2) - 2.0 * e(t1) + e(vac));
  d.alpha_first_order_hz = -(e1(t2) - 2.0 * e1(t1) + e1(vac));
  d.kerr_hz = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));
  for (std::size_t m = 1; m < n; ++m) {
    const Occ m1 = occ({{m, 1}}), tm = occ({{0, 1}, {m, 1}});
    d.mode_hz[m - 1] = e(m1) - e(vac);
    d.chi_hz[m - 1] = -(e(tm) - e(t1) - e(m1) + e(vac));
    d.chi_first_order_hz[m - 1] = -(e1(tm) - e1(t1) - e1(m1) + e1(vac));
    const auto i = static_cast<Eigen::Index>(m - 1);
    d.kerr_hz(i, i) = -(ek(occ({{m, 2}})) - 2.0 * ek(m1) + ek(vac));
    for (std::size_t l = m + 1; l < n; ++l) {
      const auto j = static_cast<Eigen::Index>(l - 1);
      d.kerr_hz(i, j) = d.kerr_hz(j, i) = -(ek(occ({{m, 1}, {l, 1}})) - ek(m1) - ek(occ({{l, 1}})) + ek(vac));
    }
  }
  for (std::size_t s = 0; s < states.size(); ++s)
    if (!notes[s].empty()) {
      std::ostringstream msg;
      msg << "perturbation: " << notes[s].size() << " " << notes[s].front() << " for state (";
      for (std::size_t i = 0; i < n; ++i) msg << (i ? "," : "") << states[s][i];
      msg << ")";
      d.warnings.push_back(msg.str());
    }
  return d;
}

DressedSystem subsystem(const DressedSystem& dressed, std::span<const std::size_t> modes) {
  DressedSystem out;
  out.e_c_hz = dressed.e_c_hz;
  out.transmon_linear_hz = out.transmon_hz = dressed.transmon_linear_hz;
  out.beta_t = dressed.beta_t;
  for (std::size_t m : modes) {
    if (m >= dressed.size()) throw ValidationError("mode index " + std::to_string(m) + " out of range");
    out.mode_linear_hz.push_back(dressed.mode_linear_hz[m]);
    out.mode_hz.push_back(dressed.mode_linear_hz[m]);
    out.beta.push_back(dressed.beta[m]);
    out.roles.push_back(dressed.roles[m]);
    out.labels.push_back(dressed.labels[m]);
  }
  out.chi_hz.assign(out.beta.size(), 0.0);
  out.chi_first_order_hz.assign(out.beta.size(), 0.0);
  out.kerr_hz = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(modes.size()), static_cast<Eigen::Index>(modes.size()));
  return out;
}

DressedSystem quantize(const SystemSpec& spec, const QuarticOptions& opts) {
  return quartic_couplings(diagonalize_linear(spec), opts);
}

NumericCouplings numeric_couplings(const DressedSystem& dressed, std::span<const std::size_t> modes, int dim) {
  if (dim < 3) throw ValidationError("oracle truncation must be at least 3 levels");
  for (std::size_t m : modes)
    if (m >= dressed.size()) throw ValidationError("mode index " + std::to_string(m) + " out of range");
  const std::size_t parts = modes.size() + 1;
  Eigen::Index total = 1;
  for (std::size_t p = 0; p < parts; ++p) total *= dim;
  if (total > 4096) throw ValidationError("oracle Hilbert space exceeds 4096 states; reduce dim or modes");

  std::vector<double> omega{dressed.transmon_linear_hz}, beta{dressed.beta_t};
  for (std::size_t m : modes) {
    omega.push_back(dressed.mode_linear_hz[m]);
    beta.push_back(dressed.beta[m]);
  }

  // Mixed-radix index with the transmon as the most significant digit.
  auto index_of = [&](const Occ& o) {
    Eigen::Index idx = 0;
    for (std::size_t p = 0; p < parts; ++p) idx = idx * dim + o[p];
    return idx;
  };
  auto occ_of = [&](Eigen::Index idx) {
    Occ o(parts);
    for (std::size_t p = parts; p-- > 0;) {
      o[p] = static_cast<int>(idx % dim);
      idx /= dim;
    }
    return o;
  };

  // Work in GHz to keep the eigensolver well scaled.
  const double unit = 1e9;
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(total, total);  // sum_i beta_i X_i
  for (Eigen::Index c = 0; c < total; ++c) {
    const Occ o = occ_of(c);
    for (std::size_t p = 0; p < parts; ++p) {
      if (o[p] + 1 < dim) {
        Occ up = o;
        ++up[p];
        x(index_of(up), c) += beta[p] * std::sqrt(static_cast<double>(o[p] + 1));
      }
      if (o[p] > 0) {
        Occ dn = o;
        --dn[p];
        x(index_of(dn), c) += beta[p] * std::sqrt(static_cast<double>(o[p]));
      }
    }
  }
  const Eigen::MatrixXd x2 = x * x;
  Eigen::MatrixXd hm = -(dressed.e_c_hz / unit / 12.0) * (x2 * x2);
  for (Eigen::Index c = 0; c < total; ++c) {
    const Occ o = occ_of(c);
    for (std::size_t p = 0; p < parts; ++p) hm(c, c) += omega[p] / unit * o[p];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hm);
  if (es.info() != Eigen::Success) throw NumericalError("oracle eigensolver failed");

  auto energy = [&](const Occ& o) {
    const Eigen::Index row = index_of(o);
    Eigen::Index best;
    es.eigenvectors().row(row).cwiseAbs().maxCoeff(&best);
    return es.eigenvalues()[best] * unit;
  };
  Occ vac(parts, 0), t1 = vac, t2 = vac;
  t1[0] = 1;
  t2[0] = 2;
  NumericCouplings out;
  out.transmon_hz = energy(t1) - energy(vac);
  out.alpha_hz = -(energy(t2) - 2.0 * energy(t1) + energy(vac));
  for (std::size_t p = 1; p < parts; ++p) {
    Occ m1 = vac, m2 = vac, tm = t1;
    m1[p] = 1;
    m2[p] = 2;
    tm[p] = 1;
    out.mode_hz.push_back(energy(m1) - energy(vac));
    out.chi_hz.push_back(-(energy(tm) - energy(t1) - energy(m1) + energy(vac)));
    out.self_kerr_hz.push_back(-(energy(m2) - 2.0 * energy(m1) + energy(vac)));
  }
  return out;
}

}  // namespace cqed::bbq
