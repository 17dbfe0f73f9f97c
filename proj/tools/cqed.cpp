#include <CLI11.hpp>
#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "cqed/bbq.hpp"
#include "cqed/bcs_surface.hpp"
#include "cqed/drive_control.hpp"
#include "cqed/error.hpp"
#include "cqed/geometry.hpp"
#include "cqed/io.hpp"
#include "cqed/protocols.hpp"
#include "cqed/resonator_fit.hpp"
#include "cqed/units.hpp"
#include "cqed/wigner.hpp"

#ifndef CQED_VERSION
#define CQED_VERSION "unknown"
#endif

namespace fs = std::filesystem;
using namespace cqed;
using io::json;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::string out_dir;
  std::uint64_t seed = 1;
  int jobs = 0;
  json inputs = json::object();
  json outputs = json::array();

  fs::path file(const std::string& name) {
    fs::create_directories(out_dir);
    outputs.push_back(name);
    return fs::path(out_dir) / name;
  }

  void write_json(const std::string& name, const json& j) { io::write_json_file(file(name).string(), j); }

  std::ofstream open(const std::string& name) {
    std::ofstream out(file(name));
    if (!out) throw ValidationError("cannot write " + name + " in " + out_dir);
    return out;
  }

  void write_manifest() {
    json m;
    m["tool"] = "cqed";
    m["version"] = CQED_VERSION;
    m["command"] = command;
    m["argv"] = argv;
    m["seed"] = seed;
    m["jobs"] = jobs;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    fs::create_directories(out_dir);
    io::write_json_file((fs::path(out_dir) / "run_manifest.json").string(), m);
  }
};

double q(const std::string& text, Dimension dim, const std::string& flag) {
  try {
    return parse_quantity(text, dim);
  } catch (const ValidationError& e) {
    throw ValidationError(flag + ": " + e.what());
  }
}

double q_opt(const std::string& text, Dimension dim, const std::string& flag, double fallback) {
  if (text.empty()) return fallback;
  if (text == "inf") return inf;
  return q(text, dim, flag);
}

geometry::WaveguideMode parse_waveguide_mode(const std::string& s) {
  static const std::regex re("(te|tm|TE|TM)_?([0-9])_?([0-9]+)");
  std::smatch m;
  if (std::regex_match(s, m, re)) {
    geometry::WaveguideMode w;
    w.family = (m[1] == "te" || m[1] == "TE") ? geometry::ModeFamily::TE : geometry::ModeFamily::TM;
    w.n = std::stoi(m[2]);
    w.m = std::stoi(m[3]);
    return w;
  }
  throw ValidationError("--mode: expected te<n><m> or tm<n><m>, got '" + s + "'");
}

bbq::SystemSpec load_system(Run& run, const std::string& path) {
  if (path.empty()) {
    run.inputs["system"] = "built-in nine-mode system";
    return bbq::nine_mode_system();
  }
  run.inputs["system"] = path;
  return io::system_from_json(io::read_json_file(path));
}

bbq::DressedSystem load_dressed(Run& run, const std::string& path, int order = 3) {
  bbq::QuarticOptions opts;
  opts.order = order;
  return bbq::quantize(load_system(run, path), opts);
}

std::size_t mode_index(const bbq::DressedSystem& d, int one_based) {
  if (one_based < 1 || static_cast<std::size_t>(one_based) > d.size())
    throw ValidationError("--mode: must lie in [1, " + std::to_string(d.size()) + "]");
  return static_cast<std::size_t>(one_based - 1);
}

// "pi", "-pi/2", "1.5", "0.5pi"
double parse_angle(std::string s) {
  double sign = 1.0;
  if (!s.empty() && s[0] == '-') {
    sign = -1.0;
    s.erase(0, 1);
  }
  double divisor = 1.0;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    divisor = std::stod(s.substr(slash + 1));
    s = s.substr(0, slash);
  }
  double value;
  if (const auto p = s.find("pi"); p != std::string::npos) {
    const std::string coef = s.substr(0, p);
    value = (coef.empty() ? 1.0 : std::stod(coef)) * std::numbers::pi;
  } else {
    value = std::stod(s);
  }
  return sign * value / divisor;
}

// D:re[:im]  or  S:n=theta[,n=theta...]
protocols::SnapStep parse_step(const std::string& s) {
  try {
    if (s.rfind("D:", 0) == 0) {
      const std::string body = s.substr(2);
      const auto colon = body.find(':');
      const double re = std::stod(body.substr(0, colon));
      const double im = colon == std::string::npos ? 0.0 : std::stod(body.substr(colon + 1));
      return protocols::SnapStep::displace({re, im});
    }
    if (s.rfind("S:", 0) == 0) {
      std::vector<std::pair<int, double>> phases;
      std::stringstream ss(s.substr(2));
      std::string item;
      while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("");
        phases.emplace_back(std::stoi(item.substr(0, eq)), parse_angle(item.substr(eq + 1)));
      }
      return protocols::SnapStep::snap(phases);
    }
  } catch (const std::logic_error&) {
  }
  throw ValidationError("--step: expected 'D:re[:im]' or 'S:n=theta[,n=theta]', got '" + s + "'");
}

std::vector<protocols::SnapStep> fock1_preset() {
  return {protocols::SnapStep::displace(-1.143), protocols::SnapStep::snap({{0, std::numbers::pi}}),
          protocols::SnapStep::displace(0.580)};
}

double epsilon_for_xi_d(const bbq::DressedSystem& d, std::size_t mode, double xi_d) {
  double eps = 1e6;
  for (int i = 0; i < 4; ++i) eps *= xi_d / drive::sideband_plan(d, mode, eps).xi_d;
  return eps;
}

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s << std::setprecision(prec) << v;
  return s.str();
}

// ---------------------------------------------------------------- commands

struct CutoffArgs {
  std::string diameter, radius, mode = "te11", frequency, length, reference_length;
};

void cmd_cutoff(Run& run, const CutoffArgs& a) {
  if (a.diameter.empty() == a.radius.empty()) throw ValidationError("give exactly one of --diameter or --radius");
  geometry::HoleSpec hole;
  hole.radius_m = a.radius.empty() ? 0.5 * q(a.diameter, Dimension::Length, "--diameter")
                                   : q(a.radius, Dimension::Length, "--radius");
  hole.mode = parse_waveguide_mode(a.mode);
  const double fc = geometry::cutoff_frequency(hole);
  json j;
  j["radius_m"] = hole.radius_m;
  j["mode"] = a.mode;
  j["cutoff_hz"] = fc;
  std::cout << "cutoff " << a.mode << ": " << fmt(fc / 1e9, 6) << " GHz\n";
  if (!a.frequency.empty()) {
    const double f = q(a.frequency, Dimension::Frequency, "--frequency");
    const auto beta = geometry::propagation_constant(hole, f);
    j["frequency_hz"] = f;
    j["beta_per_m"] = beta.magnitude;
    j["evanescent"] = beta.evanescent;
    std::cout << "|beta| at " << fmt(f / 1e9) << " GHz: " << fmt(beta.magnitude) << " 1/m"
              << (beta.evanescent ? " (evanescent)" : " (propagating)") << '\n';
    if (!a.length.empty()) {
      hole.depth_m = q(a.length, Dimension::Length, "--length");
      geometry::HoleSpec ref = hole;
      ref.depth_m = a.reference_length.empty() ? hole.radius_m
                                               : q(a.reference_length, Dimension::Length, "--reference-length");
      const double att = geometry::evanescent_attenuation(hole, f);
      const double ratio = geometry::external_q_ratio(hole, ref, f);
      j["length_m"] = hole.depth_m;
      j["attenuation"] = att;
      j["reference_length_m"] = ref.depth_m;
      j["q_ext_ratio"] = ratio;
      std::cout << "attenuation exp(-|beta|L): " << fmt(att, 8) << "\nQ_ext ratio vs L = " << fmt(ref.depth_m * 1e3)
                << " mm: " << fmt(ratio, 6) << '\n';
    }
  }
  run.write_json("cutoff.json", j);
}

struct SpectrumArgs {
  std::string height, length, fmax = "12GHz", taper_coeff, taper_height = "0";
  int grid = 2048;
  bool closed_form = false;
  int m_max = 20;
};

void cmd_spectrum(Run& run, const SpectrumArgs& a) {
  const double h0 = q(a.height, Dimension::Length, "--height");
  const double l = q(a.length, Dimension::Length, "--length");
  const double fmax = q(a.fmax, Dimension::Frequency, "--fmax");
  geometry::ModeSpectrum s;
  json j;
  if (a.closed_form) {
    s = geometry::rect_spectrum(h0, l, 1, a.m_max);
    std::vector<double> f, sp;
    for (double x : s.frequencies)
      if (x <= fmax) f.push_back(x);
    s.frequencies = f;
    for (std::size_t i = 1; i < f.size(); ++i) sp.push_back(f[i] - f[i - 1]);
    s.spacings = sp;
    s.labels.resize(std::min(s.labels.size(), f.size()));
    j["method"] = "closed_form";
  } else {
    geometry::CavityProfile p;
    p.h0_m = h0;
    p.length_m = l;
    p.grid_points = a.grid;
    p.taper_coeff = a.taper_coeff.empty() ? q(a.taper_height, Dimension::Dimensionless, "--taper-height") * h0 / (l * l)
                                          : q(a.taper_coeff, Dimension::Dimensionless, "--taper-coeff");
    s = geometry::tapered_spectrum(p, fmax);
    j["method"] = "tapered";
    j["taper_coeff_per_m"] = p.taper_coeff;
  }
  j["spectrum"] = io::to_json(s);
  if (s.frequencies.size() >= 9) j["spacing_spread_modes_2_9"] = geometry::spacing_spread(s, 1, 8);
  auto out = run.open("spectrum.csv");
  io::write_spectrum_csv(out, s);
  run.write_json("spectrum.json", j);
  std::cout << s.frequencies.size() << " modes below " << fmt(fmax / 1e9) << " GHz\n";
  for (std::size_t i = 0; i < s.frequencies.size(); ++i) std::cout << "  " << i + 1 << "  " << fmt(s.frequencies[i] / 1e9, 7) << " GHz\n";
}

struct FitArgs {
  std::string kind;
  std::vector<std::string> inputs;
  bool synthesize = false;
  std::string f0 = "7GHz", kappa_i = "50kHz", kappa1 = "100kHz", kappa2, noise = "0.5%";
  int points = 401;
  double coupling_ratio = 1.0;
};

void cmd_fit(Run& run, const FitArgs& a) {
  fit::TraceKind kind;
  if (a.kind == "s21") kind = fit::TraceKind::Transmission;
  else if (a.kind == "s11") kind = fit::TraceKind::Reflection;
  else throw ValidationError("--kind: expected s21 or s11");
  if (a.synthesize == !a.inputs.empty()) throw ValidationError("give --in files or --synthesize");

  std::vector<fit::Trace> traces;
  if (a.synthesize) {
    fit::ResonatorParams p;
    p.f0_hz = q(a.f0, Dimension::Frequency, "--f0");
    p.kappa_i_hz = q(a.kappa_i, Dimension::Frequency, "--kappa-i");
    p.kappa1_hz = q(a.kappa1, Dimension::Frequency, "--kappa1");
    p.kappa2_hz = a.kappa2.empty() ? (kind == fit::TraceKind::Transmission ? a.coupling_ratio * p.kappa1_hz : 0.0)
                                   : q(a.kappa2, Dimension::Frequency, "--kappa2");
    const double width = p.kappa_i_hz + p.kappa1_hz + p.kappa2_hz;
    fit::SynthesisOptions so;
    so.f_lo_hz = p.f0_hz - 10.0 * width;
    so.f_hi_hz = p.f0_hz + 10.0 * width;
    so.points = a.points;
    so.noise_rel = q(a.noise, Dimension::Dimensionless, "--noise");
    so.seed = run.seed;
    traces.push_back(fit::synthesize_trace(kind, p, so));
    auto out = run.open("trace.csv");
    io::write_trace(out, traces.back());
    run.inputs["synthetic"] = {{"f0_hz", p.f0_hz}, {"kappa_i_hz", p.kappa_i_hz}, {"kappa1_hz", p.kappa1_hz},
                               {"kappa2_hz", p.kappa2_hz}, {"noise_rel", so.noise_rel}, {"points", so.points}};
  } else {
    for (const auto& path : a.inputs) {
      std::ifstream in(path);
      if (!in) throw ValidationError(path + ": cannot open");
      traces.push_back(io::read_trace(in, kind, path));
    }
    run.inputs["traces"] = a.inputs;
  }
  fit::FitOptions fo;
  fo.coupling_ratio = a.coupling_ratio;
  const auto fits = fit::fit_traces(traces, fo);
  json out = json::array();
  for (std::size_t i = 0; i < fits.size(); ++i) {
    json j = io::to_json(fits[i]);
    if (!a.inputs.empty()) j["source"] = a.inputs[i];
    out.push_back(j);
    std::cout << "f0 = " << fmt(fits[i].params.f0_hz, 10) << " Hz, kappa_i = " << fmt(fits[i].params.kappa_i_hz)
              << " Hz, kappa1 = " << fmt(fits[i].params.kappa1_hz) << " Hz, Q_int = " << fmt(fits[i].q_int) << '\n';
  }
  run.write_json("fit.json", out.size() == 1 ? out[0] : out);
}

struct BcsArgs {
  std::string input, f0 = "9GHz", model, sm, lambda_ref = "235nm", lambda_ref_sigma = "3nm";
  bool synthesize = false;
  std::string p_mag = "4.61e-5", tc = "1.31K", q_max = "1e9", noise = "0";
  double nu = -1.0 / 3.0;
};

void cmd_bcs(Run& run, const BcsArgs& a) {
  const double f0 = q(a.f0, Dimension::Frequency, "--f0");
  bcs::TempSweep sweep;
  if (a.synthesize == !a.input.empty()) throw ValidationError("give --in or --synthesize");
  if (a.synthesize) {
    const double p = q(a.p_mag, Dimension::Dimensionless, "--p-mag");
    const double tc = q(a.tc, Dimension::Temperature, "--tc");
    const double qmax = q(a.q_max, Dimension::Dimensionless, "--q-max");
    const double noise = q(a.noise, Dimension::Dimensionless, "--noise");
    std::mt19937_64 rng(run.seed);
    std::normal_distribution<double> n01;
    sweep.f0_hz = f0;
    for (int i = 0; i < 30; ++i) {
      const double t = 0.1 * tc + (0.85 * tc - 0.1 * tc) * i / 29.0;
      sweep.temperature_k.push_back(t);
      sweep.df_over_f.push_back(bcs::frequency_shift_model(t, f0, p, tc, a.nu) * (1.0 + noise * n01(rng)));
      sweep.q_int.push_back(bcs::q_int_model(t, f0, p, tc, qmax) * (1.0 + noise * n01(rng)));
    }
    auto out = run.open("sweep.csv");
    io::write_temp_sweep(out, sweep);
    run.inputs["synthetic"] = {{"p_mag", p}, {"tc_k", tc}, {"q_max", qmax}, {"noise_rel", noise}};
  } else {
    std::ifstream in(a.input);
    if (!in) throw ValidationError(a.input + ": cannot open");
    sweep = io::read_temp_sweep(in, f0, a.input);
    run.inputs["sweep"] = a.input;
  }
  bcs::BcsFitOptions fo;
  fo.nu = a.nu;
  if (!a.sm.empty()) {
    std::string sm = a.sm;
    if (sm.size() > 2 && sm.ends_with("/m")) sm.resize(sm.size() - 2);
    fo.surface_participation_per_m = q(sm, Dimension::Dimensionless, "--sm");
  }
  std::string model = a.model;
  if (model.empty()) model = sweep.has_shift() && sweep.has_q() ? "joint" : sweep.has_shift() ? "shift" : "q";
  bcs::BcsFit f;
  if (model == "shift") f = bcs::fit_frequency_shift(sweep, fo);
  else if (model == "q") f = bcs::fit_q_vs_temperature(sweep, fo);
  else if (model == "joint") f = bcs::fit_joint(sweep, fo);
  else throw ValidationError("--model: expected shift, q or joint");
  json j = io::to_json(f);
  j["model"] = model;
  std::cout << "p_mag = " << fmt(f.p_mag) << ", Tc = " << fmt(f.tc_k) << " K\n";
  if (f.lambda_l_m) {
    const double ref = q(a.lambda_ref, Dimension::Length, "--lambda-ref");
    const double sig = q(a.lambda_ref_sigma, Dimension::Length, "--lambda-ref-sigma");
    const double z = (*f.lambda_l_m - ref) / sig;
    j["lambda_l_reference_m"] = ref;
    j["lambda_l_reference_sigma_m"] = sig;
    j["lambda_l_discrepancy_sigmas"] = z;
    j["lambda_l_discrepancy_flag"] = std::abs(z) > 2.0;
    j["pippard_mean_free_path_m"] = bcs::pippard_mean_free_path(*f.lambda_l_m);
    std::cout << "lambda_L = " << fmt(*f.lambda_l_m * 1e9) << " nm (reference " << fmt(ref * 1e9) << " +- "
              << fmt(sig * 1e9) << " nm, " << fmt(z, 3) << " sigma" << (std::abs(z) > 2.0 ? ", DISCREPANT" : "")
              << ")\n";
  }
  run.write_json("bcs.json", j);
}

struct BbqArgs {
  std::string system, dump_system;
  int order = 3;
  std::vector<int> oracle_modes;
  int oracle_dim = 10;
};

void cmd_bbq(Run& run, const BbqArgs& a) {
  const bbq::SystemSpec spec = load_system(run, a.system);
  if (!a.dump_system.empty()) {
    io::write_json_file(a.dump_system, io::to_json(spec));
    run.outputs.push_back(a.dump_system);
  }
  bbq::QuarticOptions qo;
  qo.order = a.order;
  const auto d = bbq::quantize(spec, qo);
  json j = io::to_json(d);
  std::cout << "transmon " << fmt(d.transmon_hz / 1e9, 7) << " GHz, alpha " << fmt(d.alpha_hz / 1e6, 5)
            << " MHz (first order " << fmt(d.alpha_first_order_hz / 1e6, 5) << "), beta_t " << fmt(d.beta_t, 5)
            << '\n';
  for (std::size_t i = 0; i < d.size(); ++i)
    std::cout << "  " << std::setw(8) << d.labels[i] << "  " << fmt(d.mode_hz[i] / 1e9, 7) << " GHz  beta "
              << fmt(d.beta[i], 4) << "  chi " << fmt(d.chi_hz[i] / 1e6, 4) << " MHz\n";
  for (const auto& w : d.warnings) std::cout << "warning: " << w << '\n';
  if (!a.oracle_modes.empty()) {
    std::vector<std::size_t> modes;
    for (int m : a.oracle_modes) modes.push_back(mode_index(d, m));
    const auto sub = bbq::subsystem(d, modes);
    const auto pert = bbq::quartic_couplings(sub, qo);
    const auto num = bbq::numeric_couplings(d, modes, a.oracle_dim);
    json o;
    o["modes"] = a.oracle_modes;
    o["dim"] = a.oracle_dim;
    o["alpha_perturbative_hz"] = pert.alpha_hz;
    o["alpha_numeric_hz"] = num.alpha_hz;
    o["chi_perturbative_hz"] = pert.chi_hz;
    o["chi_numeric_hz"] = num.chi_hz;
    j["oracle"] = o;
    std::cout << "oracle: alpha " << fmt(pert.alpha_hz / 1e6, 5) << " vs " << fmt(num.alpha_hz / 1e6, 5) << " MHz\n";
    for (std::size_t i = 0; i < modes.size(); ++i)
      std::cout << "  chi m" << a.oracle_modes[i] << " " << fmt(pert.chi_hz[i] / 1e6, 5) << " vs "
                << fmt(num.chi_hz[i] / 1e6, 5) << " MHz\n";
  }
  run.write_json("dressed.json", j);
}

struct SidebandArgs {
  std::string system, mode = "all", eps;
  double xi_d = 0.3;
  bool simulate = false;
  std::string duration;
};

void cmd_sideband(Run& run, const SidebandArgs& a) {
  const auto d = load_dressed(run, a.system);
  std::vector<std::size_t> modes;
  if (a.mode == "all") {
    for (std::size_t i = 0; i < d.size(); ++i)
      if (d.roles[i] == bbq::ModeRole::Storage) modes.push_back(i);
  } else {
    modes.push_back(mode_index(d, std::stoi(a.mode)));
  }
  std::vector<drive::SidebandPlan> plans(modes.size());
  std::vector<protocols::SidebandResult> sims(a.simulate ? modes.size() : 0);
  const double duration = q_opt(a.duration, Dimension::Time, "--duration", 0.0);
  std::vector<std::exception_ptr> errors(modes.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < modes.size(); ++i) {
    try {
      const double eps = a.eps.empty() ? epsilon_for_xi_d(d, modes[i], a.xi_d) : q(a.eps, Dimension::Frequency, "--eps");
      plans[i] = drive::sideband_plan(d, modes[i], eps);
      if (a.simulate) sims[i] = protocols::sideband_protocol(d, modes[i], eps, duration);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  json all = json::array();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    json j = io::to_json(plans[i]);
    std::cout << d.labels[modes[i]] << ": drive " << fmt(plans[i].drive_hz / 1e9, 8) << " GHz, eps "
              << fmt(plans[i].epsilon_hz / 1e6, 4) << " MHz, xi_d " << fmt(plans[i].xi_d, 3) << ", g "
              << fmt(plans[i].g_hz / 1e3, 5) << " kHz";
    if (a.simulate) {
      const auto& s = sims[i];
      j["simulated"] = {{"g_hz", s.g_hz}, {"pi_time_s", s.pi_time_s}, {"rate_ratio", s.rate_ratio},
                        {"min_p_f", s.min_p_f}, {"zeta", s.zeta}};
      auto out = run.open("sideband_" + d.labels[modes[i]] + ".csv");
      s.evolution.write_csv(out);
      std::cout << ", simulated g " << fmt(s.g_hz / 1e3, 5) << " kHz (ratio " << fmt(s.rate_ratio, 4) << ")";
    }
    std::cout << '\n';
    all.push_back(j);
  }
  run.write_json("plans.json", all);
  auto out = run.open("sweep.csv");
  io::write_sweep_csv(out, plans);
}

struct BlockadeArgs {
  std::string system, omega = "107kHz", eps = "10kHz", duration, t1q = "86us", t2q = "86us";
  int mode = 3;
  int mode_dim = 5;
};

void cmd_blockade(Run& run, const BlockadeArgs& a) {
  const auto d = load_dressed(run, a.system);
  const auto m = mode_index(d, a.mode);
  protocols::BlockadeOptions bo;
  bo.mode_dim = a.mode_dim;
  bo.t1_q_s = q(a.t1q, Dimension::Time, "--t1q");
  bo.t2_q_s = q(a.t2q, Dimension::Time, "--t2q");
  const auto r = protocols::blockade_protocol(d, m, q(a.omega, Dimension::Frequency, "--omega"),
                                              q(a.eps, Dimension::Frequency, "--eps"),
                                              q_opt(a.duration, Dimension::Time, "--duration", 0.0), bo);
  json j;
  j["report"] = io::to_json(r.report);
  j["cavity_detuning_hz"] = r.cavity_detuning_hz;
  j["predicted_rabi_hz"] = r.predicted_rabi_hz;
  j["rabi_hz"] = r.rabi_hz;
  j["max_p2"] = r.max_p2;
  run.write_json("blockade.json", j);
  auto out = run.open("blockade_" + d.labels[m] + ".csv");
  r.evolution.write_csv(out);
  std::cout << "subspace Rabi " << fmt(r.rabi_hz / 1e3, 5) << " kHz (two-level model " << fmt(r.predicted_rabi_hz / 1e3, 5)
            << " kHz), max P(n>=2) " << fmt(r.max_p2, 4) << '\n';
  for (const auto& w : r.report.warnings) std::cout << "warning: " << w << '\n';
}

struct SnapArgs {
  std::string system, t1q, sigma_chi = "4";
  std::vector<std::string> steps;
  int mode = 1;
  int mode_dim = 10;
  bool no_kerr_compensation = false;
};

protocols::SnapResult run_snap(Run& run, const SnapArgs& a, bbq::DressedSystem& d, std::size_t& m) {
  d = load_dressed(run, a.system);
  m = mode_index(d, a.mode);
  std::vector<protocols::SnapStep> steps;
  for (const auto& s : a.steps) steps.push_back(parse_step(s));
  if (steps.empty()) steps = fock1_preset();
  protocols::SnapOptions so;
  so.mode_dim = a.mode_dim;
  so.sigma_chi_product = q(a.sigma_chi, Dimension::Dimensionless, "--sigma-chi");
  so.compensate_kerr = !a.no_kerr_compensation;
  if (!a.t1q.empty()) so.channels.subsystems = {{q(a.t1q, Dimension::Time, "--t1q"), inf, 0.0}};
  return protocols::snap_sequence(d, m, steps, so);
}

void cmd_snap(Run& run, const SnapArgs& a) {
  bbq::DressedSystem d;
  std::size_t m = 0;
  const auto r = run_snap(run, a, d, m);
  json j;
  j["mode"] = a.mode;
  j["fidelity"] = r.fidelity;
  j["gate_time_s"] = r.gate_time_s;
  json ideal = json::array(), actual = json::array();
  for (Eigen::Index n = 0; n < r.ideal_state.size(); ++n) {
    ideal.push_back(std::norm(r.ideal_state(n)));
    actual.push_back(r.mode_state(n, n).real());
  }
  j["ideal_populations"] = ideal;
  j["final_populations"] = actual;
  j["warnings"] = r.warnings;
  run.write_json("snap.json", j);
  auto out = run.open("snap_" + d.labels[m] + ".csv");
  r.evolution.write_csv(out);
  std::cout << "fidelity " << fmt(r.fidelity, 5) << " after " << fmt(r.gate_time_s * 1e6, 4) << " us\n";
  for (const auto& w : r.warnings) std::cout << "warning: " << w << '\n';
}

struct CoherenceArgs {
  std::string system, t1q = "86us", nth = "1.2%", t1_mode = "2ms", tphi_q, omega = "107kHz", eps = "10kHz";
  int mode = 3;
  int mode_dim = 4;
};

void cmd_coherence(Run& run, const CoherenceArgs& a) {
  const auto d = load_dressed(run, a.system);
  const auto m = mode_index(d, a.mode);
  protocols::CoherenceOptions co;
  co.t1_q_s = q(a.t1q, Dimension::Time, "--t1q");
  co.n_th_q = q(a.nth, Dimension::Dimensionless, "--nth");
  co.t1_mode_s = q(a.t1_mode, Dimension::Time, "--t1-mode");
  co.t_phi_q_s = q_opt(a.tphi_q, Dimension::Time, "--tphi-q", inf);
  co.omega_hz = q(a.omega, Dimension::Frequency, "--omega");
  co.epsilon_hz = q(a.eps, Dimension::Frequency, "--eps");
  co.mode_dim = a.mode_dim;
  const auto r = protocols::coherence_protocols(d, m, co);
  json j;
  j["mode"] = a.mode;
  j["t1_fit_s"] = r.t1_fit_s;
  j["t2_fit_s"] = r.t2_fit_s;
  j["t2_closed_form_s"] = r.t2_closed_form_s;
  j["ramsey_frequency_hz"] = r.ramsey_frequency_hz;
  run.write_json("coherence.json", j);
  {
    auto out = run.open("coherence_t1.csv");
    out << "delay_s,p1,mean_n\n" << std::setprecision(12);
    for (std::size_t i = 0; i < r.t1_delays_s.size(); ++i)
      out << r.t1_delays_s[i] << ',' << r.t1_population[i] << ',' << r.t1_mean_photons[i] << '\n';
  }
  {
    auto out = run.open("coherence_ramsey.csv");
    out << "delay_s,p1\n" << std::setprecision(12);
    for (std::size_t i = 0; i < r.ramsey_delays_s.size(); ++i)
      out << r.ramsey_delays_s[i] << ',' << r.ramsey_population[i] << '\n';
  }
  std::cout << "T1 = " << fmt(r.t1_fit_s * 1e3, 4) << " ms, T2 = " << fmt(r.t2_fit_s * 1e3, 4)
            << " ms (closed form " << fmt(r.t2_closed_form_s * 1e3, 4) << " ms)\n";
}

struct WignerArgs {
  std::string state = "fock:1";
  int dim = 0;
  double extent = 3.0;
  int points = 61;
  bool svg = false;
  SnapArgs snap;
};

void cmd_wigner(Run& run, const WignerArgs& a) {
  Eigen::MatrixXcd rho;
  const std::string& s = a.state;
  // 0 picks the smallest truncation the grid corners allow.
  const int dim = a.dim > 0 ? a.dim : static_cast<int>(std::ceil(4.0 * a.extent * a.extent + 4.0));
  auto ket_density = [](const Eigen::VectorXcd& v) { return Eigen::MatrixXcd(v * v.adjoint() / v.squaredNorm()); };
  try {
    if (s == "vacuum" || s.rfind("fock:", 0) == 0) {
      const int n = s == "vacuum" ? 0 : std::stoi(s.substr(5));
      if (n < 0 || n >= dim) throw ValidationError("--state: Fock level outside --dim");
      rho = Eigen::MatrixXcd::Zero(dim, dim);
      rho(n, n) = 1.0;
    } else if (s.rfind("coherent:", 0) == 0 || s.rfind("cat:", 0) == 0) {
      const bool cat = s[0] == 'c' && s[1] == 'a';
      const std::string body = s.substr(cat ? 4 : 9);
      const auto colon = body.find(':');
      const std::complex<double> b(std::stod(body.substr(0, colon)),
                                   colon == std::string::npos ? 0.0 : std::stod(body.substr(colon + 1)));
      Eigen::VectorXcd v = protocols::displacement_operator(dim, b).col(0);
      if (cat) v += protocols::displacement_operator(dim, -b).col(0);
      rho = ket_density(v);
    } else if (s == "snap") {
      bbq::DressedSystem d;
      std::size_t m = 0;
      const auto r = run_snap(run, a.snap, d, m);
      rho = Eigen::MatrixXcd::Zero(dim, dim);
      const auto k = std::min<Eigen::Index>(dim, r.mode_state.rows());
      rho.topLeftCorner(k, k) = r.mode_state.topLeftCorner(k, k);
    } else {
      throw ValidationError("");
    }
  } catch (const std::logic_error& e) {
    if (const auto* v = dynamic_cast<const ValidationError*>(&e); v && std::string(v->what()).size() > 0) throw;
    throw ValidationError("--state: expected vacuum, fock:N, coherent:RE[:IM], cat:RE[:IM] or snap; got '" + s + "'");
  }
  run.inputs["state"] = s;
  const auto g = wigner::evaluate_square(rho, a.extent, a.points);
  {
    auto out = run.open("wigner.csv");
    g.write_csv(out);
  }
  if (a.svg) {
    auto out = run.open("wigner.svg");
    g.write_svg(out);
  }
  std::cout << "W range [" << fmt(g.w.minCoeff(), 4) << ", " << fmt(g.w.maxCoeff(), 4) << "] on " << a.points << "x"
            << a.points << " grid\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cqed: multimode circuit-QED design, fitting and simulation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  Run run;
  for (int i = 1; i < argc; ++i) run.argv.emplace_back(argv[i]);
  const char* env_out = std::getenv("CQED_OUTPUT_DIR");
  run.out_dir = env_out && *env_out ? env_out : "cqed_out";
  app.add_option("-o,--out", run.out_dir, "Output directory (default $CQED_OUTPUT_DIR or ./cqed_out)");
  app.add_option("--seed", run.seed, "Seed for every random draw")->capture_default_str();
  app.add_option("-j,--jobs", run.jobs, "Worker threads for batch fits and sweeps (0: OpenMP default)");

  CutoffArgs cut;
  auto* c_cut = app.add_subcommand("cutoff", "Waveguide cutoff, evanescent attenuation and Q_ext scaling of a hole");
  c_cut->add_option("--diameter", cut.diameter, "Hole diameter, e.g. 4.76mm");
  c_cut->add_option("--radius", cut.radius, "Hole radius");
  c_cut->add_option("--mode", cut.mode, "Waveguide mode, te11, tm01, ...")->capture_default_str();
  c_cut->add_option("--frequency", cut.frequency, "Evaluate propagation at this frequency");
  c_cut->add_option("--length", cut.length, "Hole depth for the attenuation");
  c_cut->add_option("--reference-length", cut.reference_length, "Reference depth for the Q_ext ratio (default: radius)");

  SpectrumArgs spec;
  auto* c_spec = app.add_subcommand("spectrum", "Mode spectrum of a (tapered) rectangular cavity");
  c_spec->add_option("--height", spec.height, "Cavity height h0, e.g. 28mm")->required();
  c_spec->add_option("--length", spec.length, "Cavity length, e.g. 250mm")->required();
  c_spec->add_option("--fmax", spec.fmax, "Highest frequency to report")->capture_default_str();
  c_spec->add_option("--taper-height", spec.taper_height, "Height reduction at x = length as a fraction of h0");
  c_spec->add_option("--taper-coeff", spec.taper_coeff, "Quadratic taper coefficient in 1/m (overrides --taper-height)");
  c_spec->add_option("--grid", spec.grid, "Finite-difference nodes")->capture_default_str();
  c_spec->add_flag("--closed-form", spec.closed_form, "Use the untapered closed form");
  c_spec->add_option("--m-max", spec.m_max, "Longitudinal index cap for --closed-form")->capture_default_str();

  FitArgs fa;
  auto* c_fit = app.add_subcommand("fit", "Fit S21/S11 resonator traces");
  c_fit->add_option("--kind", fa.kind, "s21 or s11")->required();
  c_fit->add_option("--in", fa.inputs, "Trace CSV file(s); several are fitted in parallel");
  c_fit->add_flag("--synthesize", fa.synthesize, "Generate a noisy synthetic trace (uses --seed) and fit it");
  c_fit->add_option("--f0", fa.f0, "Synthetic resonance frequency")->capture_default_str();
  c_fit->add_option("--kappa-i", fa.kappa_i, "Synthetic internal rate")->capture_default_str();
  c_fit->add_option("--kappa1", fa.kappa1, "Synthetic port-1 rate")->capture_default_str();
  c_fit->add_option("--kappa2", fa.kappa2, "Synthetic port-2 rate (default: ratio x kappa1 for s21, 0 for s11)");
  c_fit->add_option("--noise", fa.noise, "Noise per quadrature relative to max|S|")->capture_default_str();
  c_fit->add_option("--points", fa.points, "Synthetic trace points")->capture_default_str();
  c_fit->add_option("--coupling-ratio", fa.coupling_ratio, "kappa2/kappa1 assumed by S21 fits")->capture_default_str();

  BcsArgs ba;
  auto* c_bcs = app.add_subcommand("bcs", "Fit frequency shift and/or Q_int versus temperature");
  c_bcs->add_option("--in", ba.input, "CSV with temperature_k and df_over_f and/or q_int");
  c_bcs->add_option("--f0", ba.f0, "Resonator frequency")->capture_default_str();
  c_bcs->add_option("--model", ba.model, "shift, q or joint (default from the columns present)");
  c_bcs->add_option("--sm", ba.sm, "Surface participation S_m, e.g. 187/m; enables lambda_L");
  c_bcs->add_option("--nu", ba.nu, "Exponent of the shift model")->capture_default_str();
  c_bcs->add_option("--lambda-ref", ba.lambda_ref, "Reference lambda_L to compare against")->capture_default_str();
  c_bcs->add_option("--lambda-ref-sigma", ba.lambda_ref_sigma, "Uncertainty of the reference")->capture_default_str();
  c_bcs->add_flag("--synthesize", ba.synthesize, "Generate a synthetic sweep and fit it");
  c_bcs->add_option("--p-mag", ba.p_mag, "Synthetic magnetic participation")->capture_default_str();
  c_bcs->add_option("--tc", ba.tc, "Synthetic critical temperature")->capture_default_str();
  c_bcs->add_option("--q-max", ba.q_max, "Synthetic low-temperature Q")->capture_default_str();
  c_bcs->add_option("--noise", ba.noise, "Synthetic relative noise")->capture_default_str();

  BbqArgs bq;
  auto* c_bbq = app.add_subcommand("bbq", "Dressed frequencies, participations, anharmonicity and Kerr matrix");
  c_bbq->add_option("--system", bq.system, "SystemSpec JSON (default: built-in nine-mode system)");
  c_bbq->add_option("--order", bq.order, "Perturbation order 1-3")->capture_default_str();
  c_bbq->add_option("--oracle-modes", bq.oracle_modes, "1-based modes to check against exact diagonalisation")->delimiter(',');
  c_bbq->add_option("--oracle-dim", bq.oracle_dim, "Levels per subsystem in the oracle")->capture_default_str();
  c_bbq->add_option("--dump-system", bq.dump_system, "Also write the SystemSpec JSON to this path");

  SidebandArgs sa;
  auto* c_sb = app.add_subcommand("sideband", "Plan (and optionally simulate) f0-g1 sideband drives");
  c_sb->add_option("--system", sa.system, "SystemSpec JSON");
  c_sb->add_option("--mode", sa.mode, "1-based mode or 'all' storage modes")->capture_default_str();
  c_sb->add_option("--eps", sa.eps, "Drive amplitude (default: chosen for --xi-d)");
  c_sb->add_option("--xi-d", sa.xi_d, "Target junction displacement")->capture_default_str();
  c_sb->add_flag("--simulate", sa.simulate, "Run the time-domain simulation");
  c_sb->add_option("--duration", sa.duration, "Simulated time (default 1.5 pi times)");

  BlockadeArgs bl;
  auto* c_bl = app.add_subcommand("blockade", "Photon-blockade Rabi drive in the |0>-|1> subspace");
  c_bl->add_option("--system", bl.system, "SystemSpec JSON");
  c_bl->add_option("--mode", bl.mode, "1-based mode")->capture_default_str();
  c_bl->add_option("--omega", bl.omega, "Transmon drive Omega/2pi")->capture_default_str();
  c_bl->add_option("--eps", bl.eps, "Cavity drive eps/2pi")->capture_default_str();
  c_bl->add_option("--duration", bl.duration, "Simulated time (default one subspace Rabi period)");
  c_bl->add_option("--t1q", bl.t1q, "Transmon T1 for the validity report")->capture_default_str();
  c_bl->add_option("--t2q", bl.t2q, "Transmon T2 for the validity report")->capture_default_str();
  c_bl->add_option("--mode-dim", bl.mode_dim, "Fock truncation")->capture_default_str();

  SnapArgs sn;
  auto add_snap_options = [](CLI::App* c, SnapArgs& s) {
    c->add_option("--system", s.system, "SystemSpec JSON");
    c->add_option("--mode", s.mode, "1-based mode")->capture_default_str();
    c->add_option("--step", s.steps, "Sequence step in time order: D:re[:im] or S:n=theta[,n=theta] (default: Fock-1 preparation)");
    c->add_option("--t1q", s.t1q, "Enable transmon relaxation with this T1");
    c->add_option("--mode-dim", s.mode_dim, "Fock truncation")->capture_default_str();
    c->add_option("--sigma-chi", s.sigma_chi, "Selective pulse sigma times chi")->capture_default_str();
    c->add_flag("--no-kerr-compensation", s.no_kerr_compensation, "Do not fold self-Kerr phases into the SNAP angles");
  };
  auto* c_snap = app.add_subcommand("snap", "SNAP and displacement sequences with selective pulses");
  add_snap_options(c_snap, sn);

  CoherenceArgs co;
  auto* c_co = app.add_subcommand("coherence", "Simulated T1 and Ramsey of a storage mode");
  c_co->add_option("--system", co.system, "SystemSpec JSON");
  c_co->add_option("--mode", co.mode, "1-based mode")->capture_default_str();
  c_co->add_option("--t1q", co.t1q, "Transmon T1")->capture_default_str();
  c_co->add_option("--nth", co.nth, "Transmon thermal population")->capture_default_str();
  c_co->add_option("--t1-mode", co.t1_mode, "Mode T1")->capture_default_str();
  c_co->add_option("--tphi-q", co.tphi_q, "Transmon pure dephasing time (default none)");
  c_co->add_option("--omega", co.omega, "Blockade transmon drive")->capture_default_str();
  c_co->add_option("--eps", co.eps, "Blockade cavity drive")->capture_default_str();
  c_co->add_option("--mode-dim", co.mode_dim, "Fock truncation")->capture_default_str();

  WignerArgs wa;
  auto* c_w = app.add_subcommand("wigner", "Wigner function of a mode state on a square grid");
  c_w->add_option("--state", wa.state, "vacuum, fock:N, coherent:RE[:IM], cat:RE[:IM] or snap")->capture_default_str();
  c_w->add_option("--dim", wa.dim, "Fock truncation (default: enough for the grid)");
  c_w->add_option("--extent", wa.extent, "Grid half-width in |alpha|")->capture_default_str();
  c_w->add_option("--points", wa.points, "Points per axis")->capture_default_str();
  c_w->add_flag("--svg", wa.svg, "Also write an SVG heatmap");
  add_snap_options(c_w->add_option_group("snap", "Options for --state snap"), wa.snap);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run.jobs < 0) throw ValidationError("--jobs must be non-negative");
    if (run.jobs > 0) omp_set_num_threads(run.jobs);
    run.command = app.get_subcommands().front()->get_name();
    if (run.command == "cutoff") cmd_cutoff(run, cut);
    else if (run.command == "spectrum") cmd_spectrum(run, spec);
    else if (run.command == "fit") cmd_fit(run, fa);
    else if (run.command == "bcs") cmd_bcs(run, ba);
    else if (run.command == "bbq") cmd_bbq(run, bq);
    else if (run.command == "sideband") cmd_sideband(run, sa);
    else if (run.command == "blockade") cmd_blockade(run, bl);
    else if (run.command == "snap") cmd_snap(run, sn);
    else if (run.command == "coherence") cmd_coherence(run, co);
    else if (run.command == "wigner") cmd_wigner(run, wa);
    run.write_manifest();
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
