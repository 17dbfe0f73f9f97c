#include "cqed/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cqed/error.hpp"

namespace cqed::io {

namespace {

std::string trim(std::string_view s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  const auto b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void csv_error(const std::string& source, int line, const std::string& what) {
  throw ValidationError(source + ":" + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& cell, const std::string& source, int line, std::size_t col) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (cell.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
    csv_error(source, line, "column " + std::to_string(col + 1) + ": '" + cell + "' is not a finite number");
  return v;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::values(int column) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.at(static_cast<std::size_t>(column)));
  return out;
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (t.header.empty()) {
      t.header = split(s);
      for (const auto& h : t.header)
        if (h.empty()) csv_error(source, n, "empty column name in header");
      continue;
    }
    const auto cells = split(s);
    if (cells.size() != t.header.size())
      csv_error(source, n, "expected " + std::to_string(t.header.size()) + " columns, found " +
                               std::to_string(cells.size()));
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) row.push_back(parse_number(cells[c], source, n, c));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(n);
  }
  if (t.header.empty()) throw ValidationError(source + ": no header row");
  return t;
}

fit::Trace read_trace(std::istream& in, fit::TraceKind kind, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  const int f = t.column("frequency_hz");
  if (f < 0) throw ValidationError(source + ": missing column 'frequency_hz'");
  fit::Trace tr;
  tr.kind = kind;
  tr.metadata["source"] = source;
  tr.frequency_hz = t.values(f);
  const int re = t.column("real"), im = t.column("imag");
  const int db = t.column("mag_db"), ph = t.column("phase_rad");
  if (re >= 0 && im >= 0) {
    for (const auto& r : t.rows) tr.value.emplace_back(r[static_cast<std::size_t>(re)], r[static_cast<std::size_t>(im)]);
  } else if (db >= 0 && ph >= 0) {
    for (const auto& r : t.rows)
      tr.value.push_back(std::polar(std::pow(10.0, r[static_cast<std::size_t>(db)] / 20.0), r[static_cast<std::size_t>(ph)]));
  } else {
    throw ValidationError(source + ": need columns 'real,imag' or 'mag_db,phase_rad'");
  }
  for (std::size_t i = 1; i < tr.frequency_hz.size(); ++i)
    if (!(tr.frequency_hz[i] > tr.frequency_hz[i - 1]))
      csv_error(source, t.line_numbers[i], "frequency_hz must be strictly increasing");
  tr.validate();
  return tr;
}

void write_trace(std::ostream& out, const fit::Trace& trace) {
  out << "frequency_hz,real,imag\n";
  out.precision(17);
  for (std::size_t i = 0; i < trace.frequency_hz.size(); ++i)
    out << trace.frequency_hz[i] << ',' << trace.value[i].real() << ',' << trace.value[i].imag() << '\n';
}

bcs::TempSweep read_temp_sweep(std::istream& in, double f0_hz, const std::string& source) {
  const CsvTable t = read_csv(in, source);
  const int tc = t.column("temperature_k");
  if (tc < 0) throw ValidationError(source + ": missing column 'temperature_k'");
  const int df = t.column("df_over_f"), q = t.column("q_int");
  if (df < 0 && q < 0) throw ValidationError(source + ": need a 'df_over_f' or 'q_int' column");
  bcs::TempSweep s;
  s.f0_hz = f0_hz;
  s.temperature_k = t.values(tc);
  if (df >= 0) s.df_over_f = t.values(df);
  if (q >= 0) s.q_int = t.values(q);
  for (std::size_t i = 1; i < s.temperature_k.size(); ++i)
    if (!(s.temperature_k[i] > s.temperature_k[i - 1]))
      csv_error(source, t.line_numbers[i], "temperature_k must be strictly increasing");
  s.validate();
  return s;
}

void write_temp_sweep(std::ostream& out, const bcs::TempSweep& s) {
  out << "temperature_k";
  if (s.has_shift()) out << ",df_over_f";
  if (s.has_q()) out << ",q_int";
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < s.temperature_k.size(); ++i) {
    out << s.temperature_k[i];
    if (s.has_shift()) out << ',' << s.df_over_f[i];
    if (s.has_q()) out << ',' << s.q_int[i];
    out << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const geometry::ModeSpectrum& s) {
  out << "index,frequency_hz,spacing_hz\n";
  out.precision(12);
  for (std::size_t i = 0; i < s.frequencies.size(); ++i) {
    out << i << ',' << s.frequencies[i] << ',';
    if (i < s.spacings.size()) out << s.spacings[i];
    out << '\n';
  }
}

json to_json(const geometry::ModeSpectrum& s) {
  json j;
  j["frequencies_hz"] = s.frequencies;
  j["spacings_hz"] = s.spacings;
  if (!s.labels.empty()) {
    json labels = json::array();
    for (const auto& [n, m] : s.labels) labels.push_back({n, m});
    j["labels"] = labels;
  }
  return j;
}

json to_json(const fit::ResonatorFit& f) {
  json j;
  j["f0_hz"] = f.params.f0_hz;
  j["kappa_i_hz"] = f.params.kappa_i_hz;
  j["kappa1_hz"] = f.params.kappa1_hz;
  j["kappa2_hz"] = f.params.kappa2_hz;
  j["gamma1_hz"] = f.params.gamma1_hz;
  j["gamma2_hz"] = f.params.gamma2_hz;
  j["q_int"] = f.q_int;
  j["gain"] = {{"re", f.gain.real()}, {"im", f.gain.imag()}};
  j["delay_s"] = f.delay_s;
  j["residual_norm"] = f.residual_norm;
  j["iterations"] = f.iterations;
  json params = json::object();
  for (std::size_t i = 0; i < f.names.size(); ++i)
    params[f.names[i]] = {{"value", f.values[i]}, {"sigma", f.uncertainties[i]}};
  j["fitted"] = params;
  json cov = json::array();
  for (Eigen::Index r = 0; r < f.covariance.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < f.covariance.cols(); ++c) row.push_back(f.covariance(r, c));
    cov.push_back(row);
  }
  j["covariance"] = cov;
  return j;
}

json to_json(const bcs::BcsFit& f) {
  json j;
  j["p_mag"] = f.p_mag;
  j["p_mag_sigma"] = f.p_mag_sigma;
  j["tc_k"] = f.tc_k;
  j["tc_sigma"] = f.tc_sigma;
  j["nu"] = f.nu;
  if (f.q_int_max) j["q_int_max"] = *f.q_int_max;
  if (f.lambda_l_m) j["lambda_l_m"] = *f.lambda_l_m;
  j["residual_norm"] = f.residual_norm;
  j["iterations"] = f.iterations;
  return j;
}

namespace {

double number_field(const json& obj, const std::string& key, const std::string& path, bool required = true,
                    double fallback = 0.0) {
  if (!obj.contains(key)) {
    if (required) throw ValidationError(path + key + ": missing required field");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path + key + ": expected a number");
  return v.get<double>();
}

}  // namespace

bbq::SystemSpec system_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("system: expected a JSON object");
  bbq::SystemSpec s;
  s.transmon_hz = number_field(j, "transmon_hz", "");
  s.e_c_hz = number_field(j, "e_c_hz", "");
  s.e_j_hz = number_field(j, "e_j_hz", "", false, 0.0);
  if (!j.contains("modes") || !j.at("modes").is_array()) throw ValidationError("modes: expected an array");
  const json& modes = j.at("modes");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string path = "modes[" + std::to_string(i) + "].";
    const json& m = modes[i];
    if (!m.is_object()) throw ValidationError("modes[" + std::to_string(i) + "]: expected an object");
    bbq::BareMode bm;
    bm.freq_hz = number_field(m, "freq_hz", path);
    bm.g_hz = number_field(m, "g_hz", path);
    bm.label = "m" + std::to_string(i + 1);
    if (m.contains("label")) {
      if (!m.at("label").is_string()) throw ValidationError(path + "label: expected a string");
      bm.label = m.at("label").get<std::string>();
    }
    if (m.contains("role")) {
      if (!m.at("role").is_string()) throw ValidationError(path + "role: expected a string");
      const auto role = m.at("role").get<std::string>();
      if (role == "readout") bm.role = bbq::ModeRole::Readout;
      else if (role == "storage") bm.role = bbq::ModeRole::Storage;
      else throw ValidationError(path + "role: expected 'storage' or 'readout', got '" + role + "'");
    }
    s.modes.push_back(bm);
  }
  s.validate();
  return s;
}

json to_json(const bbq::SystemSpec& s) {
  json j;
  j["transmon_hz"] = s.transmon_hz;
  j["e_c_hz"] = s.e_c_hz;
  if (s.e_j_hz > 0.0) j["e_j_hz"] = s.e_j_hz;
  json modes = json::array();
  for (const auto& m : s.modes)
    modes.push_back({{"label", m.label},
                     {"freq_hz", m.freq_hz},
                     {"g_hz", m.g_hz},
                     {"role", m.role == bbq::ModeRole::Readout ? "readout" : "storage"}});
  j["modes"] = modes;
  return j;
}

json to_json(const bbq::DressedSystem& d) {
  json j;
  j["e_c_hz"] = d.e_c_hz;
  j["transmon_linear_hz"] = d.transmon_linear_hz;
  j["transmon_hz"] = d.transmon_hz;
  j["beta_t"] = d.beta_t;
  j["alpha_hz"] = d.alpha_hz;
  j["alpha_first_order_hz"] = d.alpha_first_order_hz;
  j["perturbation_order"] = d.perturbation_order;
  json modes = json::array();
  for (std::size_t i = 0; i < d.size(); ++i) {
    json m;
    m["label"] = i < d.labels.size() ? d.labels[i] : "m" + std::to_string(i + 1);
    m["role"] = i < d.roles.size() && d.roles[i] == bbq::ModeRole::Readout ? "readout" : "storage";
    m["linear_hz"] = d.mode_linear_hz[i];
    m["frequency_hz"] = d.mode_hz[i];
    m["beta"] = d.beta[i];
    if (i < d.chi_hz.size()) m["chi_hz"] = d.chi_hz[i];
    if (i < d.chi_first_order_hz.size()) m["chi_first_order_hz"] = d.chi_first_order_hz[i];
    modes.push_back(m);
  }
  j["modes"] = modes;
  json kerr = json::array();
  for (Eigen::Index r = 0; r < d.kerr_hz.rows(); ++r)
    for (Eigen::Index c = 0; c < d.kerr_hz.cols(); ++c) kerr.push_back(d.kerr_hz(r, c));
  j["kerr_hz"] = {{"dim", d.kerr_hz.rows()}, {"row_major", kerr}};
  j["warnings"] = d.warnings;
  return j;
}

json to_json(const drive::SidebandPlan& p) {
  json j;
  j["mode"] = p.mode + 1;  // 1-based, as on the command line
  j["epsilon_hz"] = p.epsilon_hz;
  j["drive_hz"] = p.drive_hz;
  j["bare_drive_hz"] = p.bare_drive_hz;
  j["resonance_shift_hz"] = p.resonance_shift_hz;
  j["g_hz"] = p.g_hz;
  j["g_approx_hz"] = p.g_approx_hz;
  j["g_ratio"] = p.g_ratio;
  j["xi_t"] = p.xi_t;
  j["xi_r"] = p.xi_r;
  j["xi_d"] = p.xi_d;
  j["stark_hz"] = p.stark_hz;
  j["n_r"] = p.n_r;
  j["n_t"] = p.n_t;
  j["pi_time_s"] = p.pi_time_s;
  j["half_period_1_over_2g_s"] = p.half_period_1_over_2g_s;
  j["warnings"] = p.warnings;
  return j;
}

json to_json(const drive::BlockadeReport& r) {
  json j;
  j["omega_hz"] = r.omega_hz;
  j["epsilon_hz"] = r.epsilon_hz;
  j["chi_hz"] = r.chi_hz;
  j["t_q_s"] = r.t_q_s;
  j["hierarchy_ok"] = r.hierarchy_ok;
  j["leakage"] = r.leakage;
  j["purcell"] = r.purcell;
  j["optimal_epsilon_hz"] = r.optimal_epsilon_hz;
  j["minimum_error"] = r.minimum_error;
  j["floor"] = r.floor;
  j["subspace_rabi_hz"] = r.subspace_rabi_hz;
  j["warnings"] = r.warnings;
  return j;
}

void write_sweep_csv(std::ostream& out, std::span<const drive::SidebandPlan> plans) {
  out << "mode,omega_d_hz,g_hz,xi_t,xi_r,n_r,n_t\n";
  out.precision(12);
  for (const auto& p : plans)
    out << p.mode + 1 << ',' << p.drive_hz << ',' << p.g_hz << ',' << p.xi_t << ',' << p.xi_r << ',' << p.n_r << ','
        << p.n_t << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ValidationError(path + ": cannot write");
  out << j.dump(2) << '\n';
}

}  // namespace cqed::io
