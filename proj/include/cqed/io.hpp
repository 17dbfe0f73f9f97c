#pragma once

#include <iosfwd>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "cqed/bbq.hpp"
#include "cqed/bcs_surface.hpp"
#include "cqed/drive_control.hpp"
#include "cqed/geometry.hpp"
#include "cqed/resonator_fit.hpp"

namespace cqed::io {

using json = nlohmann::ordered_json;

/// Numeric CSV with a header row. Blank lines and lines starting with '#'
/// are skipped. Errors name the source and the 1-based line.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> line_numbers;

  int column(const std::string& name) const;  // -1 if absent
  std::vector<double> values(int column) const;
};
CsvTable read_csv(std::istream& in, const std::string& source);

/// `frequency_hz,real,imag` or `frequency_hz,mag_db,phase_rad`.
fit::Trace read_trace(std::istream& in, fit::TraceKind kind, const std::string& source);
void write_trace(std::ostream& out, const fit::Trace& trace);

/// `temperature_k` plus `df_over_f` and/or `q_int`.
bcs::TempSweep read_temp_sweep(std::istream& in, double f0_hz, const std::string& source);
void write_temp_sweep(std::ostream& out, const bcs::TempSweep& sweep);

void write_spectrum_csv(std::ostream& out, const geometry::ModeSpectrum& s);
json to_json(const geometry::ModeSpectrum& s);

json to_json(const fit::ResonatorFit& f);
json to_json(const bcs::BcsFit& f);

/// {"transmon_hz", "e_c_hz", "e_j_hz"?, "modes": [{"label", "freq_hz", "g_hz", "role"}]}
/// with role "storage" or "readout". Errors name the offending field.
bbq::SystemSpec system_from_json(const json& j);
json to_json(const bbq::SystemSpec& s);
/// kerr_hz is written row-major as a flat array plus its dimension.
json to_json(const bbq::DressedSystem& d);

json to_json(const drive::SidebandPlan& p);
json to_json(const drive::BlockadeReport& r);
/// mode,omega_d_hz,g_hz,xi_t,xi_r,n_r,n_t
void write_sweep_csv(std::ostream& out, std::span<const drive::SidebandPlan> plans);

json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);

}  // namespace cqed::io
