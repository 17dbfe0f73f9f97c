#include <doctest.h>

#include <sstream>

#include "cqed/error.hpp"
#include "cqed/io.hpp"

using namespace cqed;
using io::json;

namespace {

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv errors carry the line number") {
  std::istringstream in("# comment\nfrequency_hz,real,imag\n1,2,3\n\n2,oops,4\n");
  CHECK(error_of([&] { io::read_csv(in, "t.csv"); }).rfind("t.csv:5: column 2", 0) == 0);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK(error_of([&] { io::read_csv(ragged, "r.csv"); }).rfind("r.csv:3: expected 2 columns", 0) == 0);

  std::istringstream order("frequency_hz,real,imag\n");
  std::ostringstream rows;
  rows << "frequency_hz,real,imag\n";
  for (int i = 0; i < 20; ++i) rows << (i == 10 ? 5 : i) << ",1,0\n";
  std::istringstream unsorted(rows.str());
  CHECK(error_of([&] { io::read_trace(unsorted, fit::TraceKind::Transmission, "u.csv"); }).rfind("u.csv:12:", 0) == 0);
}

TEST_CASE("trace round trip through csv") {
  fit::Trace t;
  for (int i = 0; i < 20; ++i) {
    t.frequency_hz.push_back(7e9 + 1e3 * i);
    t.value.emplace_back(0.1 * i, -0.3 + 1e-17 * i);
  }
  std::stringstream buf;
  io::write_trace(buf, t);
  const auto back = io::read_trace(buf, fit::TraceKind::Transmission, "mem");
  CHECK(back.frequency_hz == t.frequency_hz);
  CHECK(back.value == t.value);
}

TEST_CASE("magnitude and phase columns") {
  std::ostringstream rows;
  rows << "frequency_hz,mag_db,phase_rad\n";
  for (int i = 0; i < 20; ++i) rows << 1000000000 + i << ",-20,1.5\n";
  std::istringstream in(rows.str());
  const auto t = io::read_trace(in, fit::TraceKind::Reflection, "mp");
  CHECK(std::abs(t.value[3]) == doctest::Approx(0.1));
  CHECK(std::arg(t.value[3]) == doctest::Approx(1.5));
}

TEST_CASE("temperature sweep columns") {
  std::istringstream in("temperature_k,q_int\n0.1,1e7\n0.2,9e6\n0.3,8e6\n");
  const auto s = io::read_temp_sweep(in, 9e9, "s");
  CHECK(s.has_q());
  CHECK_FALSE(s.has_shift());
  std::istringstream none("temperature_k,x\n0.1,1\n");
  CHECK_THROWS_AS(io::read_temp_sweep(none, 9e9, "s"), ValidationError);
}

TEST_CASE("system json round trip") {
  const auto spec = bbq::nine_mode_system();
  const auto back = io::system_from_json(io::to_json(spec));
  REQUIRE(back.modes.size() == spec.modes.size());
  CHECK(back.transmon_hz == spec.transmon_hz);
  CHECK(back.modes[9].role == bbq::ModeRole::Readout);
  CHECK(back.modes[3].g_hz == spec.modes[3].g_hz);
}

TEST_CASE("schema violations name the field") {
  json j = io::to_json(bbq::nine_mode_system());
  j["modes"][3]["g_hz"] = "lots";
  CHECK(error_of([&] { io::system_from_json(j); }).rfind("modes[3].g_hz", 0) == 0);
  j = io::to_json(bbq::nine_mode_system());
  j["modes"][1]["role"] = "pump";
  CHECK(error_of([&] { io::system_from_json(j); }).rfind("modes[1].role", 0) == 0);
  j = io::to_json(bbq::nine_mode_system());
  j.erase("e_c_hz");
  CHECK(error_of([&] { io::system_from_json(j); }).find("e_c_hz") != std::string::npos);
}
