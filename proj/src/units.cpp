#include "cqed/units.hpp"

#include <cctype>
#include <charconv>
#include <string>

#include "cqed/error.hpp"

namespace cqed {

namespace {

struct UnitEntry {
  std::string_view symbol;
  Dimension dim;
};

constexpr UnitEntry kUnits[] = {
    {"m", Dimension::Length},      {"Hz", Dimension::Frequency}, {"s", Dimension::Time},
    {"K", Dimension::Temperature}, {"ohm", Dimension::Resistance}, {"Ohm", Dimension::Resistance},
};

double prefix_scale(char p, bool& ok) {
  ok = true;
  switch (p) {
    case 'f': return 1e-15;
    case 'p': return 1e-12;
    case 'n': return 1e-9;
    case 'u': return 1e-6;
    case 'm': return 1e-3;
    case 'c': return 1e-2;
    case 'k': return 1e3;
    case 'M': return 1e6;
    case 'G': return 1e9;
    case 'T': return 1e12;
    default: ok = false; return 1.0;
  }
}

}  // namespace

std::string_view dimension_name(Dimension dim) {
  switch (dim) {
    case Dimension::Length: return "length";
    case Dimension::Frequency: return "frequency";
    case Dimension::Time: return "time";
    case Dimension::Temperature: return "temperature";
    case Dimension::Resistance: return "resistance";
    case Dimension::Dimensionless: return "dimensionless";
  }
  return "unknown";
}

double parse_quantity(std::string_view text, Dimension dim) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) throw ValidationError("empty quantity");

  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{}) throw ValidationError("cannot parse number in '" + std::string(text) + "'");
  std::string_view suffix(ptr, static_cast<std::size_t>(last - ptr));
  while (!suffix.empty() && std::isspace(static_cast<unsigned char>(suffix.front()))) suffix.remove_prefix(1);
  if (suffix.empty()) return value;

  if (suffix == "%") {
    if (dim != Dimension::Dimensionless)
      throw ValidationError("'%' given for a " + std::string(dimension_name(dim)) + " quantity");
    return value * 1e-2;
  }

  // Longest unit match at the end of the suffix; what remains must be one prefix char.
  for (const auto& unit : kUnits) {
    if (suffix.size() < unit.symbol.size()) continue;
    if (suffix.substr(suffix.size() - unit.symbol.size()) != unit.symbol) continue;
    std::string_view pre = suffix.substr(0, suffix.size() - unit.symbol.size());
    if (unit.dim != dim) continue;
    if (pre.empty()) return value;
    if (pre.size() == 1) {
      bool ok = false;
      double scale = prefix_scale(pre.front(), ok);
      if (ok) return value * scale;
    }
    if (pre == "mu" || pre == "\u00b5" || pre == "\u03bc") return value * 1e-6;
  }
  throw ValidationError("unit '" + std::string(suffix) + "' is not a valid " +
                        std::string(dimension_name(dim)) + " unit");
}

}  // namespace cqed
