#include <cmath>
#include <numbers>
#include <sstream>

#include "cli.hpp"

namespace dirand::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& s, const std::string& whole) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("cannot parse number '" + whole + "'");
  }
  if (used != s.size() || !std::isfinite(x)) throw InputError("cannot parse number '" + whole + "'");
  return x;
}

}  // namespace

double parse_value(const std::string& text) {
  std::string s = trim(text);
  if (s.empty()) throw InputError("empty value");
  double divisor = 1.0;
  if (const auto slash = s.find('/'); slash != std::string::npos) {
    divisor = parse_number(trim(s.substr(slash + 1)), text);
    if (divisor == 0.0) throw InputError("division by zero in '" + text + "'");
    s = trim(s.substr(0, slash));
  }
  double factor = 1.0;
  if (const auto p = s.find("pi"); p != std::string::npos) {
    if (p + 2 != s.size()) throw InputError("cannot parse number '" + text + "'");
    factor = std::numbers::pi;
    s = trim(s.substr(0, p));
    if (!s.empty() && s.back() == '*') s = trim(s.substr(0, s.size() - 1));
    if (s == "-") s = "-1";
    if (s.empty()) s = "1";
  }
  return parse_number(s, text) * factor / divisor;
}

std::vector<double> parse_grid(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw InputError("empty grid");
  if (s.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3 || s.back() == ':') throw InputError("range '" + text + "' must be start:stop:count");
    const double a = parse_value(parts[0]);
    const double b = parse_value(parts[1]);
    const double n = parse_number(trim(parts[2]), text);
    if (n < 1 || n != std::floor(n)) throw InputError("range '" + text + "' needs a positive integer count");
    const auto count = static_cast<std::size_t>(n);
    if (count == 1) return {a};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    out.back() = b;
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(s);
  for (std::string part; std::getline(ss, part, ',');) out.push_back(parse_value(part));
  if (s.back() == ',') throw InputError("trailing comma in grid '" + text + "'");
  return out;
}

}  // namespace dirand::cli
