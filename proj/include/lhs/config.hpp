#pragma once

// Run and sweep configuration: flat `key = value` text, `#` starts a
// comment, lists are written `[a, b, c]`. Parsing is strict: unknown or
// repeated keys and malformed values are rejected with the key and line.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lhs/errors.hpp"

namespace lhs {

enum class OmegaMode { identical, heterogeneous };

struct RunConfig {
  int d = 0;
  int N = 0;
  double dt = 0.02;
  double t_final = 0.0;
  double kappa0 = 0.0;
  double kappa1 = 0.0;
  unsigned long long seed = 0;
  OmegaMode omega_mode = OmegaMode::identical;
  double omega_range = 1.0;
  double w0_range = 0.1;
  double w1_range = 0.0;
  double init_margin = 0.9;
  bool renormalize = false;
  int record_stride = 1;
  double tail_fraction = 0.2;
  std::string output_dir = "out";
  // Real sphere data: real initial states, real skew-symmetric Omega and W0.
  bool real = false;
};

struct SweepConfig {
  RunConfig base;
  std::vector<double> kappa0_values;
  int replicates = 5;
  bool ordering_check = true;
};

using AnyConfig = std::variant<RunConfig, SweepConfig>;

inline const char* to_string(OmegaMode m) {
  return m == OmegaMode::identical ? "identical" : "heterogeneous";
}

namespace detail {

struct Entry {
  std::string value;
  std::size_t line = 0;
};

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class EntryReader {
 public:
  explicit EntryReader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  double real(const std::string& key, double fallback, bool required = false) {
    const Entry* e = take(key, required);
    return e ? to_double(key, *e) : fallback;
  }

  long long integer(const std::string& key, long long fallback, bool required = false) {
    const Entry* e = take(key, required);
    if (!e) return fallback;
    long long v = 0;
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) fail(key, *e, "expected an integer");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    const Entry* e = take(key, false);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "1") return true;
    if (e->value == "false" || e->value == "0") return false;
    fail(key, *e, "expected true or false");
    return fallback;
  }

  std::string text(const std::string& key, std::string fallback) {
    const Entry* e = take(key, false);
    if (!e) return fallback;
    std::string v = e->value;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    if (v.empty()) fail(key, *e, "empty value");
    return v;
  }

  std::vector<double> list(const std::string& key) {
    const Entry* e = take(key, true);
    std::string_view v = e->value;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') fail(key, *e, "expected [a, b, ...]");
    v = v.substr(1, v.size() - 2);
    std::vector<double> out;
    while (!trim(v).empty()) {
      const auto comma = v.find(',');
      const std::string item(trim(v.substr(0, comma)));
      out.push_back(to_double(key, Entry{item, e->line}));
      if (comma == std::string_view::npos) break;
      v = v.substr(comma + 1);
    }
    if (out.empty()) fail(key, *e, "list is empty");
    return out;
  }

  std::size_t line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  // Anything not consumed by now is an unknown key.
  void reject_leftovers() const {
    for (const auto& [key, e] : entries_)
      if (!used_.count(key))
        throw ConfigError("unknown key '" + key + "' at line " + std::to_string(e.line), key, e.line);
  }

 private:
  const Entry* take(const std::string& key, bool required) {
    auto it = entries_.find(key);
    if (it == entries_.end()) {
      if (required) throw ConfigError("missing required key '" + key + "'", key, 0);
      return nullptr;
    }
    used_[key] = true;
    return &it->second;
  }

  static double to_double(const std::string& key, const Entry& e) {
    double v = 0.0;
    const auto* first = e.value.data();
    const auto* last = first + e.value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) fail(key, e, "expected a finite number");
    return v;
  }

  [[noreturn]] static void fail(const std::string& key, const Entry& e, const std::string& why) {
    throw ConfigError("key '" + key + "' at line " + std::to_string(e.line) + ": " + why + " (got '" +
                          e.value + "')",
                      key, e.line);
  }

  std::map<std::string, Entry> entries_;
  std::map<std::string, bool> used_;
};

inline std::map<std::string, Entry> split_entries(const std::string& text) {
  std::map<std::string, Entry> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value", {}, line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key", {}, line_no);
    if (value.empty())
      throw ConfigError("key '" + key + "' at line " + std::to_string(line_no) + ": empty value", key,
                        line_no);
    if (out.count(key))
      throw ConfigError("key '" + key + "' repeated at line " + std::to_string(line_no), key, line_no);
    out[key] = Entry{value, line_no};
  }
  return out;
}

inline void check(bool ok, const EntryReader& r, const std::string& key, const std::string& what) {
  if (!ok) {
    const std::size_t line = r.line_of(key);
    throw ConfigError("key '" + key + "'" + (line ? " at line " + std::to_string(line) : "") + ": " + what,
                      key, line);
  }
}

inline RunConfig read_run(EntryReader& r, bool sweep) {
  RunConfig c;
  c.d = static_cast<int>(r.integer("d", 0, true));
  c.N = static_cast<int>(r.integer("N", 0, true));
  c.t_final = r.real("t_final", 0.0, true);
  if (!sweep) c.kappa0 = r.real("kappa0", 0.0, true);
  const long long seed = r.integer("seed", 0, true);
  c.dt = r.real("dt", c.dt);
  c.kappa1 = r.real("kappa1", c.kappa1);
  const std::string mode = r.text("omega_mode", "identical");
  c.omega_range = r.real("omega_range", c.omega_range);
  c.w0_range = r.real("w0_range", c.w0_range);
  c.w1_range = r.real("w1_range", c.w1_range);
  c.init_margin = r.real("init_margin", c.init_margin);
  c.renormalize = r.boolean("renormalize", c.renormalize);
  c.record_stride = static_cast<int>(r.integer("record_stride", c.record_stride));
  c.tail_fraction = r.real("tail_fraction", c.tail_fraction);
  c.output_dir = r.text("output_dir", c.output_dir);
  c.real = r.boolean("real", c.real);

  check(c.d >= 0, r, "d", "must be >= 0");
  check(c.N >= 1, r, "N", "must be >= 1");
  check(seed >= 0, r, "seed", "must be nonnegative");
  c.seed = static_cast<unsigned long long>(seed);
  check(c.dt > 0.0, r, "dt", "must be positive");
  check(c.t_final >= c.dt, r, "t_final", "must be at least dt");
  {
    const double steps = c.t_final / c.dt;
    check(std::abs(steps - std::round(steps)) <= 1e-9 * steps, r, "t_final",
          "must be an integer multiple of dt");
  }
  if (!sweep) check(c.kappa0 >= 0.0, r, "kappa0", "must be nonnegative");
  check(c.kappa1 >= 0.0, r, "kappa1", "must be nonnegative");
  check(mode == "identical" || mode == "heterogeneous", r, "omega_mode",
        "must be identical or heterogeneous");
  c.omega_mode = mode == "identical" ? OmegaMode::identical : OmegaMode::heterogeneous;
  check(c.omega_range >= 0.0, r, "omega_range", "must be >= 0");
  check(c.w0_range >= 0.0, r, "w0_range", "must be >= 0");
  check(c.w1_range >= 0.0, r, "w1_range", "must be >= 0");
  check(c.init_margin > 0.0 && c.init_margin < 1.0, r, "init_margin", "must lie in (0, 1)");
  check(c.record_stride >= 1, r, "record_stride", "must be >= 1");
  check(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0, r, "tail_fraction", "must lie in (0, 1]");
  check(!c.real || c.kappa1 == 0.0, r, "real", "real runs need kappa1 = 0");
  return c;
}

}  // namespace detail

inline AnyConfig parse_config_text(const std::string& text) {
  detail::EntryReader r(detail::split_entries(text));
  const bool sweep = r.has("kappa0_values");
  if (sweep && r.has("kappa0"))
    throw ConfigError("key 'kappa0' at line " + std::to_string(r.line_of("kappa0")) +
                          ": use either kappa0 or kappa0_values",
                      "kappa0", r.line_of("kappa0"));
  RunConfig base = detail::read_run(r, sweep);
  if (!sweep) {
    for (const char* k : {"replicates", "ordering_check"})
      if (r.has(k))
        throw ConfigError("key '" + std::string(k) + "' at line " + std::to_string(r.line_of(k)) +
                              ": only valid together with kappa0_values",
                          k, r.line_of(k));
    r.reject_leftovers();
    return base;
  }
  SweepConfig s;
  s.base = base;
  s.kappa0_values = r.list("kappa0_values");
  s.replicates = static_cast<int>(r.integer("replicates", s.replicates));
  s.ordering_check = r.boolean("ordering_check", s.ordering_check);
  r.reject_leftovers();
  for (std::size_t i = 0; i < s.kappa0_values.size(); ++i) {
    detail::check(s.kappa0_values[i] > 0.0, r, "kappa0_values", "values must be positive");
    if (i > 0)
      detail::check(s.kappa0_values[i] > s.kappa0_values[i - 1], r, "kappa0_values",
                    "values must be sorted ascending without repeats");
  }
  detail::check(s.replicates >= 1, r, "replicates", "must be >= 1");
  const bool anchored =
      std::find(s.kappa0_values.begin(), s.kappa0_values.end(), 1.0) != s.kappa0_values.end();
  detail::check(!s.ordering_check || s.kappa0_values.size() < 2 || anchored, r, "kappa0_values",
                "ordering check needs the kappa0 = 1 anchor");
  s.base.kappa0 = s.kappa0_values.front();
  return s;
}

inline AnyConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

// key=value echo of every resolved field, defaults included.
inline std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& c) {
  auto num = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  return {
      {"d", std::to_string(c.d)},
      {"N", std::to_string(c.N)},
      {"dt", num(c.dt)},
      {"t_final", num(c.t_final)},
      {"kappa0", num(c.kappa0)},
      {"kappa1", num(c.kappa1)},
      {"seed", std::to_string(c.seed)},
      {"omega_mode", to_string(c.omega_mode)},
      {"omega_range", num(c.omega_range)},
      {"w0_range", num(c.w0_range)},
      {"w1_range", num(c.w1_range)},
      {"init_margin", num(c.init_margin)},
      {"renormalize", c.renormalize ? "true" : "false"},
      {"record_stride", std::to_string(c.record_stride)},
      {"tail_fraction", num(c.tail_fraction)},
      {"output_dir", c.output_dir},
      {"real", c.real ? "true" : "false"},
  };
}

}  // namespace lhs
