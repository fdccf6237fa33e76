#pragma once

#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "homogbench/common.hpp"

namespace homog {

/// One experiment description, parsed from `key = value` text.
struct ExperimentConfig {
  std::string experiment;      // cell|effective|solve|regime|sp|expansion|excess|lipschitz
  std::string coeff = "A1";
  double gamma = 1.0;
  std::vector<double> eps;
  std::vector<double> lambda;
  std::vector<std::string> kappa_rules;
  double tol = 1e-9;
  double p = 4.0;
  int cell_n = 1024;
  std::string sp_mode = "periodic_l2";  // dirichlet_l2|periodic_l2|periodic_h1|dirichlet_h1
  double f_center = 0.5;
  double f_width = 0.3;
  std::string out_dir = ".";

  bool operator==(const ExperimentConfig&) const = default;
};

struct ParseIssue {
  int line = 0;  // 0 = validation issue, not tied to a line
  std::string message;
};

struct ConfigError : Error {
  std::vector<ParseIssue> issues;
  explicit ConfigError(std::vector<ParseIssue> is)
      : Error(join(is)), issues(std::move(is)) {}
  static std::string join(const std::vector<ParseIssue>& is) {
    std::string s = "config errors:";
    for (const auto& i : is) {
      s += "\n  ";
      if (i.line) s += "line " + std::to_string(i.line) + ": ";
      s += i.message;
    }
    return s;
  }
};

namespace config {

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace detail

/// Parse and validate; throws ConfigError carrying every issue found
/// (parse problems with line numbers, validation problems without).
inline ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<ParseIssue> issues;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  bool saw_experiment = false;

  auto want_double = [&](const std::string& v, double& dst) {
    try {
      std::size_t pos = 0;
      dst = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("");
      return true;
    } catch (...) {
      issues.push_back({lineno, "not a number: '" + v + "'"});
      return false;
    }
  };
  auto want_double_list = [&](const std::string& v, std::vector<double>& dst) {
    dst.clear();
    for (const auto& item : detail::split_list(v)) {
      double d = 0;
      if (want_double(item, d)) dst.push_back(d);
    }
  };

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = detail::trim(raw);
    auto hash = line.find('#');
    if (hash != std::string::npos) line = detail::trim(line.substr(0, hash));
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      issues.push_back({lineno, "expected 'key = value'"});
      continue;
    }
    std::string key = detail::trim(line.substr(0, eq));
    std::string val = detail::trim(line.substr(eq + 1));
    if (key == "experiment") {
      c.experiment = val;
      saw_experiment = true;
    } else if (key == "coeff") {
      c.coeff = val;
    } else if (key == "gamma") {
      want_double(val, c.gamma);
    } else if (key == "eps") {
      want_double_list(val, c.eps);
    } else if (key == "lambda") {
      want_double_list(val, c.lambda);
    } else if (key == "kappa_rules") {
      c.kappa_rules = detail::split_list(val);
    } else if (key == "tol") {
      want_double(val, c.tol);
    } else if (key == "p") {
      want_double(val, c.p);
    } else if (key == "cell_n") {
      double d = 0;
      if (want_double(val, d)) c.cell_n = int(d);
    } else if (key == "sp_mode") {
      c.sp_mode = val;
    } else if (key == "f_center") {
      want_double(val, c.f_center);
    } else if (key == "f_width") {
      want_double(val, c.f_width);
    } else if (key == "out_dir") {
      c.out_dir = val;
    } else {
      issues.push_back({lineno, "unknown key '" + key + "'"});
    }
  }

  static const std::set<std::string> kinds = {
      "cell", "effective", "solve", "regime",
      "sp",   "expansion", "excess", "lipschitz"};
  if (!saw_experiment)
    issues.push_back({0, "missing required key 'experiment'"});
  else if (!kinds.count(c.experiment))
    issues.push_back({0, "unknown experiment '" + c.experiment + "'"});
  if (!(c.gamma > 0.0)) issues.push_back({0, "gamma must be positive"});
  for (double e : c.eps)
    if (!(e > 0.0)) issues.push_back({0, "eps values must be positive"});
  for (double l : c.lambda)
    if (l < 0.0) issues.push_back({0, "lambda values must be >= 0"});
  if (!(c.tol > 0.0)) issues.push_back({0, "tol must be positive"});
  if (!(c.p > 0.0)) issues.push_back({0, "p must be positive"});
  if (c.cell_n < 4 || !is_power_of_two(c.cell_n))
    issues.push_back({0, "cell_n must be a power of two >= 4"});

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return c;
}

inline std::string serialize(const ExperimentConfig& c) {
  std::ostringstream out;
  out.precision(17);
  out << "experiment = " << c.experiment << "\n";
  out << "coeff = " << c.coeff << "\n";
  out << "gamma = " << c.gamma << "\n";
  auto list = [&](const char* key, const std::vector<double>& v) {
    if (v.empty()) return;
    out << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
    out << "\n";
  };
  list("eps", c.eps);
  list("lambda", c.lambda);
  if (!c.kappa_rules.empty()) {
    out << "kappa_rules = ";
    for (std::size_t i = 0; i < c.kappa_rules.size(); ++i)
      out << (i ? "," : "") << c.kappa_rules[i];
    out << "\n";
  }
  out << "tol = " << c.tol << "\n";
  out << "p = " << c.p << "\n";
  out << "cell_n = " << c.cell_n << "\n";
  out << "sp_mode = " << c.sp_mode << "\n";
  out << "f_center = " << c.f_center << "\n";
  out << "f_width = " << c.f_width << "\n";
  out << "out_dir = " << c.out_dir << "\n";
  return out.str();
}

}  // namespace config
}  // namespace homog
