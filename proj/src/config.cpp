#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <string_view>

#include "error.hpp"

namespace splap::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_plain(const std::string& text, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size() && !text.empty(),
          ErrorKind::Config, key + ": cannot parse number '" + text + "'");
  return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& key) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '{' && body.back() == '}') {
    body = body.substr(1, body.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item), key));
  require(!out.empty(), ErrorKind::Config, key + ": empty list");
  return out;
}

long parse_integer(const std::string& text, const std::string& key) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  require(ec == std::errc() && ptr == text.data() + text.size() && !text.empty(),
          ErrorKind::Config, key + ": cannot parse integer '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text, const std::string& key) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  fail(ErrorKind::Config, key + ": expected true or false, got '" + text + "'");
}

void require_choice(const std::string& value, const std::string& key,
                    std::initializer_list<const char*> choices) {
  std::string all;
  for (const char* c : choices) {
    if (value == c) return;
    all += (all.empty() ? "" : " | ") + std::string(c);
  }
  fail(ErrorKind::Config, key + ": '" + value + "' is not one of " + all);
}

bool is_integer_multiple(double big, double small) {
  const double q = big / small;
  return q >= 1.0 - 1e-9 && std::abs(q - std::round(q)) <= 1e-9 * q;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& text, const std::string& key) {
  const auto slash = text.find('/');
  double v = 0.0;
  if (slash == std::string::npos) {
    v = parse_plain(text, key);
  } else {
    const double num = parse_plain(trim(text.substr(0, slash)), key);
    const double den = parse_plain(trim(text.substr(slash + 1)), key);
    require(den != 0.0, ErrorKind::Config, key + ": division by zero in '" + text + "'");
    v = num / den;
  }
  require(std::isfinite(v), ErrorKind::Config, key + ": value is not finite");
  return v;
}

void ExperimentConfig::validate() const {
  require(!p_list.empty(), ErrorKind::Config, "p_list: empty");
  for (double p : p_list) {
    require(p > 1.0, ErrorKind::Config, "p_list: p = " + format_double(p) + " must be > 1");
  }
  require(kappa >= 0.0, ErrorKind::Config, "kappa: must be >= 0");
  require(eps_reg > 0.0, ErrorKind::Config, "eps_reg: must be > 0");
  require(mesh_n >= 2, ErrorKind::Config, "mesh_n: must be >= 2 (needs an interior vertex)");
  require(T > 0.0, ErrorKind::Config, "T: must be > 0");
  require(tau_ref > 0.0, ErrorKind::Config, "tau_ref: must be > 0");
  require(is_integer_multiple(T, tau_ref), ErrorKind::Config,
          "tau_ref: T is not an integer multiple of tau_ref");
  require(!tau_ladder.empty(), ErrorKind::Config, "tau_ladder: empty");
  for (double tau : tau_ladder) {
    require(tau > 0.0 && tau <= T * (1.0 + 1e-12), ErrorKind::Config,
            "tau_ladder: " + format_double(tau) + " must lie in (0, T]");
    require(is_integer_multiple(tau, tau_ref), ErrorKind::Config,
            "tau_ladder: " + format_double(tau) + " is not an integer multiple of tau_ref " +
                format_double(tau_ref));
    require(is_integer_multiple(T, tau), ErrorKind::Config,
            "tau_ladder: T is not an integer multiple of " + format_double(tau));
    if (grid_kind == "random" && std::abs(tau - tau_ref) > 1e-12 * tau) {
      require(tau >= 4.0 * tau_ref * (1.0 - 1e-12), ErrorKind::Config,
              "tau_ladder: random grids need every coarse step >= 4 tau_ref, got " +
                  format_double(tau));
    }
  }
  require(fit_tau_max > tau_ref, ErrorKind::Config, "fit_tau_max: must exceed tau_ref");
  require(n_r >= 1, ErrorKind::Config, "n_r: must be >= 1");
  require_choice(noise_mode, "noise_mode", {"additive", "multiplicative"});
  require_choice(phi, "phi", {"inv_sqrt_radius", "one", "zero"});
  require(std::isfinite(phi_scale), ErrorKind::Config, "phi_scale: must be finite");
  require(K >= 1, ErrorKind::Config, "K: must be >= 1");
  require_choice(sigma, "sigma", {"linear", "sin"});
  require_choice(initial, "initial", {"one", "zero", "sine"});
  require_choice(grid_kind, "grid_kind", {"deterministic", "random"});
  require(tol > 0.0, ErrorKind::Config, "tol: must be > 0");
  require(max_newton >= 1, ErrorKind::Config, "max_newton: must be >= 1");
  require_choice(formulation, "formulation", {"euclidean", "componentwise"});
  require(!output_dir.empty(), ErrorKind::Config, "output_dir: empty");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorKind::Config,
            "line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));

    if (key == "p_list") c.p_list = parse_list(val, key);
    else if (key == "kappa") c.kappa = parse_number(val, key);
    else if (key == "eps_reg") c.eps_reg = parse_number(val, key);
    else if (key == "mesh_n") c.mesh_n = static_cast<int>(parse_integer(val, key));
    else if (key == "tau_ladder") c.tau_ladder = parse_list(val, key);
    else if (key == "tau_ref") c.tau_ref = parse_number(val, key);
    else if (key == "fit_tau_max") c.fit_tau_max = parse_number(val, key);
    else if (key == "T") c.T = parse_number(val, key);
    else if (key == "n_r") c.n_r = static_cast<int>(parse_integer(val, key));
    else if (key == "master_seed") {
      std::uint64_t s = 0;
      const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), s);
      require(ec == std::errc() && ptr == val.data() + val.size() && !val.empty(),
              ErrorKind::Config, key + ": cannot parse unsigned integer '" + val + "'");
      c.master_seed = s;
    }
    else if (key == "noise_mode") c.noise_mode = val;
    else if (key == "phi") c.phi = val;
    else if (key == "phi_scale") c.phi_scale = parse_number(val, key);
    else if (key == "K") c.K = static_cast<int>(parse_integer(val, key));
    else if (key == "sigma") c.sigma = val;
    else if (key == "initial") c.initial = val;
    else if (key == "clip_initial") c.clip_initial = parse_bool(val, key);
    else if (key == "grid_kind") c.grid_kind = val;
    else if (key == "tol") c.tol = parse_number(val, key);
    else if (key == "max_newton") c.max_newton = static_cast<int>(parse_integer(val, key));
    else if (key == "formulation") c.formulation = val;
    else if (key == "output_dir") c.output_dir = val;
    else fail(ErrorKind::Config, "unknown key '" + key + "' on line " + std::to_string(lineno));
  }
  c.validate();
  return c;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorKind::Io, "cannot open config file " + path);
  return parse_config(in);
}

std::string echo(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "p_list = " << join(c.p_list) << '\n'
      << "kappa = " << format_double(c.kappa) << '\n'
      << "eps_reg = " << format_double(c.eps_reg) << '\n'
      << "mesh_n = " << c.mesh_n << '\n'
      << "tau_ladder = " << join(c.tau_ladder) << '\n'
      << "tau_ref = " << format_double(c.tau_ref) << '\n'
      << "fit_tau_max = " << format_double(c.fit_tau_max) << '\n'
      << "T = " << format_double(c.T) << '\n'
      << "n_r = " << c.n_r << '\n'
      << "master_seed = " << c.master_seed << '\n'
      << "noise_mode = " << c.noise_mode << '\n'
      << "phi = " << c.phi << '\n'
      << "phi_scale = " << format_double(c.phi_scale) << '\n'
      << "K = " << c.K << '\n'
      << "sigma = " << c.sigma << '\n'
      << "initial = " << c.initial << '\n'
      << "clip_initial = " << (c.clip_initial ? "true" : "false") << '\n'
      << "grid_kind = " << c.grid_kind << '\n'
      << "tol = " << format_double(c.tol) << '\n'
      << "max_newton = " << c.max_newton << '\n'
      << "formulation = " << c.formulation << '\n'
      << "output_dir = " << c.output_dir << '\n';
  return out.str();
}

}  // namespace splap::cli
