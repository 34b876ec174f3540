#include "vkctrl/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace vkctrl::cli {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw ConfigError(key, "expected a finite number, got '" + value + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& value) {
  int v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + value + "'");
  return v;
}

double positive(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive, got '" + value + "'");
  return v;
}

std::pair<int, int> parse_levels(const std::string& value) {
  const auto dots = value.find("..");
  if (dots == std::string::npos) {
    const int l = parse_int("levels", value);
    return {l, l};
  }
  return {parse_int("levels", trim(std::string_view(value).substr(0, dots))),
          parse_int("levels", trim(std::string_view(value).substr(dots + 2)))};
}

std::vector<OutputFormat> parse_formats(const std::string& value) {
  std::vector<OutputFormat> out;
  std::istringstream in(value);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    OutputFormat f;
    if (item == "csv") {
      f = OutputFormat::Csv;
    } else if (item == "md") {
      f = OutputFormat::Markdown;
    } else if (item == "dat") {
      f = OutputFormat::Dat;
    } else {
      throw ConfigError("format", "unknown format '" + item + "' (expected csv, md or dat)");
    }
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  if (out.empty()) throw ConfigError("format", "no output format given");
  return out;
}

}  // namespace

bool RunConfig::wants(OutputFormat f) const { return std::find(formats.begin(), formats.end(), f) != formats.end(); }

Bounds RunConfig::bounds(const CaseSpec& spec) const {
  return {u_a.value_or(spec.bounds.u_a), u_b.value_or(spec.bounds.u_b), alpha.value_or(spec.bounds.alpha)};
}

PdasOptions RunConfig::pdas_options() const {
  PdasOptions p;
  p.tol_u = tol_pdas;
  p.max_outer = max_outer;
  p.relaxation = relaxation;
  p.newton = newton;
  return p;
}

StudyOptions RunConfig::study_options() const {
  StudyOptions s;
  s.level_min = level_min;
  s.level_max = level_max;
  s.omega = omega;
  if (alpha || u_a || u_b) s.bounds = bounds(make_case(case_name));
  s.quad_assembly = quad_assembly;
  s.quad_error = quad_error;
  s.pdas = pdas_options();
  return s;
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "case",           "levels",          "level",      "alpha",    "ua",        "ub",
      "omega",          "quad_assembly",   "quad_error", "tol_newton",
      "tol_newton_rel", "tol_newton_step", "max_newton", "tol_pdas", "max_outer", "relaxation",
      "out",            "format",
  };
  return keys;
}

Settings parse_config(std::string_view text) {
  Settings out;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number), "expected key=value, got '" + body + "'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(number), "empty key");
    out.emplace_back(std::move(key), trim(std::string_view(body).substr(eq + 1)));
  }
  return out;
}

Settings read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "case") {
    if (value != "ex1" && value != "ex2") throw ConfigError(key, "unknown case '" + value + "' (expected ex1 or ex2)");
    cfg.case_name = value;
  } else if (key == "levels") {
    std::tie(cfg.level_min, cfg.level_max) = parse_levels(value);
  } else if (key == "level") {
    cfg.level = parse_int(key, value);
  } else if (key == "alpha") {
    cfg.alpha = positive(key, value);
  } else if (key == "ua") {
    cfg.u_a = parse_double(key, value);
  } else if (key == "ub") {
    cfg.u_b = parse_double(key, value);
  } else if (key == "omega") {
    try {
      cfg.omega = OmegaSpec::parse(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "quad_assembly") {
    cfg.quad_assembly = parse_int(key, value);
  } else if (key == "quad_error") {
    cfg.quad_error = parse_int(key, value);
  } else if (key == "tol_newton") {
    cfg.newton.tol_abs = positive(key, value);
  } else if (key == "tol_newton_rel") {
    cfg.newton.tol_rel = positive(key, value);
  } else if (key == "tol_newton_step") {
    cfg.newton.tol_step = positive(key, value);
  } else if (key == "max_newton") {
    cfg.newton.max_iter = parse_int(key, value);
  } else if (key == "tol_pdas") {
    cfg.tol_pdas = positive(key, value);
  } else if (key == "max_outer") {
    cfg.max_outer = parse_int(key, value);
  } else if (key == "relaxation") {
    cfg.relaxation = parse_double(key, value);
  } else if (key == "out") {
    if (value.empty()) throw ConfigError(key, "empty output directory");
    cfg.out_dir = value;
  } else if (key == "format") {
    cfg.formats = parse_formats(value);
  } else {
    throw ConfigError(key, "unknown key");
  }
}

void validate(const RunConfig& cfg) {
  if (cfg.level_min < 1) throw ConfigError("levels", "levels start at 1");
  if (cfg.level_min > cfg.level_max)
    throw ConfigError("levels", "range " + std::to_string(cfg.level_min) + ".." + std::to_string(cfg.level_max) +
                                    " is descending");
  const std::string max_level = std::to_string(kMaxLevel);
  if (cfg.level_max > kMaxLevel) throw ConfigError("levels", "at most level " + max_level + " is supported");
  if (cfg.level < 1 || cfg.level > kMaxLevel) throw ConfigError("level", "expected 1.." + max_level);
  if (cfg.quad_assembly < 4 || cfg.quad_assembly > 12) throw ConfigError("quad_assembly", "expected 4..12 points");
  if (cfg.quad_error < 1 || cfg.quad_error > 12) throw ConfigError("quad_error", "expected 1..12 points");
  if (cfg.newton.max_iter < 1) throw ConfigError("max_newton", "must be at least 1");
  if (cfg.max_outer < 1) throw ConfigError("max_outer", "must be at least 1");
  if (!(cfg.relaxation > 0.0 && cfg.relaxation <= 1.0)) throw ConfigError("relaxation", "expected a value in (0, 1]");

  const CaseSpec spec = make_case(cfg.case_name);
  const Bounds b = cfg.bounds(spec);
  if (!(b.u_a <= b.u_b)) throw ConfigError(cfg.u_a && !cfg.u_b ? "ua" : "ub", "require ua <= ub");
  if (!cfg.omega.whole) {
    try {
      cells_in_omega(RectMesh::build(spec.domain, std::min(cfg.level_min, cfg.level)), cfg.omega);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("omega", e.what());
    }
  }
}

RunConfig resolve(const Settings& file, const Settings& flags, const char* env_out) {
  RunConfig cfg;
  if (env_out != nullptr && *env_out != '\0') cfg.out_dir = env_out;
  for (const auto& [key, value] : file) apply(cfg, key, value);
  for (const auto& [key, value] : flags) apply(cfg, key, value);
  validate(cfg);
  return cfg;
}

}  // namespace vkctrl::cli
