#pragma once

#include "vkctrl/control.hpp"
#include "vkctrl/convergence.hpp"
#include "vkctrl/manufactured.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vkctrl::cli {

enum class OutputFormat { Csv, Markdown, Dat };

/// Everything a study or solve run needs. Unset bounds fall back to the case.
struct RunConfig {
  std::string case_name = "ex1";
  int level_min = 1;
  int level_max = 3;
  int level = 1;  // single-level solve
  std::optional<double> alpha;
  std::optional<double> u_a;
  std::optional<double> u_b;
  OmegaSpec omega;
  int quad_assembly = 5;
  int quad_error = 7;
  NewtonOptions newton;
  double tol_pdas = 1e-9;
  int max_outer = 60;
  double relaxation = 1.0;
  std::string out_dir = ".";
  std::vector<OutputFormat> formats{OutputFormat::Csv, OutputFormat::Markdown};

  bool wants(OutputFormat f) const;
  /// Case bounds with the overrides applied.
  Bounds bounds(const CaseSpec& spec) const;
  StudyOptions study_options() const;
  PdasOptions pdas_options() const;
};

/// Invalid configuration, carrying the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

/// Ordered key=value assignments; later entries win.
using Settings = std::vector<std::pair<std::string, std::string>>;

/// Recognized keys, in documentation order.
const std::vector<std::string>& config_keys();

/// key=value lines; '#' starts a comment, blank lines are skipped, and
/// whitespace around keys and values is trimmed.
Settings parse_config(std::string_view text);
Settings read_config_file(const std::string& path);

/// Sets one key. Throws ConfigError for unknown keys or malformed values.
void apply(RunConfig& cfg, const std::string& key, const std::string& value);

/// Default < file < flags, with env_out (if non-null and non-empty) as the
/// default output directory. The result is validated.
RunConfig resolve(const Settings& file, const Settings& flags, const char* env_out);

/// Cross-field checks; throws ConfigError naming the key at fault.
void validate(const RunConfig& cfg);

}  // namespace vkctrl::cli
