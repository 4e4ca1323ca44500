#pragma once

#include "hardylab/galerkin.hpp"

#include <optional>
#include <stdexcept>
#include <string>

namespace hardylab {

/// Malformed configuration; the message names the offending line/key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainConfig {
  double r_lo = 0.0;
  double r_hi = 0.0;
  int dim_n = 3;
  Measure measure = Measure::radial;
};

struct DiscretizationConfig {
  int n_cells = 0;
  Grading grading = Grading::uniform;
  int quad_order = 4;
};

enum class WeightsFamily { power, confining, superharmonic, identity, expdecay };

struct WeightsConfig {
  WeightsFamily family = WeightsFamily::power;
  double gamma = 0.0;  // power/confining exponent; ignored otherwise
  double beta = 0.0;   // superharmonic only
  double sigma = 0.0;  // superharmonic only
  double p = 2.0;
};

enum class InitialKind { gaussian, hardy_minimizer, random };

struct ProblemConfig {
  double lambda = 0.0;
  double m_cap = 1e3;
  double potential_scale = 1.0;
  InitialKind initial = InitialKind::gaussian;
  double T = 1.0;
};

struct TimeSection {
  TimeScheme scheme = TimeScheme::rk2;
  double dt = 0.0;  // 0 -> CFL-style cap
  double safety = 0.5;
};

struct HardySection {
  std::vector<LadderRung> ladder;  // empty -> the default ladder
  int multistart = 5;
  double tol = 1e-9;
};

/// Parsed configuration. Sections are optional at parse time; each command
/// demands the ones it needs. Keys inside a present section are exhaustive:
/// unknown or missing keys are rejected by name.
struct RunConfig {
  std::optional<DomainConfig> domain;
  std::optional<DiscretizationConfig> discretization;
  std::optional<WeightsConfig> weights;
  std::optional<ProblemConfig> problem;
  std::optional<TimeSection> time;
  std::optional<HardySection> hardy;
};

/// Parses a flat INI-style file ([section] headers, key = value lines,
/// '#' comments). Throws ConfigError with line/key diagnostics.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text);

std::string to_string(WeightsFamily f);
std::string to_string(InitialKind k);

}  // namespace hardylab
