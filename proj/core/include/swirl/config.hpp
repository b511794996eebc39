#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "swirl/experiments.hpp"
#include "swirl/fit.hpp"
#include "swirl/grid.hpp"
#include "swirl/model.hpp"
#include "swirl/retrieval.hpp"

namespace swirl {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SolverConfig {
  double rk_step = 0.004;
  double bisect_tol = 1e-12;
  /// Tolerance of the psi(z) = psi(h) root giving h_o.
  double level_tol = 1e-12;
  int quadrature_n = 20000;
  Propagation propagation = Propagation::Bisection;

  bool operator==(const SolverConfig&) const = default;
};

struct NoiseConfig {
  /// Observation noise standard deviation in m/s.
  double sigma = 0.0;
  /// m/s per model velocity unit; the model noise level is sigma / velocity_scale.
  double velocity_scale = 10.0;
  std::uint64_t seed = 1;
  int members = 100;
  /// Observation grid nodes over the whole domain (rows below h are dropped).
  int obs_nr = 41;
  int obs_nz = 61;

  bool operator==(const NoiseConfig&) const = default;
};

struct FitConfig {
  /// Defaults derived from the observations when absent.
  std::optional<ParameterBounds> bounds;
  int restarts = 10;
  int max_iter = 4000;
  double jitter = 0.15;

  bool operator==(const FitConfig& o) const;
};

struct OutputConfig {
  std::string dir = "out";
  /// Write one field CSV per ensemble member.
  bool member_fields = false;

  bool operator==(const OutputConfig&) const = default;
};

/// Everything a run needs. Grid sizes count nodes, so the default 201 x 301
/// grid has 200 x 300 cells.
struct RunConfig {
  ModelParams model{};
  Domain domain{};
  int nr = 201;
  int nz = 301;
  SolverConfig solver{};
  TruthProfile truth{};
  NoiseConfig noise{};
  FitConfig fit{};
  OutputConfig output{};

  /// Throws ConfigError naming the offending key.
  void validate() const;

  Grid grid() const { return Grid{nr, nz, domain.R, domain.H}; }
  Grid obs_grid() const { return Grid{noise.obs_nr, noise.obs_nz, domain.R, domain.H}; }
  SeparableVortex vortex() const { return SeparableVortex(model); }
  RetrieveOptions retrieve_options() const;
  TwinSettings twin_settings() const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses JSON text. Missing keys keep their defaults; unknown keys, wrong
/// types and invariant violations throw ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// JSON text that parse_config maps back to an identical config.
/// indent < 0 gives a single line.
std::string dump_config(const RunConfig& config, int indent = 2);

}  // namespace swirl
