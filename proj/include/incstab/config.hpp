#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "incstab/certify.hpp"
#include "incstab/iqc.hpp"
#include "incstab/loop.hpp"
#include "incstab/operator.hpp"
#include "incstab/probes.hpp"
#include "incstab/region.hpp"

namespace incstab {

/// Schema or range violation, located by a dotted document path such as
/// `systems.h1.node.A`.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error((path.empty() ? std::string("<root>") : path) + ": " + message),
        path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct SmallGainJob {
  std::string h1 = "h1";
  std::string h2 = "h2";
  /// Explicit gains override the systems' declarations.
  std::optional<Scalar> gamma1;
  std::optional<Scalar> gamma2;
};

struct SrgJob {
  std::string h1 = "h1";
  std::string h2 = "h2";
  bool relaxed = false;
  bool assume_well_posed = false;
  bool cross_check = true;
  ProbeOptions probes;
  SeparationOptions separation;
  SolveOptions solve;
};

struct IqcJob {
  std::string h1 = "h1";
  std::string h2 = "h2";
  Multiplier multiplier;
  Index grid_points = 512;
  std::vector<Scalar> tau_grid = {0, 0.25, 0.5, 0.75, 1};
  bool cross_check = true;
  ProbeOptions probes;
  SolveOptions solve;
};

enum class InputKind { kStep, kSine, kPulse, kCsv };

struct InputSpec {
  InputKind kind = InputKind::kStep;
  Scalar amplitude = 1;
  Scalar omega = 1;
  /// Pulse length; the step holds for the whole horizon.
  Scalar width = 1;
  Scalar horizon = 10;
  Scalar dt = 1e-2;
  std::filesystem::path csv;
};

struct SimulateJob {
  std::string h1 = "h1";
  std::string h2 = "h2";
  Scalar tau = 1;
  InputSpec input;
  SolveOptions solve;
};

struct SrgSampleJob {
  std::string system = "h1";
  ProbeOptions probes;
};

struct ArctanJob {
  std::vector<Scalar> amplitudes;
  ArctanOptions options;
};

using JobParameters = std::variant<SmallGainJob, SrgJob, IqcJob, SimulateJob, SrgSampleJob, ArctanJob>;

struct OutputPaths {
  std::optional<std::filesystem::path> certificate;
  std::optional<std::filesystem::path> csv;
  std::optional<std::filesystem::path> svg;
};

struct JobConfig {
  std::string job;
  std::uint64_t seed = 0;
  std::string timestamp = "unspecified";
  std::map<std::string, OperatorSpec> systems;
  JobParameters parameters;
  OutputPaths outputs;
};

/// Parses and validates a whole document; throws ConfigError on the first
/// violation. Relative CSV input paths resolve against `base_dir`.
JobConfig ParseConfig(const std::string& text, const std::filesystem::path& base_dir = {});
JobConfig LoadConfig(const std::filesystem::path& path);

/// One region literal: {"disc": {...}}, {"halfplane": {...}} or {"discext": {...}}.
Primitive ParseRegionLiteral(const std::string& text);

}  // namespace incstab
