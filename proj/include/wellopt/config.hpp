#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "wellopt/problem.hpp"
#include "wellopt/strategies.hpp"

namespace wellopt {

struct OutputSettings {
  std::filesystem::path dir = "wellopt-out";
  bool dump_simulation = false;  // rate CSVs and saturation snapshots for best solutions
};

struct ExperimentConfig {
  std::string name;
  ProblemSpec problem;
  AlgorithmSettings algorithm;
  int n_repeats = 1;
  std::uint64_t base_seed = 1;
  OutputSettings output;
};

/// Parse and validate an experiment document. Relative paths (field files, output directory)
/// resolve against `base_dir`. Throws ConfigError naming the offending field path.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// Shape name used in configs and solution files: "vertical", "horizontal", "inclined".
ShapeKind parse_shape(const std::string& name);

/// Best-solution document: physical wells, BHP schedule, normalized vector, npv and h.
nlohmann::json solution_to_json(const ReservoirProblem& problem, const EvaluationRecord& record,
                                std::string_view algorithm, std::uint64_t seed);

struct Solution {
  Candidate candidate;
  std::optional<double> npv;
  std::optional<double> h;
};

/// Reads the physical description back; the normalized vector is informational only.
Solution solution_from_json(const nlohmann::json& doc);

}  // namespace wellopt
