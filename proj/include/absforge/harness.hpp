#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "absforge/pipeline.hpp"
#include "absforge/proposer.hpp"

namespace absforge::harness {

struct RunConfig {
  std::string domain;
  std::vector<std::string> training;
  std::vector<std::string> evaluation;
  proposer::ProposerConfig proposer;
  /// Upper bound N on fix prompts; 0 is the no-debug setting.
  std::size_t max_iterations = 10;
  /// `init:debug`: the first `init` training instances go to the initial
  /// prompts and the next `debug` ones are checked by the pipeline.
  std::size_t split_init = 2;
  std::size_t split_debug = 2;
  pipeline::PipelineOptions pipeline;
  pipeline::ExecOptions exec;
  std::string output_dir;
  /// Recorded for provenance. Every tie-break in the loop is already
  /// lexicographic, so no component draws from it.
  std::uint64_t seed = 0;
  /// Row label in the coverage table; defaults to the PDDL domain name.
  std::string label;

  /// Relative paths resolve against `base_dir`. Throws std::invalid_argument.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  /// Parses "2:2". Throws std::invalid_argument.
  void set_training_split(std::string_view text);
};

struct InstanceResult {
  std::string instance;
  bool solved = false;
  std::vector<std::string> plan;
  std::string failure;
};

struct EvalResult {
  /// Solved fraction; nullopt for an empty evaluation set.
  std::optional<double> coverage;
  std::size_t solved = 0;
  std::vector<InstanceResult> instances;
};

/// Runs execute_refined_policy on each instance; a plan counts only after
/// validate_plan confirms it.
EvalResult evaluate_abstraction(const refinement::Abstraction& a, const qnp::Policy& pi,
                                std::span<const pddl::Instance> insts, const pipeline::ExecOptions& opts = {});

struct IterationRecord {
  std::size_t index = 0;  // 1-based
  nlohmann::json doc;     // parsed document, or the raw reply as a string
  bool accepted = false;
  std::optional<pipeline::DebugReport> report;
};

struct RunRecord {
  std::string domain;
  std::string proposer;  // "file" or the model name
  std::size_t max_iterations = 0;
  std::string training_split;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  bool accepted = false;
  std::optional<std::size_t> accepted_iteration;
  std::size_t fix_calls = 0;
  std::optional<nlohmann::json> final_doc;
  std::string policy;
  bool evaluated = false;
  EvalResult evaluation;
  std::map<std::string, std::size_t> stage_counts;  // every stage, zeros included
  std::string error;

  bool debugging() const { return max_iterations > 0; }
  nlohmann::json to_json() const;
  static RunRecord from_json(const nlohmann::json& j);
  /// Pretty-printed JSON with a trailing newline; byte-stable.
  std::string serialize() const;
};

/// Generate, then check and fix up to N times, then evaluate.
RunRecord run_loop(const RunConfig& cfg, proposer::Proposer& prop);
RunRecord run_loop(const RunConfig& cfg);

struct Tables {
  std::string coverage_text;
  std::string coverage_csv;
  std::string stages_text;
  std::string stages_csv;
  std::vector<std::string> warnings;
};

/// Coverage by domain with and without debugging per proposer, and the
/// average number of detected errors per debugging run.
Tables report(std::span<const RunRecord> records);

}  // namespace absforge::harness
