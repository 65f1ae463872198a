#pragma once

#include "sensegraph/dynamics.hpp"
#include "sensegraph/eval.hpp"
#include "sensegraph/sense_model.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace sensegraph::cli {

enum class Verbosity { quiet, normal, verbose };

// Config file: one `key = value` per line, '#' starts a comment line.
// Relative paths are resolved against the directory of the config file.
//
//   embedding.CNN = embeddings_CNN.emb     one key per modality (CNN, O, C)
//   inventory = inventory.tsv
//   labels = labels.tsv
//   sense_embeddings = senses.tsv          optional, baselines only
//   output_dir = out
//   fusion = CNN,O,CNN+O                   recipes; default each modality alone
//   protocol = per_sense | per_verb
//   lpc = 1,2,5-8                          list with inclusive ranges
//   seeds = 0-14
//   class = auto | all | motion | non-motion | split
//   tolerance = 1e-6
//   max_iterations = 100
//   renormalize = true
//   threads = 1                            0 = hardware concurrency
//   top_k = 0                              0 = dense graph
//   verbosity = quiet | normal | verbose
struct RunConfig {
  std::map<std::string, std::filesystem::path> embeddings;
  std::filesystem::path inventory;
  std::filesystem::path labels;
  std::filesystem::path sense_embeddings;
  std::filesystem::path output_dir{"."};
  std::vector<std::string> fusion;
  ExperimentGrid grid;
  DynamicsConfig dynamics;
  Verbosity verbosity = Verbosity::normal;

  /// Applies one setting. Relative paths are joined to `base`.
  void set(std::string_view key, std::string_view value,
           const std::filesystem::path& base = {});

  /// Recipes to run: `fusion` if given, else every configured modality.
  std::vector<std::string> recipes() const;

  /// Config-level checks (no file contents are read): required paths are
  /// set and exist, recipes refer to configured modalities, grid non-empty.
  void validate() const;
};

RunConfig load_config(const std::filesystem::path& path);

/// Applies `key=value` to the config; used for flag overrides.
void apply_override(RunConfig& config, std::string_view assignment);

/// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}. Order is kept; duplicates are errors.
std::vector<long long> parse_number_list(std::string_view text);

std::string_view to_string(Verbosity v);

/// Serializes a config with paths relative to `base` when possible.
std::string format_config(const RunConfig& config, const std::filesystem::path& base);

}  // namespace sensegraph::cli
