#pragma once

#include "config.hpp"

#include "sensegraph/synth.hpp"

#include <exception>
#include <filesystem>
#include <functional>
#include <iosfwd>

namespace sensegraph::cli {

enum ExitCode : int { kSuccess = 0, kInputError = 1, kNumericalFailure = 2 };

/// Maps an exception to the process exit code.
int exit_code_for(const std::exception& e);

/// Runs `body`, printing any error to `err` and returning its exit code.
int guarded(const std::function<int()>& body, std::ostream& err);

/// Runs the transducer over every fusion recipe and the configured grid.
/// Writes results.csv and ablation.csv into output_dir only after every
/// cell succeeded, then prints a mean +- std table.
int cmd_run(const RunConfig& config, std::ostream& out);

/// FS, MFS and (with sense embeddings) the unsupervised baseline on the
/// same splits cmd_run draws. Writes baselines.csv.
int cmd_baselines(const RunConfig& config, std::ostream& out);

/// Loads every configured input and reports per-file PASS / WARN / FAIL.
/// Never runs the dynamics. Returns 1 if any check failed.
int cmd_validate(const RunConfig& config, std::ostream& out);

/// Writes a synthetic dataset plus a ready-to-run config.txt into `dir`.
int cmd_synth(const SynthParams& params, const std::filesystem::path& dir, std::ostream& out);

}  // namespace sensegraph::cli
