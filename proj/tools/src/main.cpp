#include "commands.hpp"
#include "config.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <iostream>
#include <sstream>

using namespace sensegraph;
using namespace sensegraph::cli;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::vector<std::string> overrides;
  std::vector<std::string> embeddings;
  std::map<std::string, std::string> values;
  bool quiet = false;
  bool verbose = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "key = value config file");
  cmd->add_option("--set", f.overrides, "override a config key (key=value), repeatable");
  cmd->add_option("-e,--embedding", f.embeddings, "MODALITY=PATH, repeatable");
  const std::pair<const char*, const char*> keyed[] = {
      {"inventory", "sense inventory TSV"},
      {"labels", "node labels TSV"},
      {"sense-embeddings", "sense embeddings TSV"},
      {"output", "output directory"},
      {"fusion", "recipes, e.g. CNN,O,CNN+O+C"},
      {"protocol", "per_sense or per_verb"},
      {"lpc", "labels per class, e.g. 1,2,5-20"},
      {"seeds", "seed list, e.g. 0-14"},
      {"class", "auto, all, motion, non-motion or split"},
      {"tolerance", "dynamics tolerance"},
      {"max-iterations", "dynamics iteration cap"},
      {"threads", "worker threads (0 = all cores)"},
      {"top-k", "keep k strongest edges per node (0 = dense)"},
  };
  for (const auto& [name, help] : keyed) {
    cmd->add_option(std::string("--") + name, f.values[name], help);
  }
  cmd->add_flag("-q,--quiet", f.quiet, "only errors");
  cmd->add_flag("-v,--verbose", f.verbose, "log every run with its dynamics trace");
}

RunConfig resolve_config(const ConfigFlags& f) {
  RunConfig config = f.config_path.empty() ? RunConfig{} : load_config(f.config_path);
  static const std::map<std::string, std::string> key_of = {
      {"inventory", "inventory"}, {"labels", "labels"}, {"sense-embeddings", "sense_embeddings"},
      {"output", "output_dir"}, {"fusion", "fusion"}, {"protocol", "protocol"}, {"lpc", "lpc"},
      {"seeds", "seeds"}, {"class", "class"}, {"tolerance", "tolerance"},
      {"max-iterations", "max_iterations"}, {"threads", "threads"}, {"top-k", "top_k"},
  };
  for (const auto& [flag, value] : f.values) {
    if (!value.empty()) config.set(key_of.at(flag), value);
  }
  for (const std::string& e : f.embeddings) apply_override(config, "embedding." + e);
  for (const std::string& o : f.overrides) apply_override(config, o);
  if (f.quiet) config.verbosity = Verbosity::quiet;
  if (f.verbose) config.verbosity = Verbosity::verbose;
  return config;
}

void configure_logging(Verbosity v) {
  auto logger = spdlog::stderr_color_mt("sensegraph");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  switch (v) {
    case Verbosity::quiet: spdlog::set_level(spdlog::level::err); break;
    case Verbosity::normal: spdlog::set_level(spdlog::level::warn); break;
    case Verbosity::verbose: spdlog::set_level(spdlog::level::debug); break;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph transduction for verb sense labeling"};
  app.require_subcommand(1);

  ConfigFlags run_flags, ablate_flags, baseline_flags, validate_flags;
  auto* run = app.add_subcommand("run", "run the transducer over the configured grid");
  add_config_flags(run, run_flags);
  auto* ablate = app.add_subcommand("ablate", "same as run; for lpc sweeps");
  add_config_flags(ablate, ablate_flags);
  auto* baselines = app.add_subcommand("baselines", "FS, MFS and unsupervised baselines");
  add_config_flags(baselines, baseline_flags);
  auto* validate = app.add_subcommand("validate", "check inputs without running anything");
  add_config_flags(validate, validate_flags);

  SynthParams synth_params;
  std::string synth_dir;
  std::string synth_modalities = "CNN";
  auto* synth = app.add_subcommand("synth", "write a Gaussian-cluster dataset");
  synth->add_option("-o,--output", synth_dir, "output directory")->required();
  synth->add_option("--clusters", synth_params.clusters)->capture_default_str();
  synth->add_option("--points", synth_params.points)->capture_default_str();
  synth->add_option("--dim", synth_params.dim)->capture_default_str();
  synth->add_option("--noise", synth_params.noise)->capture_default_str();
  synth->add_option("--seed", synth_params.seed)->capture_default_str();
  synth->add_option("--modalities", synth_modalities, "comma separated, e.g. CNN,O,C")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kInputError;
  }

  return guarded(
      [&]() -> int {
        auto with_config = [&](const ConfigFlags& flags, auto command) {
          const RunConfig config = resolve_config(flags);
          configure_logging(config.verbosity);
          return command(config, std::cout);
        };
        if (*run) return with_config(run_flags, cmd_run);
        if (*ablate) return with_config(ablate_flags, cmd_run);
        if (*baselines) return with_config(baseline_flags, cmd_baselines);
        if (*validate) return with_config(validate_flags, cmd_validate);
        configure_logging(Verbosity::normal);
        synth_params.modalities.clear();
        std::stringstream list(synth_modalities);
        for (std::string m; std::getline(list, m, ',');) synth_params.modalities.push_back(m);
        return cmd_synth(synth_params, synth_dir, std::cout);
      },
      std::cerr);
}
