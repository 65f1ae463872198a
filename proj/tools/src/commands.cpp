#include "commands.hpp"

#include "sensegraph/error.hpp"
#include "sensegraph/io.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/spdlog.h>

#include <map>
#include <optional>
#include <ostream>
#include <unordered_map>

namespace sensegraph::cli {

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    return err->kind() == ErrorKind::numerical ? kNumericalFailure : kInputError;
  }
  return kInputError;
}

int guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const NumericalError& e) {
    fmt::print(err, "error: numerical failure: {}\n", e.what());
    return kNumericalFailure;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e);
  }
}

namespace {

using EmbeddingCache = std::map<std::string, EmbeddingSet>;

const EmbeddingSet& load_modality(EmbeddingCache& cache, const RunConfig& config,
                                  const std::string& modality) {
  if (auto it = cache.find(modality); it != cache.end()) return it->second;
  const fs::path& path = config.embeddings.at(modality);
  io::ReadDiagnostics diag;
  EmbeddingSet set = io::read_embeddings(path, &diag);
  for (const auto& w : diag.warnings) spdlog::warn("{}: {}", path.string(), w);
  for (const auto& n : diag.notes) spdlog::debug("{}: {}", path.string(), n);
  if (set.modality().str() != modality) {
    throw InputError(fmt::format("{}: file is tagged {} but configured as embedding.{}",
                                 path.string(), set.modality().str(), modality));
  }
  return cache.emplace(modality, std::move(set)).first->second;
}

// Parts are re-ordered to the node order of the first one.
EmbeddingSet build_recipe(EmbeddingCache& cache, const RunConfig& config, const std::string& recipe) {
  const ModalityTag tag = ModalityTag::parse(recipe);
  std::vector<std::string> names;
  if (tag.cnn()) names.emplace_back("CNN");
  if (tag.objects()) names.emplace_back("O");
  if (tag.captions()) names.emplace_back("C");
  if (names.size() == 1) return load_modality(cache, config, names[0]);

  const EmbeddingSet& first = load_modality(cache, config, names[0]);
  std::vector<EmbeddingSet> parts{first};
  for (std::size_t k = 1; k < names.size(); ++k) {
    const EmbeddingSet& part = load_modality(cache, config, names[k]);
    std::unordered_map<NodeId, std::size_t> row_of;
    for (std::size_t i = 0; i < part.size(); ++i) row_of.emplace(part.node_ids()[i], i);
    if (part.size() != first.size()) {
      throw InputError(fmt::format("recipe {}: {} has {} nodes but {} has {}", recipe, names[k],
                                   part.size(), names[0], first.size()));
    }
    std::vector<std::size_t> rows;
    for (const NodeId& id : first.node_ids()) {
      const auto it = row_of.find(id);
      if (it == row_of.end()) {
        throw InputError(fmt::format("recipe {}: node '{}' has no {} embedding", recipe, id, names[k]));
      }
      rows.push_back(it->second);
    }
    parts.push_back(part.select(rows));
  }
  return fuse_concat(parts);
}

struct Inputs {
  SenseInventory inventory;
  NodeLabeling truth;
};

Inputs load_annotations(const RunConfig& config) {
  SenseInventory inventory = io::read_inventory(config.inventory);
  NodeLabeling truth = io::read_labels(config.labels, inventory);
  return {std::move(inventory), std::move(truth)};
}

void log_runs(const ExperimentResult& r, Verbosity verbosity) {
  for (const SeedRun& run : r.runs) {
    for (const auto& w : run.warnings) spdlog::warn("{} {} lpc {} seed {}: {}", r.modality, r.class_label, r.labels_per_class, run.seed, w);
    if (verbosity != Verbosity::verbose) continue;
    const auto& t = run.trace;
    spdlog::info(
        "{} {} lpc {} seed {}: acc {:.4f} labeled {} unlabeled {} iterations {} converged {} "
        "residual {:.3g} gap {:.3g} stalled {}",
        r.modality, r.class_label, r.labels_per_class, run.seed, run.accuracy, run.labeled,
        run.unlabeled, t.iterations_run, t.converged, t.final_residual, t.final_support_gap,
        t.stalled_nodes.size());
    std::string potentials;
    for (double p : t.potential_history) potentials += fmt::format(" {:.6g}", p);
    spdlog::info("  potential:{}", potentials);
  }
}

void print_table(const std::vector<ExperimentResult>& results, std::ostream& out) {
  std::size_t width = 8;
  for (const auto& r : results) width = std::max(width, r.modality.size());
  fmt::print(out, "{:<{}}  {:<10}  {:>4}  {:>5}  {}\n", "modality", width, "class", "lpc", "seeds",
             "accuracy % (mean +- std)");
  for (const auto& r : results) {
    fmt::print(out, "{:<{}}  {:<10}  {:>4}  {:>5}  {:6.2f} +- {:.2f}\n", r.modality, width,
               r.class_label, r.labels_per_class, r.runs.size(), 100.0 * r.mean, 100.0 * r.std);
  }
}

}  // namespace

int cmd_run(const RunConfig& config, std::ostream& out) {
  config.validate();
  const Inputs in = load_annotations(config);
  EmbeddingCache cache;
  std::vector<ExperimentResult> results;
  for (const std::string& recipe : config.recipes()) {
    const EmbeddingSet emb = build_recipe(cache, config, recipe);
    spdlog::info("running {} ({} nodes, dim {})", emb.modality().str(), emb.size(), emb.dim());
    auto part = run_experiment(emb, in.inventory, in.truth, config.grid, config.dynamics);
    for (auto& r : part) {
      log_runs(r, config.verbosity);
      results.push_back(std::move(r));
    }
  }
  // Everything succeeded; only now touch the output directory.
  fs::create_directories(config.output_dir);
  io::write_text_atomic(config.output_dir / "results.csv", io::format_results_csv(results));
  io::write_text_atomic(config.output_dir / "ablation.csv", io::format_ablation_csv(results));
  if (config.verbosity != Verbosity::quiet) print_table(results, out);
  return kSuccess;
}

int cmd_baselines(const RunConfig& config, std::ostream& out) {
  config.validate();
  const Inputs in = load_annotations(config);
  std::vector<ExperimentResult> results = run_baselines(in.inventory, in.truth, config.grid);
  if (!config.sense_embeddings.empty()) {
    io::ReadDiagnostics diag;
    const SenseEmbeddingSet senses = io::read_sense_embeddings(config.sense_embeddings, in.inventory, &diag);
    for (const auto& w : diag.warnings) spdlog::warn("{}: {}", config.sense_embeddings.string(), w);
    EmbeddingCache cache;
    for (const std::string& recipe : config.recipes()) {
      const EmbeddingSet emb = build_recipe(cache, config, recipe);
      if (emb.dim() != senses.dim()) {
        spdlog::info("skipping unsupervised baseline for {}: dim {} vs sense embeddings dim {}",
                     recipe, emb.dim(), senses.dim());
        continue;
      }
      for (auto& r : run_baselines(in.inventory, in.truth, config.grid, &emb, &senses)) {
        if (r.modality.starts_with("UNSUP")) results.push_back(std::move(r));
      }
    }
  }
  fs::create_directories(config.output_dir);
  io::write_text_atomic(config.output_dir / "baselines.csv", io::format_results_csv(results));
  if (config.verbosity != Verbosity::quiet) print_table(results, out);
  return kSuccess;
}

int cmd_validate(const RunConfig& config, std::ostream& out) {
  bool failed = false;
  auto check = [&](std::string_view what, const fs::path& path, const std::function<void()>& body) {
    try {
      body();
      fmt::print(out, "PASS  {:<18} {}\n", what, path.string());
      return true;
    } catch (const std::exception& e) {
      fmt::print(out, "FAIL  {:<18} {}: {}\n", what, path.string(), e.what());
      failed = true;
      return false;
    }
  };
  auto report = [&](std::string_view what, const fs::path& path, const io::ReadDiagnostics& diag) {
    for (const auto& w : diag.warnings) fmt::print(out, "WARN  {:<18} {}: {}\n", what, path.string(), w);
  };

  std::optional<SenseInventory> inventory;
  std::optional<NodeLabeling> truth;
  check("inventory", config.inventory, [&] {
    if (config.inventory.empty()) throw InputError("not set");
    inventory = io::read_inventory(config.inventory);
  });
  check("labels", config.labels, [&] {
    if (config.labels.empty()) throw InputError("not set");
    if (!inventory) throw InputError("skipped, inventory did not load");
    truth = io::read_labels(config.labels, *inventory);
  });
  if (!config.sense_embeddings.empty()) {
    io::ReadDiagnostics diag;
    check("sense_embeddings", config.sense_embeddings, [&] {
      if (!inventory) throw InputError("skipped, inventory did not load");
      io::read_sense_embeddings(config.sense_embeddings, *inventory, &diag);
    });
    report("sense_embeddings", config.sense_embeddings, diag);
  }
  if (config.embeddings.empty()) {
    fmt::print(out, "FAIL  {:<18} no embedding.<MODALITY> entries\n", "embeddings");
    failed = true;
  }
  EmbeddingCache cache;
  for (const auto& [modality, path] : config.embeddings) {
    io::ReadDiagnostics diag;
    const std::string what = "embedding." + modality;
    check(what, path, [&] {
      EmbeddingSet set = io::read_embeddings(path, &diag);
      if (set.modality().str() != modality) {
        throw InputError(fmt::format("file is tagged {}", set.modality().str()));
      }
      if (truth) truth->aligned_to(set.node_ids()).validate_against(*inventory);
      cache.emplace(modality, std::move(set));
    });
    report(what, path, diag);
  }
  for (const std::string& recipe : config.fusion) {
    check("fusion " + recipe, {}, [&] {
      ModalityTag::parse(recipe);
      build_recipe(cache, config, recipe);
    });
  }
  fmt::print(out, "{}\n", failed ? "validation failed" : "all inputs valid");
  return failed ? kInputError : kSuccess;
}

int cmd_synth(const SynthParams& params, const fs::path& dir, std::ostream& out) {
  const SynthDataset data = make_synthetic(params);
  fs::create_directories(dir);
  RunConfig config;
  for (const EmbeddingSet& emb : data.embeddings) {
    const std::string name = emb.modality().str();
    const fs::path path = dir / fmt::format("embeddings_{}.emb", name);
    io::write_embeddings(emb, path);
    config.embeddings[name] = path;
  }
  config.inventory = dir / "inventory.tsv";
  config.labels = dir / "labels.tsv";
  config.sense_embeddings = dir / "sense_embeddings.tsv";
  config.output_dir = dir / "results";
  config.grid.labels_per_class = {1, 2, 8};
  io::write_inventory(data.inventory, config.inventory);
  io::write_labels(data.truth, config.labels);
  io::write_sense_embeddings(data.sense_embeddings, config.sense_embeddings);
  io::write_text_atomic(dir / "config.txt", format_config(config, dir));
  fmt::print(out, "wrote {} points in {} clusters ({} modalities) to {}\n", params.points,
             params.clusters, data.embeddings.size(), dir.string());
  return kSuccess;
}

}  // namespace sensegraph::cli
