#include "sensegraph/eval.hpp"

#include "sensegraph/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <thread>

namespace sensegraph {

void SenseEmbeddingSet::add(const VerbId& verb, const SenseId& sense, Vector v) {
  if (static_cast<std::size_t>(v.size()) != dim_) {
    throw DimensionError(fmt::format("sense embedding ({}, {}) has dimension {}, expected {}", verb,
                                     sense, v.size(), dim_));
  }
  if (!v.allFinite()) {
    throw InputError(fmt::format("sense embedding ({}, {}) has non-finite values", verb, sense));
  }
  if (std::abs(v.norm() - 1.0) > EmbeddingSet::kNormTolerance) {
    throw InputError(fmt::format("sense embedding ({}, {}) has norm {}", verb, sense, v.norm()));
  }
  if (!vectors_.emplace(std::make_pair(verb, sense), std::move(v)).second) {
    throw InputError(fmt::format("duplicate sense embedding ({}, {})", verb, sense));
  }
}

const Vector* SenseEmbeddingSet::find(const VerbId& verb, const SenseId& sense) const {
  const auto it = vectors_.find(std::make_pair(verb, sense));
  return it == vectors_.end() ? nullptr : &it->second;
}

double accuracy(const Predictions& predictions, const NodeLabeling& truth,
                std::span<const std::size_t> unlabeled) {
  if (unlabeled.empty()) throw InputError("accuracy over an empty unlabeled set");
  std::size_t correct = 0;
  for (std::size_t i : unlabeled) {
    const NodeRecord& r = truth.records().at(i);
    const auto it = predictions.find(r.id);
    if (it == predictions.end()) {
      throw InputError(fmt::format("no prediction for unlabeled node '{}'", r.id));
    }
    if (!r.sense) throw InputError(fmt::format("node '{}' has no ground-truth sense", r.id));
    if (it->second == *r.sense) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(unlabeled.size());
}

Predictions baseline_fs(const SenseInventory& inventory, const NodeLabeling& labeling,
                        std::span<const std::size_t> unlabeled) {
  Predictions out;
  for (std::size_t i : unlabeled) {
    const NodeRecord& r = labeling.records().at(i);
    out.emplace(r.id, inventory.verb(r.verb).senses.front());
  }
  return out;
}

Predictions baseline_mfs(const SenseInventory& inventory, const NodeLabeling& truth,
                         std::span<const std::size_t> unlabeled) {
  std::vector<std::size_t> counts(inventory.sense_count(), 0);
  for (const NodeRecord& r : truth.records()) {
    if (r.sense) ++counts[inventory.column_of(*r.sense)];
  }
  Predictions out;
  for (std::size_t i : unlabeled) {
    const NodeRecord& r = truth.records().at(i);
    const VerbEntry& verb = inventory.verb(r.verb);
    const auto columns = inventory.candidate_columns(r.verb);
    std::size_t best = 0;
    for (std::size_t k = 1; k < columns.size(); ++k) {
      if (counts[columns[k]] > counts[columns[best]]) best = k;
    }
    out.emplace(r.id, verb.senses[best]);
  }
  return out;
}

Predictions baseline_unsupervised(const EmbeddingSet& emb, const SenseEmbeddingSet& senses,
                                  const SenseInventory& inventory, const NodeLabeling& labeling,
                                  std::span<const std::size_t> unlabeled) {
  if (emb.size() != labeling.size()) {
    throw DimensionError(fmt::format("embedding has {} nodes but labeling has {}", emb.size(),
                                     labeling.size()));
  }
  if (emb.dim() != senses.dim()) {
    throw DimensionError(fmt::format("node embeddings have dimension {} but sense embeddings {}",
                                     emb.dim(), senses.dim()));
  }
  Predictions out;
  for (std::size_t i : unlabeled) {
    const NodeRecord& r = labeling.records().at(i);
    if (emb.node_ids()[i] != r.id) {
      throw InputError(fmt::format("embedding row {} is '{}' but labeling has '{}'", i,
                                   emb.node_ids()[i], r.id));
    }
    const auto f = emb.vectors().row(static_cast<Eigen::Index>(i));
    const VerbEntry& verb = inventory.verb(r.verb);
    std::optional<std::size_t> best;
    double best_cos = 0.0;
    for (std::size_t k = 0; k < verb.senses.size(); ++k) {
      const Vector* s = senses.find(verb.id, verb.senses[k]);
      if (s == nullptr) {
        throw InputError(
            fmt::format("missing sense embedding for ({}, {})", verb.id, verb.senses[k]));
      }
      const double cos = f.dot(*s);
      if (!best || cos > best_cos) {
        best = k;
        best_cos = cos;
      }
    }
    out.emplace(r.id, verb.senses[*best]);
  }
  return out;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

std::string_view to_string(ClassFilter f) {
  switch (f) {
    case ClassFilter::automatic: return "auto";
    case ClassFilter::all: return "all";
    case ClassFilter::motion: return "motion";
    case ClassFilter::non_motion: return "non-motion";
    case ClassFilter::split: return "split";
  }
  return "auto";
}

ClassFilter parse_class_filter(std::string_view text) {
  if (text == "auto") return ClassFilter::automatic;
  if (text == "all") return ClassFilter::all;
  if (text == "motion") return ClassFilter::motion;
  if (text == "non-motion") return ClassFilter::non_motion;
  if (text == "split") return ClassFilter::split;
  throw InputError(fmt::format(
      "unknown class filter '{}' (expected auto, all, motion, non-motion or split)", text));
}

std::vector<double> ExperimentResult::accuracies() const {
  std::vector<double> out;
  out.reserve(runs.size());
  for (const SeedRun& r : runs) out.push_back(r.accuracy);
  return out;
}

std::string_view to_string(Baseline b) {
  switch (b) {
    case Baseline::first_sense: return "FS";
    case Baseline::most_frequent_sense: return "MFS";
    case Baseline::unsupervised: return "UNSUP";
  }
  return "FS";
}

namespace {

struct ClassGroup {
  std::string label;
  std::optional<MotionClass> motion;
};

std::vector<ClassGroup> resolve_groups(const SenseInventory& inventory, ClassFilter filter) {
  const bool flagged = inventory.has_motion_flags();
  switch (filter) {
    case ClassFilter::all: return {{"all", std::nullopt}};
    case ClassFilter::motion: return {{"motion", MotionClass::motion}};
    case ClassFilter::non_motion: return {{"non-motion", MotionClass::non_motion}};
    case ClassFilter::split:
      if (!flagged) {
        throw InputError("class split requested but the inventory lacks motion flags");
      }
      [[fallthrough]];
    case ClassFilter::automatic:
      if (flagged) {
        return {{"motion", MotionClass::motion}, {"non-motion", MotionClass::non_motion}};
      }
      return {{"all", std::nullopt}};
  }
  return {{"all", std::nullopt}};
}

/// The nodes, inventory and annotation of one verb-class sub-experiment.
struct GroupData {
  ClassGroup group;
  SenseInventory inventory;
  NodeLabeling truth;
  std::vector<std::size_t> rows;  // into the caller's node order
};

GroupData make_group(const ClassGroup& group, const SenseInventory& inventory,
                     const NodeLabeling& aligned_truth) {
  SenseInventory sub = group.motion ? inventory.subset(*group.motion) : inventory;
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < aligned_truth.size(); ++i) {
    if (sub.find_verb(aligned_truth[i].verb) != nullptr) rows.push_back(i);
  }
  if (rows.empty()) throw InputError(fmt::format("no nodes belong to class '{}'", group.label));
  NodeLabeling truth = aligned_truth.select(rows);
  return GroupData{group, std::move(sub), std::move(truth), std::move(rows)};
}

[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const NumericalError& e) {
    throw NumericalError(fmt::format("{}: {}", context, e.what()), e.node());
  } catch (const Error& e) {
    throw InputError(fmt::format("{}: {}", context, e.what()));
  }
}

/// Runs fn(cell) for cell in [0, count) on `threads` workers. Results are
/// written by index by the callee, so completion order never matters. The
/// first failing cell in index order is rethrown.
template <typename Fn>
void parallel_cells(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  std::vector<std::exception_ptr> errors(count);
  auto work = [&](std::atomic<std::size_t>& next) {
    for (std::size_t cell = next++; cell < count; cell = next++) {
      try {
        fn(cell);
      } catch (...) {
        errors[cell] = std::current_exception();
      }
    }
  };
  std::atomic<std::size_t> next{0};
  if (threads <= 1) {
    work(next);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back([&] { work(next); });
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void validate_grid(const ExperimentGrid& grid) {
  if (grid.labels_per_class.empty()) throw InputError("labels-per-class grid is empty");
  if (grid.seeds.empty()) throw InputError("seed list is empty");
  for (int lpc : grid.labels_per_class) {
    if (lpc < 1) throw InputError(fmt::format("labels per class must be >= 1, got {}", lpc));
  }
}

std::vector<ExperimentResult> collect(const GroupData& g, const ExperimentGrid& grid,
                                      const std::string& modality,
                                      std::vector<SeedRun> cells) {
  std::vector<ExperimentResult> out;
  const std::size_t seeds = grid.seeds.size();
  for (std::size_t l = 0; l < grid.labels_per_class.size(); ++l) {
    ExperimentResult r;
    r.modality = modality;
    r.class_label = g.group.label;
    r.protocol = grid.protocol;
    r.labels_per_class = grid.labels_per_class[l];
    r.runs.assign(std::make_move_iterator(cells.begin() + static_cast<std::ptrdiff_t>(l * seeds)),
                  std::make_move_iterator(cells.begin() +
                                          static_cast<std::ptrdiff_t>((l + 1) * seeds)));
    const std::vector<double> acc = r.accuracies();
    const Summary s = summarize(acc);
    r.mean = s.mean;
    r.std = s.std;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

std::vector<ExperimentResult> run_experiment(const EmbeddingSet& emb,
                                             const SenseInventory& inventory,
                                             const NodeLabeling& truth,
                                             const ExperimentGrid& grid,
                                             const DynamicsConfig& cfg) {
  validate_grid(grid);
  cfg.validate();
  const NodeLabeling aligned = truth.aligned_to(emb.node_ids());
  aligned.validate_against(inventory);

  std::vector<ExperimentResult> results;
  for (const ClassGroup& group : resolve_groups(inventory, grid.classes)) {
    const GroupData g = make_group(group, inventory, aligned);
    const SimilarityGraph graph =
        sparsify_top_k(build_similarity(emb.select(g.rows)), grid.top_k);

    const std::size_t seeds = grid.seeds.size();
    std::vector<SeedRun> cells(grid.labels_per_class.size() * seeds);
    parallel_cells(cells.size(), grid.threads, [&](std::size_t cell) {
      const int lpc = grid.labels_per_class[cell / seeds];
      const std::uint64_t seed = grid.seeds[cell % seeds];
      try {
        const LabeledSplit split =
            sample_labeled_set(g.truth, g.inventory, SamplingPlan{grid.protocol, lpc, seed});
        const NodeLabeling observed = g.truth.keep_senses(split.labeled);
        const AssignmentMatrix x0 = init_assignment(observed, g.inventory);
        DynamicsResult dyn = run_dynamics(graph, x0, cfg);
        const Predictions pred = predict(dyn.assignment, g.inventory, observed);
        SeedRun& run = cells[cell];
        run.seed = seed;
        run.accuracy = accuracy(pred, g.truth, split.unlabeled);
        run.labeled = split.labeled.size();
        run.unlabeled = split.unlabeled.size();
        run.trace = std::move(dyn.trace);
        run.warnings = split.warnings;
      } catch (const Error&) {
        rethrow_with_context(
            fmt::format("class {}, lpc {}, seed {}", g.group.label, lpc, seed));
      }
    });
    auto group_results = collect(g, grid, emb.modality().str(), std::move(cells));
    std::move(group_results.begin(), group_results.end(), std::back_inserter(results));
  }
  return results;
}

std::vector<ExperimentResult> run_baselines(const SenseInventory& inventory,
                                            const NodeLabeling& truth,
                                            const ExperimentGrid& grid, const EmbeddingSet* emb,
                                            const SenseEmbeddingSet* senses) {
  validate_grid(grid);
  const NodeLabeling aligned = emb ? truth.aligned_to(emb->node_ids()) : truth;
  aligned.validate_against(inventory);

  std::vector<Baseline> kinds{Baseline::first_sense, Baseline::most_frequent_sense};
  if (emb != nullptr && senses != nullptr) kinds.push_back(Baseline::unsupervised);

  std::vector<ExperimentResult> results;
  for (const ClassGroup& group : resolve_groups(inventory, grid.classes)) {
    const GroupData g = make_group(group, inventory, aligned);
    std::optional<EmbeddingSet> sub_emb;
    if (emb != nullptr) sub_emb.emplace(emb->select(g.rows));

    for (Baseline kind : kinds) {
      const std::size_t seeds = grid.seeds.size();
      std::vector<SeedRun> cells(grid.labels_per_class.size() * seeds);
      parallel_cells(cells.size(), grid.threads, [&](std::size_t cell) {
        const int lpc = grid.labels_per_class[cell / seeds];
        const std::uint64_t seed = grid.seeds[cell % seeds];
        try {
          const LabeledSplit split =
              sample_labeled_set(g.truth, g.inventory, SamplingPlan{grid.protocol, lpc, seed});
          Predictions pred;
          switch (kind) {
            case Baseline::first_sense:
              pred = baseline_fs(g.inventory, g.truth, split.unlabeled);
              break;
            case Baseline::most_frequent_sense:
              pred = baseline_mfs(g.inventory, g.truth, split.unlabeled);
              break;
            case Baseline::unsupervised:
              pred = baseline_unsupervised(*sub_emb, *senses, g.inventory, g.truth,
                                           split.unlabeled);
              break;
          }
          SeedRun& run = cells[cell];
          run.seed = seed;
          run.accuracy = accuracy(pred, g.truth, split.unlabeled);
          run.labeled = split.labeled.size();
          run.unlabeled = split.unlabeled.size();
          run.warnings = split.warnings;
        } catch (const Error&) {
          rethrow_with_context(fmt::format("{} baseline, class {}, lpc {}, seed {}",
                                           to_string(kind), g.group.label, lpc, seed));
        }
      });
      std::string name(to_string(kind));
      if (kind == Baseline::unsupervised) name += ":" + emb->modality().str();
      auto group_results = collect(g, grid, name, std::move(cells));
      std::move(group_results.begin(), group_results.end(), std::back_inserter(results));
    }
  }
  return results;
}

}  // namespace sensegraph
