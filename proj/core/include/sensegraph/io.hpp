#pragma once

#include "sensegraph/eval.hpp"
#include "sensegraph/graph.hpp"
#include "sensegraph/sense_model.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sensegraph::io {

// Embedding file, little-endian throughout:
//
//   offset  size      field
//   0       8         magic "SGEMBED\0"
//   8       4         u32 version (= 1)
//   12      4         u32 reserved (= 0)
//   16      8         u64 n (rows)
//   24      8         u64 d (dim)
//   32      16        modality tag, ASCII, NUL-padded
//   48      8         u64 id table offset (= 56 + 8 n d)
//   56      8 n d     f64 row-major vectors
//   ...               n x (u32 byte length, UTF-8 node id)
//
// The file ends exactly after the id table.

inline constexpr char kEmbeddingMagic[8] = {'S', 'G', 'E', 'M', 'B', 'E', 'D', '\0'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderSize = 56;

struct EmbeddingFileHeader {
  std::uint32_t version = kEmbeddingVersion;
  std::uint64_t n = 0;
  std::uint64_t d = 0;
  std::string modality_tag;
  std::uint64_t id_table_offset = 0;
};

/// Rows whose norm deviates from 1 by more than this are re-normalized on
/// read (always reported in the diagnostics).
inline constexpr double kRenormalizeThreshold = 1e-6;
/// Deviations beyond this are reported as norm-drift warnings rather than
/// rounding notes.
inline constexpr double kNormDriftThreshold = 1e-4;

struct ReadDiagnostics {
  std::vector<std::string> warnings;
  std::vector<std::string> notes;
};

EmbeddingFileHeader read_embedding_header(const std::filesystem::path& path);

EmbeddingSet read_embeddings(const std::filesystem::path& path,
                             ReadDiagnostics* diagnostics = nullptr);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path);

// Text formats are tab-separated, UTF-8, one record per line. Blank lines
// and lines starting with '#' are skipped.
//
// inventory:        verb <TAB> class <TAB> sense[,sense...]
//                   class is motion | non-motion | -
//                   sense order is dictionary order (first sense first)
// labels:           node <TAB> verb <TAB> sense|-
// sense embeddings: verb <TAB> sense <TAB> v1 <TAB> v2 ...

SenseInventory read_inventory(const std::filesystem::path& path);
void write_inventory(const SenseInventory& inventory, const std::filesystem::path& path);

/// Verbs and senses are checked against the inventory.
NodeLabeling read_labels(const std::filesystem::path& path, const SenseInventory& inventory);
void write_labels(const NodeLabeling& labeling, const std::filesystem::path& path);

SenseEmbeddingSet read_sense_embeddings(const std::filesystem::path& path,
                                        const SenseInventory& inventory,
                                        ReadDiagnostics* diagnostics = nullptr);
void write_sense_embeddings(const SenseEmbeddingSet& senses,
                            const std::filesystem::path& path);

// Result tables (CSV with header row).
//
// results:  modality,class,protocol,lpc,seed_count,mean_acc,std_acc
// ablation: modality,class,protocol,lpc,seed,accuracy,iterations,converged

inline constexpr const char* kResultsHeader =
    "modality,class,protocol,lpc,seed_count,mean_acc,std_acc";
inline constexpr const char* kAblationHeader =
    "modality,class,protocol,lpc,seed,accuracy,iterations,converged";

std::string format_results_csv(const std::vector<ExperimentResult>& results);
std::string format_ablation_csv(const std::vector<ExperimentResult>& results);

/// Writes through a temporary file and renames, so a failed write never
/// leaves a partial table behind.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace sensegraph::io
