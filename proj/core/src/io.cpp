#include "sensegraph/io.hpp"

#include "sensegraph/error.hpp"

#include <fmt/format.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace sensegraph::io {

namespace fs = std::filesystem;

namespace {

std::vector<unsigned char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                    std::istreambuf_iterator<char>());
}

std::uint64_t load_le(const unsigned char* p, std::size_t bytes) {
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < bytes; ++k) v |= static_cast<std::uint64_t>(p[k]) << (8 * k);
  return v;
}

void store_le(std::string& out, std::uint64_t v, std::size_t bytes) {
  for (std::size_t k = 0; k < bytes; ++k) {
    out.push_back(static_cast<char>((v >> (8 * k)) & 0xffu));
  }
}

[[noreturn]] void fail_at(const fs::path& path, std::size_t offset, const std::string& msg) {
  throw InputError(fmt::format("{}: byte offset {}: {}", path.string(), offset, msg));
}

struct ParsedHeader {
  EmbeddingFileHeader header;
  ModalityTag tag;
};

ParsedHeader parse_header(const fs::path& path, const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kEmbeddingHeaderSize) {
    fail_at(path, bytes.size(),
            fmt::format("truncated header: file has {} bytes, header needs {}", bytes.size(),
                        kEmbeddingHeaderSize));
  }
  if (std::memcmp(bytes.data(), kEmbeddingMagic, sizeof kEmbeddingMagic) != 0) {
    fail_at(path, 0, "bad magic (not a sensegraph embedding file)");
  }
  ParsedHeader parsed;
  EmbeddingFileHeader& h = parsed.header;
  h.version = static_cast<std::uint32_t>(load_le(bytes.data() + 8, 4));
  if (h.version != kEmbeddingVersion) {
    fail_at(path, 8, fmt::format("unsupported version {}", h.version));
  }
  if (load_le(bytes.data() + 12, 4) != 0) fail_at(path, 12, "reserved field must be 0");
  h.n = load_le(bytes.data() + 16, 8);
  h.d = load_le(bytes.data() + 24, 8);
  if (h.n == 0) fail_at(path, 16, "row count must be positive");
  if (h.d == 0) fail_at(path, 24, "dimension must be positive");

  const char* tag_begin = reinterpret_cast<const char*>(bytes.data() + 32);
  h.modality_tag.assign(tag_begin, strnlen(tag_begin, 16));
  try {
    parsed.tag = ModalityTag::parse(h.modality_tag);
  } catch (const InputError& e) {
    fail_at(path, 32, e.what());
  }

  h.id_table_offset = load_le(bytes.data() + 48, 8);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (h.n > kMax / h.d || h.n * h.d > (kMax - kEmbeddingHeaderSize) / 8) {
    fail_at(path, 16, "n x d overflows");
  }
  const std::uint64_t expected = kEmbeddingHeaderSize + 8 * h.n * h.d;
  if (h.id_table_offset != expected) {
    fail_at(path, 48, fmt::format("id table offset {} does not match n = {}, d = {} (expected {})",
                                  h.id_table_offset, h.n, h.d, expected));
  }
  return parsed;
}

std::string location(const fs::path& path, std::size_t line) {
  return fmt::format("{}:{}", path.string(), line);
}

struct TextLine {
  std::size_t number;
  std::vector<std::string> fields;
};

/// Non-blank, non-comment lines split on tabs. Empty input is an error.
std::vector<TextLine> read_tsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("{}: cannot open file", path.string()));
  std::vector<TextLine> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    TextLine parsed{number, {}};
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      parsed.fields.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    lines.push_back(std::move(parsed));
  }
  if (lines.empty()) throw InputError(fmt::format("{}: empty input (no records)", path.string()));
  return lines;
}

double parse_double(const fs::path& path, std::size_t line, const std::string& text) {
  double v = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw InputError(fmt::format("{}: '{}' is not a finite number", location(path, line), text));
  }
  return v;
}

void normalize_or_report(Eigen::Ref<Vector> v, const std::string& what,
                         ReadDiagnostics* diagnostics) {
  const double norm = v.norm();
  if (!(norm > 0.0)) throw InputError(fmt::format("{}: zero-norm vector", what));
  const double drift = std::abs(norm - 1.0);
  if (drift <= kRenormalizeThreshold) return;
  v /= norm;
  if (diagnostics == nullptr) return;
  const std::string msg = fmt::format("{}: norm {} re-normalized to 1", what, norm);
  (drift > kNormDriftThreshold ? diagnostics->warnings : diagnostics->notes).push_back(msg);
}

}  // namespace

EmbeddingFileHeader read_embedding_header(const fs::path& path) {
  return parse_header(path, read_all(path)).header;
}

EmbeddingSet read_embeddings(const fs::path& path, ReadDiagnostics* diagnostics) {
  const std::vector<unsigned char> bytes = read_all(path);
  const ParsedHeader parsed = parse_header(path, bytes);
  const EmbeddingFileHeader& h = parsed.header;
  if (bytes.size() < h.id_table_offset) {
    fail_at(path, bytes.size(),
            fmt::format("truncated vector block: file has {} bytes, vectors end at {}",
                        bytes.size(), h.id_table_offset));
  }

  const auto n = static_cast<Eigen::Index>(h.n);
  const auto d = static_cast<Eigen::Index>(h.d);
  Matrix vectors(n, d);
  std::size_t offset = kEmbeddingHeaderSize;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k, offset += 8) {
      const double v = std::bit_cast<double>(load_le(bytes.data() + offset, 8));
      if (!std::isfinite(v)) {
        fail_at(path, offset, fmt::format("non-finite value in row {}, column {}", i, k));
      }
      vectors(i, k) = v;
    }
  }

  std::vector<NodeId> ids;
  ids.reserve(h.n);
  for (std::uint64_t i = 0; i < h.n; ++i) {
    if (offset + 4 > bytes.size()) fail_at(path, offset, fmt::format("truncated id {}", i));
    const std::size_t len = load_le(bytes.data() + offset, 4);
    offset += 4;
    if (len == 0) fail_at(path, offset - 4, fmt::format("empty node id at row {}", i));
    if (offset + len > bytes.size()) fail_at(path, offset, fmt::format("truncated id {}", i));
    ids.emplace_back(reinterpret_cast<const char*>(bytes.data() + offset), len);
    offset += len;
  }
  if (offset != bytes.size()) {
    fail_at(path, offset, fmt::format("{} trailing bytes after id table", bytes.size() - offset));
  }

  for (Eigen::Index i = 0; i < n; ++i) {
    Vector row = vectors.row(i).transpose();
    normalize_or_report(row,
                        fmt::format("{}: row {} (node '{}')", path.string(), i,
                                    ids[static_cast<std::size_t>(i)]),
                        diagnostics);
    vectors.row(i) = row.transpose();
  }
  try {
    return EmbeddingSet(std::move(ids), std::move(vectors), parsed.tag);
  } catch (const InputError& e) {
    throw InputError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

void write_embeddings(const EmbeddingSet& set, const fs::path& path) {
  const std::string tag = set.modality().str();
  if (tag.size() > 16) throw InputError(fmt::format("modality tag '{}' too long", tag));
  std::string out;
  const std::uint64_t n = set.size();
  const std::uint64_t d = set.dim();
  out.reserve(kEmbeddingHeaderSize + 8 * n * d + n * 12);
  out.append(kEmbeddingMagic, sizeof kEmbeddingMagic);
  store_le(out, kEmbeddingVersion, 4);
  store_le(out, 0, 4);
  store_le(out, n, 8);
  store_le(out, d, 8);
  out.append(tag);
  out.append(16 - tag.size(), '\0');
  store_le(out, kEmbeddingHeaderSize + 8 * n * d, 8);
  const Matrix& v = set.vectors();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      store_le(out, std::bit_cast<std::uint64_t>(v(i, k)), 8);
    }
  }
  for (const NodeId& id : set.node_ids()) {
    store_le(out, id.size(), 4);
    out.append(id);
  }
  write_text_atomic(path, out);
}

SenseInventory read_inventory(const fs::path& path) {
  std::vector<VerbEntry> verbs;
  std::unordered_set<std::string> seen_verbs;
  for (const TextLine& line : read_tsv(path)) {
    const std::string where = location(path, line.number);
    if (line.fields.size() != 3) {
      throw InputError(fmt::format("{}: expected 3 tab-separated fields (verb, class, senses), got {}",
                                   where, line.fields.size()));
    }
    VerbEntry entry;
    entry.id = line.fields[0];
    if (entry.id.empty()) throw InputError(fmt::format("{}: empty verb id", where));
    if (!seen_verbs.insert(entry.id).second) {
      throw InputError(fmt::format("{}: duplicate verb '{}'", where, entry.id));
    }
    try {
      entry.motion = parse_motion_class(line.fields[1]);
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}: {}", where, e.what()));
    }
    std::unordered_set<std::string> seen_senses;
    const std::string& list = line.fields[2];
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = list.find(',', start);
      std::string sense = list.substr(start, comma - start);
      if (sense.empty()) throw InputError(fmt::format("{}: empty sense id", where));
      if (!seen_senses.insert(sense).second) {
        throw InputError(fmt::format("{}: duplicate sense '{}' for verb '{}'", where, sense,
                                     entry.id));
      }
      entry.senses.push_back(std::move(sense));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    verbs.push_back(std::move(entry));
  }
  return SenseInventory(std::move(verbs));
}

void write_inventory(const SenseInventory& inventory, const fs::path& path) {
  std::string out = "# verb\tclass\tsenses\n";
  for (const VerbEntry& v : inventory.verbs()) {
    out += fmt::format("{}\t{}\t{}\n", v.id, to_string(v.motion), fmt::join(v.senses, ","));
  }
  write_text_atomic(path, out);
}

NodeLabeling read_labels(const fs::path& path, const SenseInventory& inventory) {
  std::vector<NodeRecord> records;
  std::unordered_set<std::string> seen;
  for (const TextLine& line : read_tsv(path)) {
    const std::string where = location(path, line.number);
    if (line.fields.size() != 3) {
      throw InputError(fmt::format("{}: expected 3 tab-separated fields (node, verb, sense), got {}",
                                   where, line.fields.size()));
    }
    NodeRecord r{line.fields[0], line.fields[1], std::nullopt};
    if (r.id.empty()) throw InputError(fmt::format("{}: empty node id", where));
    if (!seen.insert(r.id).second) {
      throw InputError(fmt::format("{}: duplicate node '{}'", where, r.id));
    }
    if (inventory.find_verb(r.verb) == nullptr) {
      throw InputError(fmt::format("{}: unknown verb '{}'", where, r.verb));
    }
    if (line.fields[2] != "-") {
      if (!inventory.has_sense(r.verb, line.fields[2])) {
        throw InputError(fmt::format("{}: sense '{}' is not listed for verb '{}'", where,
                                     line.fields[2], r.verb));
      }
      r.sense = line.fields[2];
    }
    records.push_back(std::move(r));
  }
  return NodeLabeling(std::move(records));
}

void write_labels(const NodeLabeling& labeling, const fs::path& path) {
  std::string out = "# node\tverb\tsense\n";
  for (const NodeRecord& r : labeling.records()) {
    out += fmt::format("{}\t{}\t{}\n", r.id, r.verb, r.sense.value_or("-"));
  }
  write_text_atomic(path, out);
}

SenseEmbeddingSet read_sense_embeddings(const fs::path& path, const SenseInventory& inventory,
                                        ReadDiagnostics* diagnostics) {
  const std::vector<TextLine> lines = read_tsv(path);
  if (lines.front().fields.size() < 3) {
    throw InputError(fmt::format("{}: expected verb, sense and at least one value",
                                 location(path, lines.front().number)));
  }
  const std::size_t dim = lines.front().fields.size() - 2;
  SenseEmbeddingSet set(dim);
  for (const TextLine& line : lines) {
    const std::string where = location(path, line.number);
    if (line.fields.size() != dim + 2) {
      throw InputError(fmt::format("{}: expected {} values, got {}", where, dim,
                                   line.fields.size() < 2 ? 0 : line.fields.size() - 2));
    }
    const std::string& verb = line.fields[0];
    const std::string& sense = line.fields[1];
    if (inventory.find_verb(verb) == nullptr) {
      throw InputError(fmt::format("{}: unknown verb '{}'", where, verb));
    }
    if (!inventory.has_sense(verb, sense)) {
      throw InputError(fmt::format("{}: sense '{}' is not listed for verb '{}'", where, sense, verb));
    }
    if (set.find(verb, sense) != nullptr) {
      throw InputError(fmt::format("{}: duplicate entry ({}, {})", where, verb, sense));
    }
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      v(static_cast<Eigen::Index>(k)) = parse_double(path, line.number, line.fields[k + 2]);
    }
    try {
      normalize_or_report(v, where, diagnostics);
    } catch (const InputError& e) {
      throw InputError(e.what());
    }
    set.add(verb, sense, std::move(v));
  }
  return set;
}

void write_sense_embeddings(const SenseEmbeddingSet& senses, const fs::path& path) {
  std::string out = "# verb\tsense\tvalues...\n";
  for (const auto& [key, v] : senses.entries()) {
    out += fmt::format("{}\t{}", key.first, key.second);
    for (Eigen::Index k = 0; k < v.size(); ++k) out += fmt::format("\t{}", v(k));
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::string format_results_csv(const std::vector<ExperimentResult>& results) {
  std::string out = kResultsHeader;
  out += '\n';
  for (const ExperimentResult& r : results) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.modality, r.class_label, to_string(r.protocol),
                       r.labels_per_class, r.runs.size(), r.mean, r.std);
  }
  return out;
}

std::string format_ablation_csv(const std::vector<ExperimentResult>& results) {
  std::string out = kAblationHeader;
  out += '\n';
  for (const ExperimentResult& r : results) {
    for (const SeedRun& run : r.runs) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", r.modality, r.class_label,
                         to_string(r.protocol), r.labels_per_class, run.seed, run.accuracy,
                         run.trace.iterations_run, run.trace.converged ? 1 : 0);
    }
  }
  return out;
}

void write_text_atomic(const fs::path& path, const std::string& content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError(fmt::format("{}: cannot open for writing", tmp.string()));
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw InputError(fmt::format("{}: write failed", tmp.string()));
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw InputError(fmt::format("{}: cannot move into place", path.string()));
  }
}

}  // namespace sensegraph::io
