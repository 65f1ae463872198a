#include "config.hpp"

#include "sensegraph/error.hpp"
#include "sensegraph/graph.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>

namespace sensegraph::cli {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc{} || ptr != end) {
    throw InputError(fmt::format("{}: '{}' is not a valid number", key, text));
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw InputError(fmt::format("{}: expected true or false, got '{}'", key, text));
}

fs::path resolve(std::string_view value, const fs::path& base) {
  fs::path p{std::string(value)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

Verbosity parse_verbosity(std::string_view text) {
  if (text == "quiet") return Verbosity::quiet;
  if (text == "normal") return Verbosity::normal;
  if (text == "verbose") return Verbosity::verbose;
  throw InputError(fmt::format("verbosity: expected quiet, normal or verbose, got '{}'", text));
}

void require_file(std::string_view key, const fs::path& p) {
  if (p.empty()) throw InputError(fmt::format("{} is not set", key));
  if (!fs::is_regular_file(p)) throw InputError(fmt::format("{}: file not found: {}", key, p.string()));
}

}  // namespace

std::string_view to_string(Verbosity v) {
  switch (v) {
    case Verbosity::quiet: return "quiet";
    case Verbosity::normal: return "normal";
    case Verbosity::verbose: return "verbose";
  }
  return "normal";
}

std::vector<long long> parse_number_list(std::string_view text) {
  std::vector<long long> out;
  std::set<long long> seen;
  for (std::string_view item : split(text, ',')) {
    if (item.empty()) throw InputError(fmt::format("empty entry in list '{}'", text));
    long long lo = 0, hi = 0;
    const auto dash = item.find('-', 1);
    if (dash == std::string_view::npos) {
      lo = hi = parse_number<long long>("entry", item);
    } else {
      lo = parse_number<long long>("entry", trim(item.substr(0, dash)));
      hi = parse_number<long long>("entry", trim(item.substr(dash + 1)));
      if (hi < lo) throw InputError(fmt::format("descending range '{}'", item));
    }
    for (long long v = lo; v <= hi; ++v) {
      if (!seen.insert(v).second) throw InputError(fmt::format("{} listed twice in '{}'", v, text));
      out.push_back(v);
    }
  }
  return out;
}

void RunConfig::set(std::string_view key, std::string_view value, const fs::path& base) {
  key = trim(key);
  value = trim(value);
  auto numbers = [&] {
    try {
      return parse_number_list(value);
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}: {}", key, e.what()));
    }
  };
  if (key.starts_with("embedding.")) {
    const std::string modality(key.substr(10));
    const ModalityTag tag = ModalityTag::parse(modality);
    if (tag.str() != modality || modality.find('+') != std::string::npos) {
      throw InputError(fmt::format("{}: embedding keys name one modality (CNN, O or C)", key));
    }
    embeddings[modality] = resolve(value, base);
  } else if (key == "inventory") {
    inventory = resolve(value, base);
  } else if (key == "labels") {
    labels = resolve(value, base);
  } else if (key == "sense_embeddings") {
    sense_embeddings = value.empty() ? fs::path{} : resolve(value, base);
  } else if (key == "output_dir") {
    output_dir = resolve(value, base);
  } else if (key == "fusion") {
    fusion.clear();
    for (std::string_view r : split(value, ',')) fusion.push_back(ModalityTag::parse(r).str());
  } else if (key == "protocol") {
    grid.protocol = parse_protocol(value);
  } else if (key == "lpc") {
    grid.labels_per_class.clear();
    for (long long v : numbers()) {
      if (v < 1) throw InputError(fmt::format("lpc: values must be >= 1, got {}", v));
      grid.labels_per_class.push_back(static_cast<int>(v));
    }
  } else if (key == "seeds") {
    grid.seeds.clear();
    for (long long v : numbers()) {
      if (v < 0) throw InputError(fmt::format("seeds: values must be >= 0, got {}", v));
      grid.seeds.push_back(static_cast<std::uint64_t>(v));
    }
  } else if (key == "class") {
    grid.classes = parse_class_filter(value);
  } else if (key == "tolerance") {
    dynamics.tolerance = parse_number<double>(key, value);
  } else if (key == "max_iterations") {
    dynamics.max_iterations = parse_number<int>(key, value);
  } else if (key == "renormalize") {
    dynamics.renormalize_each_step = parse_bool(key, value);
  } else if (key == "threads") {
    grid.threads = parse_number<unsigned>(key, value);
  } else if (key == "top_k") {
    grid.top_k = parse_number<std::size_t>(key, value);
  } else if (key == "verbosity") {
    verbosity = parse_verbosity(value);
  } else {
    throw InputError(fmt::format("unknown setting '{}'", key));
  }
}

std::vector<std::string> RunConfig::recipes() const {
  if (!fusion.empty()) return fusion;
  std::vector<std::string> out;
  for (const char* m : {"CNN", "O", "C"}) {
    if (embeddings.contains(m)) out.emplace_back(m);
  }
  return out;
}

void RunConfig::validate() const {
  dynamics.validate();
  if (grid.labels_per_class.empty()) throw InputError("lpc grid is empty");
  if (grid.seeds.empty()) throw InputError("seed list is empty");
  if (embeddings.empty()) throw InputError("no embedding files configured (embedding.<MODALITY>)");
  for (const std::string& recipe : recipes()) {
    const ModalityTag tag = ModalityTag::parse(recipe);
    const std::pair<const char*, bool> parts[] = {
        {"CNN", tag.cnn()}, {"O", tag.objects()}, {"C", tag.captions()}};
    for (const auto& [m, wanted] : parts) {
      if (wanted && !embeddings.contains(m)) {
        throw InputError(fmt::format("fusion recipe {} needs embedding.{}", recipe, m));
      }
    }
  }
  for (const auto& [modality, path] : embeddings) require_file("embedding." + modality, path);
  require_file("inventory", inventory);
  require_file("labels", labels);
  if (!sense_embeddings.empty()) require_file("sense_embeddings", sense_embeddings);
}

RunConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open config file {}", path.string()));
  RunConfig config;
  const fs::path base = path.parent_path();
  std::string line;
  for (int number = 1; std::getline(in, line); ++number) {
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    try {
      if (eq == std::string_view::npos) throw InputError("expected key = value");
      config.set(text.substr(0, eq), text.substr(eq + 1), base);
    } catch (const InputError& e) {
      throw InputError(fmt::format("{}:{}: {}", path.string(), number, e.what()));
    }
  }
  return config;
}

void apply_override(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw InputError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  config.set(assignment.substr(0, eq), assignment.substr(eq + 1));
}

std::string format_config(const RunConfig& config, const fs::path& base) {
  auto rel = [&](const fs::path& p) {
    if (p.empty()) return std::string{};
    return (base.empty() ? p : p.lexically_relative(base)).generic_string();
  };
  auto join = [](const auto& values) {
    std::string out;
    for (const auto& v : values) out += (out.empty() ? "" : ",") + fmt::format("{}", v);
    return out;
  };
  std::string out;
  for (const auto& [modality, path] : config.embeddings) {
    out += fmt::format("embedding.{} = {}\n", modality, rel(path));
  }
  out += fmt::format("inventory = {}\n", rel(config.inventory));
  out += fmt::format("labels = {}\n", rel(config.labels));
  if (!config.sense_embeddings.empty()) {
    out += fmt::format("sense_embeddings = {}\n", rel(config.sense_embeddings));
  }
  out += fmt::format("output_dir = {}\n", rel(config.output_dir));
  if (!config.fusion.empty()) out += fmt::format("fusion = {}\n", join(config.fusion));
  out += fmt::format("protocol = {}\n", to_string(config.grid.protocol));
  out += fmt::format("lpc = {}\n", join(config.grid.labels_per_class));
  out += fmt::format("seeds = {}\n", join(config.grid.seeds));
  out += fmt::format("class = {}\n", to_string(config.grid.classes));
  out += fmt::format("tolerance = {}\n", config.dynamics.tolerance);
  out += fmt::format("max_iterations = {}\n", config.dynamics.max_iterations);
  out += fmt::format("renormalize = {}\n", config.dynamics.renormalize_each_step);
  out += fmt::format("threads = {}\n", config.grid.threads);
  out += fmt::format("top_k = {}\n", config.grid.top_k);
  out += fmt::format("verbosity = {}\n", to_string(config.verbosity));
  return out;
}

}  // namespace sensegraph::cli
