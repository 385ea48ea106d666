#include "dst/config.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <map>
#include <set>
#include <sstream>

#include "dst/error.hpp"
#include "dst/text.hpp"

namespace dst {

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"paths",
     {"schema", "requestables", "corpus", "output", "value_variants", "eval_variants", "reference", "template",
      "emptiness", "referents"}},
    {"run", {"parallelism", "per_domain_protocol", "dialogues", "full_state_min_slots"}},
    {"backend",
     {"kind", "store", "script", "endpoint", "model", "temperature", "timeout", "max_retries", "retry_base_delay",
      "rate_limit", "api_key_env"}},
};

template <typename T>
T number(const std::string& value, const std::string& key, const std::string& source) {
  T out{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || end != value.data() + value.size())
    throw ConfigError(source + ": " + key + " is not a number: " + value);
  return out;
}

}  // namespace

void require_file(const std::filesystem::path& path, const std::string& key) {
  if (path.empty()) throw ConfigError(key + " is not configured");
  if (!std::filesystem::exists(path)) throw ConfigError(key + " not found: " + path.string());
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir, const std::string& source) {
  std::vector<CLI::ConfigItem> items;
  try {
    std::istringstream in(text);
    items = CLI::ConfigBase().from_config(in);
  } catch (const CLI::Error& e) {
    throw ConfigError(source + ": " + e.what());
  }

  RunConfig cfg;
  cfg.source = source;
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  };

  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    if (item.parents.size() != 1)
      throw ConfigError(source + ": key " + item.fullname() + " must sit in one of [paths], [run], [backend]");
    const std::string& section = item.parents[0];
    const std::string& key = item.name;
    auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) throw ConfigError(source + ": unknown section [" + section + "]");
    if (!known->second.count(key)) throw ConfigError(source + ": unknown key " + section + "." + key);
    const std::string full = section + "." + key;

    if (full == "run.dialogues") {
      for (const auto& v : item.inputs) {
        std::stringstream ss(v);
        std::string id;
        while (std::getline(ss, id, ','))
          if (auto t = text::trim(id); !t.empty()) cfg.dialogues.emplace_back(t);
      }
      continue;
    }
    if (item.inputs.size() != 1) throw ConfigError(source + ": " + full + " takes a single value");
    const std::string value(text::trim(item.inputs[0]));

    if (section == "paths") {
      std::filesystem::path p = resolve(value);
      if (key == "schema") cfg.schema = p;
      else if (key == "requestables") cfg.requestables = p;
      else if (key == "corpus") cfg.corpus = p;
      else if (key == "output") cfg.output = p;
      else if (key == "value_variants") cfg.value_variants = p;
      else if (key == "eval_variants") cfg.eval_variants = p;
      else if (key == "reference") cfg.reference = p;
      else if (key == "template") cfg.prompt_template = p;
      else if (key == "emptiness") cfg.emptiness = p;
      else if (key == "referents") cfg.referents = p;
    } else if (section == "run") {
      if (key == "parallelism") cfg.parallelism = number<int>(value, full, source);
      else if (key == "per_domain_protocol") cfg.per_domain_protocol = parse_per_domain_protocol(value);
      else if (key == "full_state_min_slots") cfg.full_state_min_slots = number<std::size_t>(value, full, source);
    } else {
      if (key == "kind") {
        try {
          cfg.backend_kind = parse_backend_kind(value);
        } catch (const std::exception& e) {
          throw ConfigError(source + ": " + e.what());
        }
      }
      else if (key == "store") cfg.store = resolve(value);
      else if (key == "script") cfg.script = resolve(value);
      else if (key == "endpoint") cfg.backend.endpoint_url = value;
      else if (key == "model") cfg.backend.model_id = value;
      else if (key == "temperature") cfg.backend.temperature = number<double>(value, full, source);
      else if (key == "timeout") cfg.backend.timeout_seconds = number<double>(value, full, source);
      else if (key == "max_retries") cfg.backend.max_retries = number<int>(value, full, source);
      else if (key == "retry_base_delay") cfg.backend.retry_base_delay = number<double>(value, full, source);
      else if (key == "rate_limit") cfg.backend.rate_limit = number<double>(value, full, source);
      else if (key == "api_key_env") cfg.backend.api_key_env = value;
    }
  }

  if (cfg.schema.empty()) throw ConfigError(source + ": paths.schema is required");
  if (cfg.corpus.empty()) throw ConfigError(source + ": paths.corpus is required");
  if (cfg.output.empty()) throw ConfigError(source + ": paths.output is required");
  if (cfg.parallelism < 1) throw ConfigError(source + ": run.parallelism must be at least 1");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_run_config(text::read_file(path), base, path.string());
}

}  // namespace dst
