#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dst/backend.hpp"
#include "dst/eval.hpp"

namespace dst {

/// Settings of one experiment, read from a sectioned key-value file:
///
///   [paths]    schema, requestables, corpus, output, value_variants,
///              eval_variants, reference, template, emptiness, referents
///   [run]      parallelism, per_domain_protocol, dialogues, full_state_min_slots
///   [backend]  kind (replay | fault | remote), store, script, endpoint, model,
///              temperature, timeout, max_retries, retry_base_delay,
///              rate_limit, api_key_env
///
/// Relative paths are resolved against the config file's directory. Optional
/// paths are empty when not configured.
struct RunConfig {
  std::filesystem::path source;

  std::filesystem::path schema;
  std::filesystem::path requestables;
  std::filesystem::path corpus;
  std::filesystem::path output;
  std::filesystem::path value_variants;
  std::filesystem::path eval_variants;
  std::filesystem::path reference;
  std::filesystem::path prompt_template;
  std::filesystem::path emptiness;
  std::filesystem::path referents;

  int parallelism = 1;
  PerDomainProtocol per_domain_protocol = PerDomainProtocol::touching;
  std::vector<std::string> dialogues;  // empty selects the whole corpus
  std::size_t full_state_min_slots = 2;

  BackendKind backend_kind = BackendKind::replay;
  std::filesystem::path store;
  std::filesystem::path script;
  BackendConfig backend;
};

/// Throws ConfigError for unknown sections or keys, bad numbers, or a missing
/// required path (schema, corpus, output).
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir,
                           const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError naming `key` when the file does not exist.
void require_file(const std::filesystem::path& path, const std::string& key);

}  // namespace dst
