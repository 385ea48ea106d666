#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dst/config.hpp"

namespace dst {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPartial = 3;

/// Streams for normal output and diagnostics. Commands never throw; they
/// report on `err` and return an exit code.
struct CommandIo {
  std::ostream& out;
  std::ostream& err;
};

/// Writes <output>/prompt.txt and prints the prompt.
int cmd_make_prompt(const RunConfig& cfg, CommandIo io);

/// Writes <output>/traces/<id>.jsonl per dialogue (<id>.partial.jsonl when the
/// backend failed). Dialogues with a complete trace are skipped.
int cmd_run(const RunConfig& cfg, CommandIo io);

enum class OutputFormat { markdown, json, csv };

/// Writes metrics.json, comparison.md and comparison.csv under the output
/// directory and prints the comparison table. `traces_dir` defaults to
/// <output>/traces.
int cmd_evaluate(const RunConfig& cfg, const std::optional<std::filesystem::path>& traces_dir,
                 OutputFormat format, CommandIo io);

/// Writes report.md, report.json and report.csv and prints one of them.
int cmd_analyze(const RunConfig& cfg, const std::optional<std::filesystem::path>& traces_dir, OutputFormat format,
                CommandIo io);

/// Converts an upstream MultiWOZ data file into the corpus format.
int cmd_convert(const std::filesystem::path& upstream, const std::filesystem::path& out,
                const std::vector<std::string>& domains, CommandIo io);

/// Writes a transcript store whose responses are the corpus gold updates.
int cmd_gold_store(const RunConfig& cfg, const std::filesystem::path& out, CommandIo io);

}  // namespace dst
