#include <CLI11.hpp>

#include <iostream>

#include "dst/commands.hpp"
#include "dst/error.hpp"

namespace {

dst::OutputFormat parse_format(const std::string& name) {
  if (name == "markdown" || name == "md") return dst::OutputFormat::markdown;
  if (name == "json") return dst::OutputFormat::json;
  return dst::OutputFormat::csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot dialogue state tracking harness"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> dialogues;
  std::string format = "markdown";
  int parallelism = 0;
  std::string protocol;
  std::string traces;
  std::string output;
  std::string store;

  auto with_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Experiment config file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--output", output, "Override paths.output");
  };

  auto* make_prompt = app.add_subcommand("make-prompt", "Write the task prompt and print it");
  with_config(make_prompt);

  auto* run = app.add_subcommand("run", "Track dialogues and write one trace per dialogue");
  with_config(run);
  run->add_option("--dialogues", dialogues, "Dialogue ids to run (default: whole corpus)")->delimiter(',');
  run->add_option("--parallelism", parallelism, "Dialogues processed concurrently")->check(CLI::PositiveNumber);
  run->add_option("--store", store, "Override backend.store");

  auto* evaluate = app.add_subcommand("evaluate", "Score traces against the corpus");
  with_config(evaluate);
  evaluate->add_option("--traces", traces, "Traces directory (default: <output>/traces)");
  evaluate->add_option("--format", format, "Printed table format")->check(CLI::IsMember({"markdown", "md", "csv", "json"}));
  evaluate->add_option("--per-domain-protocol", protocol, "Dialogues counted per domain")
      ->check(CLI::IsMember({"touching", "all"}));

  auto* analyze = app.add_subcommand("analyze", "Classify errors in traces");
  with_config(analyze);
  analyze->add_option("--traces", traces, "Traces directory (default: <output>/traces)");
  analyze->add_option("--format", format, "Printed report format")->check(CLI::IsMember({"markdown", "md", "json", "csv"}));

  std::string upstream, corpus_out;
  std::vector<std::string> domains;
  auto* convert = app.add_subcommand("convert", "Convert upstream MultiWOZ data into the corpus format");
  convert->add_option("input", upstream, "Upstream data.json")->required();
  convert->add_option("output", corpus_out, "Corpus file to write")->required();
  convert->add_option("--domains", domains, "Domains to keep")->delimiter(',');

  std::string gold_out;
  auto* gold_store = app.add_subcommand("gold-store", "Write a replay store of the gold updates");
  with_config(gold_store);
  gold_store->add_option("--out", gold_out, "Store file (default: <output>/gold_store.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : dst::kExitConfig;
  }

  dst::CommandIo io{std::cout, std::cerr};
  if (convert->parsed()) return dst::cmd_convert(upstream, corpus_out, domains, io);

  dst::RunConfig cfg;
  try {
    cfg = dst::load_run_config(config_path);
    if (!output.empty()) cfg.output = std::filesystem::absolute(output);
    if (!dialogues.empty()) cfg.dialogues = dialogues;
    if (parallelism > 0) cfg.parallelism = parallelism;
    if (!store.empty()) cfg.store = std::filesystem::absolute(store);
    if (!protocol.empty()) cfg.per_domain_protocol = dst::parse_per_domain_protocol(protocol);
  } catch (const dst::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return dst::kExitConfig;
  }

  std::optional<std::filesystem::path> traces_dir;
  if (!traces.empty()) traces_dir = std::filesystem::absolute(traces);

  if (make_prompt->parsed()) return dst::cmd_make_prompt(cfg, io);
  if (run->parsed()) return dst::cmd_run(cfg, io);
  if (evaluate->parsed()) return dst::cmd_evaluate(cfg, traces_dir, parse_format(format), io);
  if (analyze->parsed()) return dst::cmd_analyze(cfg, traces_dir, parse_format(format), io);
  return dst::cmd_gold_store(cfg, gold_out.empty() ? cfg.output / "gold_store.jsonl" : std::filesystem::path(gold_out), io);
}
