#include "dst/commands.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <thread>

#include "dst/analysis.hpp"
#include "dst/corpus.hpp"
#include "dst/error.hpp"
#include "dst/extraction.hpp"
#include "dst/prompting.hpp"
#include "dst/text.hpp"
#include "dst/tracker.hpp"

namespace dst {

namespace fs = std::filesystem;

namespace {

// Writes through a temporary file so an interrupted run never leaves a
// truncated file under the final name.
void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw ConfigError("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

template <typename F>
int guarded(CommandIo io, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const DataError& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const BackendError& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const fs::filesystem_error& e) {
    io.err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << "\n";
  }
  return kExitConfig;
}

Schema load_configured_schema(const RunConfig& cfg) {
  require_file(cfg.schema, "paths.schema");
  return load_schema(cfg.schema);
}

PromptTemplate configured_template(const RunConfig& cfg) {
  if (cfg.prompt_template.empty()) return PromptTemplate::builtin();
  require_file(cfg.prompt_template, "paths.template");
  return PromptTemplate::load(cfg.prompt_template);
}

RequestableLexicon configured_requestables(const RunConfig& cfg, const Schema& schema) {
  if (cfg.requestables.empty()) return {};
  require_file(cfg.requestables, "paths.requestables");
  auto lex = load_requestables(cfg.requestables);
  check_disjoint(schema, lex);
  return lex;
}

Corpus configured_corpus(const RunConfig& cfg) {
  require_file(cfg.corpus, "paths.corpus");
  return load_corpus(cfg.corpus);
}

VariantMap configured_eval_variants(const RunConfig& cfg) {
  if (cfg.eval_variants.empty()) return {};
  require_file(cfg.eval_variants, "paths.eval_variants");
  return load_variant_map(cfg.eval_variants);
}

std::unique_ptr<ChatBackend> make_backend(const RunConfig& cfg) {
  switch (cfg.backend_kind) {
    case BackendKind::replay:
      require_file(cfg.store, "backend.store");
      return std::make_unique<ReplayBackend>(std::make_shared<const TranscriptStore>(TranscriptStore::load(cfg.store)));
    case BackendKind::fault: {
      require_file(cfg.script, "backend.script");
      std::shared_ptr<const TranscriptStore> fallback;
      if (!cfg.store.empty()) {
        require_file(cfg.store, "backend.store");
        fallback = std::make_shared<const TranscriptStore>(TranscriptStore::load(cfg.store));
      }
      return std::make_unique<FaultBackend>(FaultScript::load(cfg.script), fallback);
    }
    case BackendKind::remote:
      return std::make_unique<RemoteBackend>(cfg.backend);
  }
  throw ConfigError("unsupported backend");
}

std::vector<const Dialogue*> select_dialogues(const Corpus& corpus, const std::vector<std::string>& ids) {
  std::vector<const Dialogue*> out;
  if (ids.empty()) {
    for (const auto& d : corpus.dialogues) out.push_back(&d);
    return out;
  }
  std::set<std::string> seen;
  for (const auto& id : ids) {
    const Dialogue* d = corpus.find(id);
    if (!d) throw ConfigError("dialogue " + id + " is not in the corpus");
    if (seen.insert(id).second) out.push_back(d);
  }
  return out;
}

fs::path traces_dir_of(const RunConfig& cfg, const std::optional<fs::path>& override_dir) {
  fs::path dir = override_dir ? *override_dir : cfg.output / "traces";
  if (!fs::is_directory(dir)) throw ConfigError("traces directory not found: " + dir.string());
  return dir;
}

}  // namespace

int cmd_make_prompt(const RunConfig& cfg, CommandIo io) {
  return guarded(io, [&] {
    auto prompt = build_task_prompt(load_configured_schema(cfg), configured_template(cfg));
    write_file(cfg.output / "prompt.txt", prompt.text);
    io.out << prompt.text;
    io.out.flush();
    return kExitOk;
  });
}

int cmd_run(const RunConfig& cfg, CommandIo io) {
  return guarded(io, [&] {
    Schema schema = load_configured_schema(cfg);
    auto requestables = configured_requestables(cfg, schema);
    Corpus corpus = configured_corpus(cfg);
    ValueVariantTable table;
    if (!cfg.value_variants.empty()) {
      require_file(cfg.value_variants, "paths.value_variants");
      table = ValueVariantTable::load(cfg.value_variants);
    }
    EmptinessLexicon emptiness;
    if (!cfg.emptiness.empty()) {
      require_file(cfg.emptiness, "paths.emptiness");
      emptiness = EmptinessLexicon::load(cfg.emptiness);
    }
    const TaskPrompt prompt = build_task_prompt(schema, configured_template(cfg));
    const Extractor extractor(schema, requestables, ValueNormalizer(std::move(table)), std::move(emptiness));
    auto selected = select_dialogues(corpus, cfg.dialogues);
    auto backend = make_backend(cfg);

    const fs::path traces = cfg.output / "traces";
    const fs::path transcripts = cfg.output / "transcripts";
    fs::create_directories(traces);

    std::vector<const Dialogue*> pending;
    std::size_t skipped = 0;
    for (const auto* d : selected) {
      if (fs::exists(traces / (d->id + ".jsonl"))) {
        ++skipped;
      } else {
        pending.push_back(d);
      }
    }

    TrackerOptions options;
    options.full_state_min_slots = cfg.full_state_min_slots;
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> completed{0}, partial{0};
    std::mutex err_mutex;

    auto worker = [&] {
      for (std::size_t i = next++; i < pending.size(); i = next++) {
        const Dialogue& d = *pending[i];
        try {
          auto session = backend->open_session(d.id);
          Trace trace = run_dialogue(*session, extractor, prompt, d, options);
          if (backend->kind() == BackendKind::remote) {
            fs::create_directories(transcripts);
            fs::remove(transcripts / (d.id + ".jsonl"));
            session->persist_transcript(transcripts / (d.id + ".jsonl"));
          }
          const fs::path partial_path = traces / (d.id + ".partial.jsonl");
          if (trace.complete) {
            write_file(traces / (d.id + ".jsonl"), serialize_trace(trace));
            fs::remove(partial_path);
            ++completed;
          } else {
            write_file(partial_path, serialize_trace(trace));
            ++partial;
            std::lock_guard lock(err_mutex);
            io.err << "partial: " << d.id << " stopped after " << trace.turns.size() << " of " << d.turns.size()
                   << " turns: " << trace.error << "\n";
          }
        } catch (const std::exception& e) {
          ++partial;
          std::lock_guard lock(err_mutex);
          io.err << "failed: " << d.id << ": " << e.what() << "\n";
        }
      }
    };

    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.parallelism), pending.size());
    {
      std::vector<std::jthread> pool;
      for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    io.out << "dialogues: " << selected.size() << " selected, " << pending.size() << " processed, " << skipped
           << " skipped, " << completed.load() << " complete, " << partial.load() << " partial\n";
    return partial.load() > 0 ? kExitPartial : kExitOk;
  });
}

int cmd_evaluate(const RunConfig& cfg, const std::optional<fs::path>& traces_dir, OutputFormat format,
                 CommandIo io) {
  return guarded(io, [&] {
    Schema schema = load_configured_schema(cfg);
    Corpus corpus = configured_corpus(cfg);
    VariantMap variants = configured_eval_variants(cfg);
    auto traces = load_traces(traces_dir_of(cfg, traces_dir));
    Metrics metrics = evaluate(traces, corpus, schema, variants, cfg.per_domain_protocol);

    std::optional<ReferenceNumbers> reference;
    if (!cfg.reference.empty()) {
      require_file(cfg.reference, "paths.reference");
      reference = ReferenceNumbers::load(cfg.reference);
    }
    const ReferenceNumbers* ref = reference ? &*reference : nullptr;
    std::string md = render_comparison(metrics, ref, TableFormat::markdown);
    std::string csv = render_comparison(metrics, ref, TableFormat::csv);
    write_file(cfg.output / "metrics.json", to_json(metrics).dump(2) + "\n");
    write_file(cfg.output / "comparison.md", md);
    write_file(cfg.output / "comparison.csv", csv);
    if (format == OutputFormat::json) {
      io.out << to_json(metrics).dump(2) << "\n";
    } else {
      io.out << (format == OutputFormat::csv ? csv : md);
    }
    return kExitOk;
  });
}

int cmd_analyze(const RunConfig& cfg, const std::optional<fs::path>& traces_dir, OutputFormat format, CommandIo io) {
  return guarded(io, [&] {
    Schema schema = load_configured_schema(cfg);
    auto requestables = configured_requestables(cfg, schema);
    Corpus corpus = configured_corpus(cfg);
    VariantMap variants = configured_eval_variants(cfg);
    GenericReferentLexicon referents;
    if (!cfg.referents.empty()) {
      require_file(cfg.referents, "paths.referents");
      referents = GenericReferentLexicon::load(cfg.referents);
    }
    auto traces = load_traces(traces_dir_of(cfg, traces_dir));
    auto casing = CasingEvidence::collect(traces, schema, requestables);
    AnalysisContext ctx{schema, requestables, variants, referents, casing};
    auto records = classify_errors(traces, corpus, ctx);
    Report report = aggregate(records, traces, corpus, ctx);

    std::string md = render_report(report, ReportFormat::markdown);
    std::string json = render_report(report, ReportFormat::json);
    std::string csv = render_report(report, ReportFormat::csv);
    write_file(cfg.output / "report.md", md);
    write_file(cfg.output / "report.json", json);
    write_file(cfg.output / "report.csv", csv);
    io.out << (format == OutputFormat::json ? json : format == OutputFormat::csv ? csv : md);
    return kExitOk;
  });
}

int cmd_convert(const fs::path& upstream, const fs::path& out, const std::vector<std::string>& domains,
                CommandIo io) {
  return guarded(io, [&] {
    require_file(upstream, "upstream data");
    Json doc = parse_json_strict(text::read_file(upstream), upstream.string());
    Corpus corpus = convert_upstream(doc, std::set<std::string>(domains.begin(), domains.end()));
    for (const auto& w : corpus.warnings) io.err << "warning: " << w << "\n";
    write_file(out, serialize_corpus(corpus));
    io.out << "converted " << corpus.dialogues.size() << " dialogues to " << out.string() << "\n";
    return kExitOk;
  });
}

int cmd_gold_store(const RunConfig& cfg, const fs::path& out, CommandIo io) {
  return guarded(io, [&] {
    Schema schema = load_configured_schema(cfg);
    Corpus corpus = configured_corpus(cfg);
    auto prompt = build_task_prompt(schema, configured_template(cfg));
    TranscriptStore store = make_gold_store(corpus, prompt);
    std::string content;
    for (const auto& id : store.dialogue_ids())
      for (int t = 1; t <= store.turn_count(id); ++t) content += to_json(*store.find(id, t)).dump() + "\n";
    write_file(out, content);
    io.out << "wrote " << store.size() << " gold responses to " << out.string() << "\n";
    return kExitOk;
  });
}

}  // namespace dst
