// gamelab: run, analyze, classify, export and validate game transcripts.
#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "gamelab/csv.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/plan.hpp"
#include "gamelab/reasoning_lab.hpp"
#include "gamelab/report.hpp"
#include "gamelab/runner.hpp"
#include "gamelab/transcript.hpp"
#include "gamelab/validate.hpp"

namespace fs = std::filesystem;
using namespace gamelab;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) throw ConfigError("cannot write " + path.string());
}

TranscriptSet load_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  auto set = read_transcript_files(paths);
  if (set.truncated) std::cerr << "warning: an input ended with a torn line; it was ignored\n";
  return set;
}

struct RunArgs {
  std::string plan;
  std::optional<int> sessions;
  std::optional<std::string> backend;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<int> concurrency;
  std::vector<std::string> settings;
  bool allow_mismatch = false;
  std::optional<std::size_t> limit;
  bool serial = false;
};

int cmd_run(const RunArgs& a) {
  ExperimentPlan plan = load_plan(a.plan);
  for (const auto& kv : a.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    apply_setting(plan, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.sessions) plan.sessions_per_treatment = *a.sessions;
  if (a.backend) apply_setting(plan, "backend", *a.backend);
  if (a.seed) plan.seed_base = *a.seed;
  if (a.output) plan.output = *a.output;
  if (a.concurrency) plan.concurrency = *a.concurrency;
  plan.validate();
  if (plan.uses_remote()) require_api_key(plan.remote);

  RunOptions opt;
  opt.mode = a.serial ? ExecutionMode::Serial : ExecutionMode::Parallel;
  opt.allow_plan_mismatch = a.allow_mismatch;
  opt.max_new_sessions = a.limit;
  std::cout << "plan " << plan.hash() << ": " << to_string(plan.game) << ", " << plan.sessions_per_treatment
            << " sessions per treatment, output " << plan.output.string() << "\n";
  const RunSummary s = run_experiment(plan, opt);
  if (s.repaired_tail) std::cout << "repaired a torn final line in the output\n";
  std::cout << "ran " << s.executed << " sessions, skipped " << s.skipped << " already finished\n";
  bool any_empty = false;
  for (const auto& t : s.per_treatment) {
    std::cout << "  " << t.treatment.label() << ": " << t.complete << " complete, " << t.aborted << " aborted";
    if (t.pending) std::cout << ", " << t.pending << " pending";
    std::cout << "\n";
    if (t.complete == 0) any_empty = true;
  }
  if (any_empty) {
    std::cerr << "error: at least one treatment has no complete session\n";
    return kExitFailure;
  }
  return 0;
}

struct AnalyzeArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> tables;
  std::string out = "report";
  bool clustered = false;
  std::string rank_test = "rank-sum";
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto set = load_inputs(a.inputs);
  AnalysisOptions opt;
  opt.clustered = a.clustered;
  if (a.rank_test == "rank-sum") {
    opt.rank_mode = RankTestMode::RankSum;
  } else if (a.rank_test == "signed-rank") {
    opt.rank_mode = RankTestMode::SignedRank;
  } else {
    throw UsageError("--rank-test expects rank-sum or signed-rank");
  }
  std::vector<TableId> ids;
  for (const auto& t : a.tables) ids.push_back(parse_table_id(t));
  if (ids.empty()) {
    GameKind game = GameKind::Ultimatum;
    if (set.header) game = set.header->game;
    else if (!set.sessions.empty()) game = set.sessions.front().treatment.game;
    ids = tables_for(game);
  }
  const Report rep = build_report(set, ids, opt, a.inputs);
  fs::create_directories(a.out);
  for (const auto& f : rep.files) write_file(fs::path(a.out) / f.name, f.contents);
  write_file(fs::path(a.out) / "report.txt", rep.text);
  std::cout << rep.text;
  std::cout << "wrote " << rep.files.size() << " data files and report.txt to " << a.out << "\n";
  return 0;
}

struct ClassifyArgs {
  std::vector<std::string> inputs;
  std::string preset;
  std::vector<std::string> categories;
  std::vector<int> rounds;
  std::string decision;
  std::optional<double> max_offer;
  std::optional<double> min_offer;
  std::string trait;
  std::string backend = "keyword";
  std::string judge_model;
  std::string judge_endpoint = kDefaultEndpoint;
  std::string api_key_env = kDefaultApiKeyEnv;
  std::string catalog;
  std::string store;
  int threads = 4;
  std::optional<std::size_t> review;
  std::uint64_t review_seed = 1;
  std::string review_out = "review.csv";
  std::string ingest;
};

int cmd_classify(const ClassifyArgs& a) {
  if (!a.ingest.empty()) {
    std::ifstream in(a.ingest, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + a.ingest);
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto rep = ingest_worksheet(text);
    std::cout << "worksheet rows: " << rep.rows << "\n";
    for (const auto& [cat, counts] : rep.per_category) {
      std::cout << "  " << cat << ": " << counts.first << " / " << counts.second;
      if (counts.second) std::cout << " agree (" << format_number(rep.rate(cat), 3) << ")";
      std::cout << "\n";
    }
    return 0;
  }
  if (a.inputs.empty()) throw UsageError("classify needs transcript files");

  const auto backend = parse_classifier_backend(a.backend);
  std::unique_ptr<Classifier> classifier;
  if (backend == ClassifierBackend::LLMJudge) {
    if (a.judge_model.empty()) throw ConfigError("--backend llm needs --judge-model");
    RemoteSettings remote;
    remote.endpoint = a.judge_endpoint;
    remote.api_key_env = a.api_key_env;
    const std::string key = require_api_key(remote);
    auto chat = std::make_shared<HttpChatClient>(chat_config_for(remote, key, a.threads));
    classifier = std::make_unique<JudgeClassifier>(chat, JudgeConfig{a.judge_model, 0.0, 3});
  } else {
    classifier = std::make_unique<KeywordClassifier>();
  }

  std::vector<Category> catalog;
  if (!a.catalog.empty()) {
    std::ifstream in(a.catalog, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + a.catalog);
    catalog = parse_catalog(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
  } else {
    catalog = builtin_catalog();
  }

  StatementFilter filter;
  std::vector<std::string> cat_ids = a.categories;
  std::string title = "custom slice";
  if (!a.preset.empty()) {
    const Preset& p = find_preset(a.preset);
    filter = p.filter;
    if (cat_ids.empty()) cat_ids = p.categories;
    title = p.name;
  }
  if (!a.rounds.empty()) filter.rounds = std::set<int>(a.rounds.begin(), a.rounds.end());
  if (!a.decision.empty()) filter.decision = parse_decision_kind(a.decision);
  if (a.max_offer) filter.offer_at_most = Dollars::from_double(*a.max_offer);
  if (a.min_offer) filter.offer_at_least = Dollars::from_double(*a.min_offer);
  if (!a.trait.empty()) filter.trait = parse_trait(a.trait);

  const auto set = load_inputs(a.inputs);
  const auto all = extract_statements(set);
  if (cat_ids.empty()) {
    GameKind game = filter.game.value_or(all.empty() ? GameKind::Ultimatum : all.front().game);
    for (const auto& c : categories_for(catalog, game)) cat_ids.push_back(c.id);
  }
  const auto cats = select_categories(catalog, cat_ids);
  const auto slice = apply_filter(all, filter);
  const auto results = classify_all(*classifier, slice, cats, backend == ClassifierBackend::LLMJudge ? a.threads : 1);
  if (!a.store.empty()) append_classifications(a.store, results);
  const auto rep = aggregate(results, slice, filter, cat_ids);
  std::cout << render_aggregate(rep, title + " (" + std::string(to_string(backend)) + " backend)");
  if (rep.empty()) std::cerr << "warning: no statements match the selected slice\n";
  if (a.review) {
    write_file(a.review_out, review_worksheet(results, slice, cat_ids, std::min(*a.review, results.size()), a.review_seed));
    std::cout << "review worksheet written to " << a.review_out << "\n";
  }
  return 0;
}

struct ExportArgs {
  std::vector<std::string> inputs;
  std::string what = "rounds";
  std::string out;
};

int cmd_export(const ExportArgs& a) {
  const auto set = load_inputs(a.inputs);
  std::string csv;
  if (a.what == "rounds") {
    csv = csv_row({"session_id", "status", "treatment", "round", "offer", "response", "action_a", "action_b", "payoff_a", "payoff_b"});
    for (const auto& t : set.sessions) {
      for (const auto& e : t.entries) {
        std::vector<std::string> row = {t.session_id, std::string(to_string(t.status)), t.treatment.code(),
                                        std::to_string(round_index(e.record))};
        if (const auto* u = std::get_if<UltimatumRound>(&e.record)) {
          row.insert(row.end(), {u->offer.str(), std::string(to_string(u->response)), "", "", u->proposer_payoff.str(),
                                 u->responder_payoff.str()});
        } else {
          const auto& p = std::get<PDRound>(e.record);
          row.insert(row.end(), {"", "", std::string(to_string(p.action_a)), std::string(to_string(p.action_b)),
                                 p.payoff_a.str(), p.payoff_b.str()});
        }
        csv += csv_row(row);
      }
    }
  } else if (a.what == "statements") {
    csv = csv_row({"statement", "treatment", "role", "trait", "decision", "offer", "reasoning"});
    for (const auto& s : extract_statements(set)) {
      csv += csv_row({s.ref.key(), s.treatment.code(), std::string(to_string(s.role)), std::string(to_string(s.trait)),
                      std::string(to_string(s.decision)), s.offer ? s.offer->str() : "", s.text});
    }
  } else {
    throw UsageError("--what expects rounds or statements");
  }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_file(a.out, csv);
  }
  return 0;
}

int cmd_validate(const std::vector<std::string>& inputs) {
  // Per file, so UG and PD transcripts can be checked in one call.
  std::size_t checked = 0, skipped = 0, violations = 0;
  for (const auto& path : inputs) {
    const auto rep = validate_transcripts(load_inputs({path}));
    for (const auto& v : rep.violations) std::cout << path << ": " << format_violation(v) << "\n";
    checked += rep.sessions_checked;
    skipped += rep.incomplete_skipped;
    violations += rep.violations.size();
  }
  if (checked == 0 && skipped == 0) std::cerr << "warning: no sessions found\n";
  std::cout << checked << " sessions checked, " << violations << " violations";
  if (skipped) std::cout << ", " << skipped << " incomplete sessions skipped";
  std::cout << "\n";
  return violations == 0 ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Repeated ultimatum and prisoner's dilemma experiments with language-model agents"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run (or resume) an experiment plan");
  run_cmd->add_option("--plan", run.plan, "Plan file (key = value)")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--sessions", run.sessions, "Sessions per treatment");
  run_cmd->add_option("--backend", run.backend, "Backend for both seats: llm, scripted or statistical");
  run_cmd->add_option("--seed", run.seed, "Seed base");
  run_cmd->add_option("--output", run.output, "Transcript file");
  run_cmd->add_option("--concurrency", run.concurrency, "Sessions in flight");
  run_cmd->add_option("--set", run.settings, "Extra plan setting, key=value (repeatable)");
  run_cmd->add_flag("--allow-plan-mismatch", run.allow_mismatch, "Append even if the output was written by another plan");
  run_cmd->add_option("--limit", run.limit, "Run at most this many new sessions");
  run_cmd->add_flag("--serial", run.serial, "Run sessions one at a time on the main thread");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Tables and per-round series from transcripts");
  analyze_cmd->add_option("inputs", analyze.inputs, "Transcript files")->required()->check(CLI::ExistingFile);
  analyze_cmd->add_option("--tables", analyze.tables, "Any of t1 t2 t3 t4 t5 fig1 fig2 (default: all for the game)");
  analyze_cmd->add_option("--out", analyze.out, "Output directory");
  analyze_cmd->add_flag("--clustered", analyze.clustered, "Session-clustered standard errors");
  analyze_cmd->add_option("--rank-test", analyze.rank_test, "rank-sum or signed-rank");

  ClassifyArgs classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify reasoning statements and aggregate");
  classify_cmd->add_option("inputs", classify.inputs, "Transcript files")->check(CLI::ExistingFile);
  classify_cmd->add_option("--preset", classify.preset, "Named slice, e.g. ug-round3-rejections");
  classify_cmd->add_option("--categories", classify.categories, "Category ids (default: preset or game catalog)");
  classify_cmd->add_option("--round", classify.rounds, "Restrict to these rounds");
  classify_cmd->add_option("--decision", classify.decision, "propose, accept, reject, cooperate or defect");
  classify_cmd->add_option("--max-offer", classify.max_offer, "Offer at most this amount");
  classify_cmd->add_option("--min-offer", classify.min_offer, "Offer at least this amount");
  classify_cmd->add_option("--trait", classify.trait, "fair or selfish");
  classify_cmd->add_option("--backend", classify.backend, "keyword or llm");
  classify_cmd->add_option("--judge-model", classify.judge_model, "Model id for the llm backend");
  classify_cmd->add_option("--judge-endpoint", classify.judge_endpoint, "Chat completions endpoint");
  classify_cmd->add_option("--api-key-env", classify.api_key_env, "Environment variable holding the API key");
  classify_cmd->add_option("--catalog", classify.catalog, "Category catalog file (default: built in)");
  classify_cmd->add_option("--store", classify.store, "Append classifications to this JSONL file");
  classify_cmd->add_option("--threads", classify.threads, "Concurrent judge requests");
  classify_cmd->add_option("--review", classify.review, "Write a review worksheet with this many rows");
  classify_cmd->add_option("--review-seed", classify.review_seed, "Seed for the review sample");
  classify_cmd->add_option("--review-out", classify.review_out, "Review worksheet path");
  classify_cmd->add_option("--ingest", classify.ingest, "Report agreement from a completed worksheet");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "Flatten transcripts to CSV");
  export_cmd->add_option("inputs", exp.inputs, "Transcript files")->required()->check(CLI::ExistingFile);
  export_cmd->add_option("--what", exp.what, "rounds or statements");
  export_cmd->add_option("--out", exp.out, "Output file (default: stdout)");

  std::vector<std::string> validate_inputs;
  auto* validate_cmd = app.add_subcommand("validate", "Replay transcripts and audit prompts");
  validate_cmd->add_option("inputs", validate_inputs, "Transcript files")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) return cmd_run(run);
    if (*analyze_cmd) return cmd_analyze(analyze);
    if (*classify_cmd) return cmd_classify(classify);
    if (*export_cmd) return cmd_export(exp);
    if (*validate_cmd) return cmd_validate(validate_inputs);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return 0;
}
