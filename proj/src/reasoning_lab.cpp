#include "gamelab/reasoning_lab.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gamelab/csv.hpp"
#include "gamelab/embedded_data.hpp"
#include "gamelab/envelope.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Collapses whitespace and folds typographic apostrophes and quotes to ASCII.
std::string normalize(std::string_view text) {
  std::string s(text);
  const std::pair<std::string, std::string> folds[] = {
      {"\xE2\x80\x99", "'"}, {"\xE2\x80\x98", "'"}, {"\xE2\x80\x9C", "\""}, {"\xE2\x80\x9D", "\""}};
  for (const auto& [from, to] : folds) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos)) s.replace(pos, from.size(), to);
  }
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

struct CompiledCategory {
  std::vector<std::regex> patterns;
  std::vector<std::regex> excludes;
};

const CompiledCategory& compiled(const Category& c) {
  static std::mutex mutex;
  static std::map<std::string, CompiledCategory> cache;
  std::lock_guard lock(mutex);
  std::string key = c.id;
  for (const auto& p : c.patterns) key += "\x1f" + p;
  key += "\x1e";
  for (const auto& p : c.excludes) key += "\x1f" + p;
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  CompiledCategory cc;
  const auto flags = std::regex::ECMAScript | std::regex::icase;
  try {
    for (const auto& p : c.patterns) cc.patterns.emplace_back(p, flags);
    for (const auto& p : c.excludes) cc.excludes.emplace_back(p, flags);
  } catch (const std::regex_error& e) {
    throw ConfigError("category '" + c.id + "' has an invalid pattern: " + e.what());
  }
  return cache.emplace(key, std::move(cc)).first->second;
}

DecisionKind decision_of(const RoundEntry& e, Seat seat) {
  if (const auto* u = std::get_if<UltimatumRound>(&e.record)) {
    if (seat == Seat::A) return DecisionKind::Propose;
    return u->response == Response::Accept ? DecisionKind::Accept : DecisionKind::Reject;
  }
  return std::get<PDRound>(e.record).action(seat) == Move::Cooperate ? DecisionKind::Cooperate : DecisionKind::Defect;
}

std::string role_phrase(Role r) {
  switch (r) {
    case Role::Proposer: return "a proposer";
    case Role::Responder: return "a responder";
    default: return "a player";
  }
}

std::map<StatementRef, const Statement*> index_statements(const std::vector<Statement>& statements) {
  std::map<StatementRef, const Statement*> idx;
  for (const auto& s : statements) idx[s.ref] = &s;
  return idx;
}

bool parse_verdict(std::string v, bool& agree) {
  for (auto& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  v = trim(v);
  if (v == "agree" || v == "yes" || v == "y" || v == "1" || v == "true") {
    agree = true;
    return true;
  }
  if (v == "disagree" || v == "no" || v == "n" || v == "0" || v == "false") {
    agree = false;
    return true;
  }
  if (!v.empty()) throw DomainError("unrecognised verdict '" + v + "'");
  return false;
}

}  // namespace

std::vector<Category> parse_catalog(std::string_view text) {
  std::vector<Category> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool scope_seen = false;
  auto finish = [&] {
    if (out.empty()) return;
    const auto& c = out.back();
    if (c.description.empty()) throw ConfigError("category '" + c.id + "' has no description");
    if (!scope_seen) throw ConfigError("category '" + c.id + "' has no scope");
  };
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("catalog line " + std::to_string(line_no) + ": unterminated section");
      finish();
      Category c;
      c.id = trim(std::string_view(t).substr(1, t.size() - 2));
      if (c.id.empty()) throw ConfigError("catalog line " + std::to_string(line_no) + ": empty category id");
      for (const auto& prev : out)
        if (prev.id == c.id) throw ConfigError("duplicate category '" + c.id + "'");
      out.push_back(std::move(c));
      scope_seen = false;
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos || out.empty()) {
      throw ConfigError("catalog line " + std::to_string(line_no) + ": expected key = value inside a [category]");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    auto& c = out.back();
    if (key == "scope") {
      try {
        c.scope = parse_game(value);
      } catch (const UsageError& e) {
        throw ConfigError("category '" + c.id + "': " + e.what());
      }
      scope_seen = true;
    } else if (key == "description") {
      c.description = value;
    } else if (key == "pattern") {
      c.patterns.push_back(value);
    } else if (key == "exclude") {
      c.excludes.push_back(value);
    } else {
      throw ConfigError("catalog line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  finish();
  for (const auto& c : out) compiled(c);
  return out;
}

const std::vector<Category>& builtin_catalog() {
  static const std::vector<Category> catalog = parse_catalog(embedded_file("categories.catalog"));
  return catalog;
}

std::vector<Category> select_categories(const std::vector<Category>& catalog, const std::vector<std::string>& ids) {
  std::vector<Category> out;
  for (const auto& id : ids) {
    const auto it = std::find_if(catalog.begin(), catalog.end(), [&](const Category& c) { return c.id == id; });
    if (it == catalog.end()) throw UsageError("unknown category '" + id + "'");
    out.push_back(*it);
  }
  return out;
}

std::vector<Category> categories_for(const std::vector<Category>& catalog, GameKind game) {
  std::vector<Category> out;
  for (const auto& c : catalog)
    if (c.scope == game) out.push_back(c);
  return out;
}

std::string StatementRef::key() const {
  return session_id + "/" + std::to_string(round) + "/" + std::string(to_string(seat));
}

std::string_view to_string(DecisionKind d) {
  switch (d) {
    case DecisionKind::Propose: return "propose";
    case DecisionKind::Accept: return "accept";
    case DecisionKind::Reject: return "reject";
    case DecisionKind::Cooperate: return "cooperate";
    case DecisionKind::Defect: return "defect";
  }
  return "?";
}

DecisionKind parse_decision_kind(std::string_view s) {
  for (auto d : {DecisionKind::Propose, DecisionKind::Accept, DecisionKind::Reject, DecisionKind::Cooperate, DecisionKind::Defect})
    if (to_string(d) == s) return d;
  throw UsageError("unknown decision '" + std::string(s) + "'");
}

std::vector<Statement> extract_statements(const TranscriptSet& set) {
  std::vector<Statement> out;
  for (const auto& t : set.sessions) {
    if (t.status == SessionStatus::Incomplete) continue;
    for (const auto& e : t.entries) {
      for (const auto& d : e.decisions) {
        Statement s;
        s.ref = {t.session_id, round_index(e.record), d.seat};
        s.text = d.envelope.reasoning;
        s.game = t.treatment.game;
        s.role = viewpoint_for(t.treatment, d.seat).role;
        s.trait = t.treatment.trait(d.seat);
        s.treatment = t.treatment;
        s.total_rounds = t.rounds;
        s.decision = decision_of(e, d.seat);
        if (const auto* u = std::get_if<UltimatumRound>(&e.record)) s.offer = u->offer;
        out.push_back(std::move(s));
      }
    }
  }
  return out;
}

bool StatementFilter::matches(const Statement& s) const {
  if (game && s.game != *game) return false;
  if (!rounds.empty() && !rounds.count(s.ref.round)) return false;
  if (decision && s.decision != *decision) return false;
  if (offer_at_most && (!s.offer || *s.offer > *offer_at_most)) return false;
  if (offer_at_least && (!s.offer || *s.offer < *offer_at_least)) return false;
  if (trait && s.trait != *trait) return false;
  if (role && s.role != *role) return false;
  return true;
}

std::vector<Statement> apply_filter(const std::vector<Statement>& statements, const StatementFilter& filter) {
  std::vector<Statement> out;
  for (const auto& s : statements)
    if (filter.matches(s)) out.push_back(s);
  return out;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    const auto ug = GameKind::Ultimatum;
    const auto pd = GameKind::PrisonersDilemma;
    const auto thirty = Dollars::whole(30);
    const std::vector<std::string> accept_cats = {"gain_vs_nothing", "better_future_offers", "limited_rounds"};
    const std::vector<std::string> coop_cats = {"reputation_building", "altruism"};
    return std::vector<Preset>{
        {"ug-round3-rejections", {ug, {3}, DecisionKind::Reject, {}, {}, {}, {}}, {"diminishing_offers", "better_future_offers"}},
        {"ug-rounds12-lowoffer-accepts", {ug, {1, 2}, DecisionKind::Accept, thirty, {}, {}, {}}, accept_cats},
        {"ug-rounds45-lowoffer-accepts", {ug, {4, 5}, DecisionKind::Accept, thirty, {}, {}, {}}, accept_cats},
        {"pd-round1-cooperations", {pd, {1}, DecisionKind::Cooperate, {}, {}, {}, {}}, coop_cats},
        {"pd-rounds14-cooperations", {pd, {1, 2, 3, 4}, DecisionKind::Cooperate, {}, {}, {}, {}}, coop_cats},
        {"pd-round5-cooperations", {pd, {5}, DecisionKind::Cooperate, {}, {}, {}, {}},
         {"je1_simultaneous_response", "je2_mutual_defection_risk", "je3_final_round_retaliation"}},
    };
  }();
  return all;
}

const Preset& find_preset(std::string_view name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string names;
  for (const auto& p : presets()) names += (names.empty() ? "" : ", ") + p.name;
  throw UsageError("unknown preset '" + std::string(name) + "'; known presets: " + names);
}

std::string_view to_string(ClassifierBackend b) { return b == ClassifierBackend::Keyword ? "keyword" : "llm"; }

ClassifierBackend parse_classifier_backend(std::string_view s) {
  if (s == "keyword") return ClassifierBackend::Keyword;
  if (s == "llm" || s == "judge") return ClassifierBackend::LLMJudge;
  throw UsageError("unknown classifier backend '" + std::string(s) + "' (expected keyword or llm)");
}

bool KeywordClassifier::matches(std::string_view text, const Category& category) {
  const auto& cc = compiled(category);
  std::string s = normalize(text);
  for (const auto& ex : cc.excludes) {
    std::string blanked;
    std::size_t last = 0;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), ex); it != std::sregex_iterator(); ++it) {
      blanked.append(s, last, static_cast<std::size_t>(it->position()) - last);
      blanked += " | ";
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    blanked.append(s, last);
    s = std::move(blanked);
  }
  return std::any_of(cc.patterns.begin(), cc.patterns.end(), [&](const std::regex& re) { return std::regex_search(s, re); });
}

Classification KeywordClassifier::classify(const Statement& statement, const std::vector<Category>& categories) {
  Classification c;
  c.ref = statement.ref;
  c.backend = ClassifierBackend::Keyword;
  if (categories.empty()) return c;
  if (trim(statement.text).empty()) throw UsageError("cannot classify an empty statement");
  for (const auto& cat : categories) c.flags[cat.id] = matches(statement.text, cat);
  return c;
}

std::string statement_context(const Statement& s) {
  const std::string game = s.game == GameKind::Ultimatum ? "Ultimatum Game" : "Prisoner's Dilemma";
  std::string ctx = role_phrase(s.role) + " in a multi-round " + game + " (round " + std::to_string(s.ref.round) +
                    " of " + std::to_string(s.total_rounds) + ", decision: " + std::string(to_string(s.decision));
  if (s.offer) ctx += ", offer to the responder: " + s.offer->str() + " dollars";
  return ctx + ")";
}

PromptPair render_judge_prompt(const Statement& s, const std::vector<Category>& categories) {
  const auto tf = TemplateFile::parse(embedded_file("judge_prompt.tmpl"));
  std::string lines, keys;
  for (const auto& c : categories) {
    if (!lines.empty()) lines += "\n";
    lines += fill_placeholders(tf.section("category_line"), {{"id", c.id}, {"description", c.description}});
    keys += (keys.empty() ? "" : ", ") + c.id;
  }
  return {tf.section("system"), fill_placeholders(tf.section("user"), {{"context", statement_context(s)},
                                                                       {"categories", lines},
                                                                       {"statement", s.text},
                                                                       {"keys", keys}})};
}

std::map<std::string, bool> parse_judge_reply(std::string_view raw, const std::vector<Category>& categories) {
  const auto objects = extract_json_objects(raw);
  if (objects.empty()) throw MalformedDecision("judge reply holds no JSON object");
  std::string first_problem;
  for (const auto& text : objects) {
    const json j = json::parse(text);
    std::map<std::string, bool> flags;
    std::string problem;
    for (const auto& c : categories) {
      if (!j.contains(c.id)) {
        problem = "missing key '" + c.id + "'";
        break;
      }
      if (!j.at(c.id).is_boolean()) {
        problem = "value for '" + c.id + "' is not a boolean";
        break;
      }
      flags[c.id] = j.at(c.id).get<bool>();
    }
    if (problem.empty() && j.size() != categories.size()) problem = "unexpected extra keys";
    if (problem.empty()) return flags;
    if (first_problem.empty()) first_problem = problem;
  }
  throw MalformedDecision("judge reply: " + first_problem);
}

JudgeClassifier::JudgeClassifier(std::shared_ptr<ChatClient> chat, JudgeConfig config)
    : chat_(std::move(chat)), config_(std::move(config)) {
  if (config_.model.empty()) throw ConfigError("the llm classifier needs a judge model");
  if (!chat_) throw ConfigError("the llm classifier needs a chat client");
  if (config_.max_attempts < 1) throw ConfigError("judge max_attempts must be >= 1");
}

Classification JudgeClassifier::classify(const Statement& statement, const std::vector<Category>& categories) {
  Classification c;
  c.ref = statement.ref;
  c.backend = ClassifierBackend::LLMJudge;
  if (categories.empty()) return c;
  if (trim(statement.text).empty()) throw UsageError("cannot classify an empty statement");
  const PromptPair prompt = render_judge_prompt(statement, categories);
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    c.attempts = attempt;
    ChatRequest req{config_.model, config_.temperature,
                    {{"system", prompt.system}, {"user", attempt == 1 ? prompt.user : prompt.user + "\n" + kFormatReminder}}};
    try {
      c.raw_judge_output = chat_->complete(req);
    } catch (const TransportError& e) {
      c.raw_judge_output = std::string("transport error: ") + e.what();
      break;
    }
    try {
      c.flags = parse_judge_reply(c.raw_judge_output, categories);
      return c;
    } catch (const DecisionFormatError&) {
    }
  }
  c.flags.clear();
  c.unresolved = true;
  return c;
}

std::vector<Classification> classify_all(Classifier& classifier, const std::vector<Statement>& statements,
                                         const std::vector<Category>& categories, int threads) {
  std::vector<Classification> out(statements.size());
  std::vector<std::exception_ptr> errors(statements.size());
  const long n = static_cast<long>(statements.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, threads)) if (threads > 1)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = classifier.classify(statements[i], categories);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

AggregateReport aggregate(const std::vector<Classification>& classifications, const std::vector<Statement>& statements,
                          const StatementFilter& filter, const std::vector<std::string>& categories) {
  const auto idx = index_statements(statements);
  AggregateReport rep;
  for (const auto& id : categories) rep.categories.push_back({id, 0, 0, std::nullopt});
  CategoryFraction any{"any", 0, 0, std::nullopt};
  for (const auto& c : classifications) {
    const auto it = idx.find(c.ref);
    if (it == idx.end() || !filter.matches(*it->second)) continue;
    ++rep.matched;
    if (c.unresolved) {
      ++rep.unresolved;
      continue;
    }
    bool some = false;
    for (auto& cf : rep.categories) {
      const auto f = c.flags.find(cf.category);
      if (f == c.flags.end()) continue;
      ++cf.classified;
      if (f->second) {
        ++cf.flagged;
        some = true;
      }
    }
    ++any.classified;
    if (some) ++any.flagged;
  }
  for (auto& cf : rep.categories)
    if (cf.classified) cf.fraction = static_cast<double>(cf.flagged) / static_cast<double>(cf.classified);
  if (any.classified) {
    any.fraction = static_cast<double>(any.flagged) / static_cast<double>(any.classified);
    rep.any_flag = any;
  }
  return rep;
}

std::string render_aggregate(const AggregateReport& report, std::string_view title) {
  std::string out = std::string(title) + "\n";
  if (report.empty()) return out + "  no statements match this slice\n";
  out += "  statements: " + std::to_string(report.matched) + ", unresolved (excluded): " + std::to_string(report.unresolved) + "\n";
  auto line = [&](const CategoryFraction& cf) {
    char buf[160];
    if (cf.fraction) {
      std::snprintf(buf, sizeof buf, "  %-32s %5zu / %-5zu  %.3f\n", cf.category.c_str(), cf.flagged, cf.classified, *cf.fraction);
    } else {
      std::snprintf(buf, sizeof buf, "  %-32s %5zu / %-5zu  --\n", cf.category.c_str(), cf.flagged, cf.classified);
    }
    out += buf;
  };
  for (const auto& cf : report.categories) line(cf);
  if (report.any_flag) line(*report.any_flag);
  return out;
}

std::string encode_classification(const Classification& c) {
  json j;
  j["statement"] = {{"session_id", c.ref.session_id}, {"round", c.ref.round}, {"seat", std::string(to_string(c.ref.seat))}};
  j["backend"] = std::string(to_string(c.backend));
  j["unresolved"] = c.unresolved;
  json flags = json::object();
  for (const auto& [k, v] : c.flags) flags[k] = v;
  j["flags"] = flags;
  if (c.backend == ClassifierBackend::LLMJudge) {
    j["raw_judge_output"] = c.raw_judge_output;
    j["attempts"] = c.attempts;
  }
  return j.dump() + "\n";
}

Classification decode_classification(std::string_view line) {
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DecodeError("classification record is not a JSON object");
  try {
    Classification c;
    const auto& s = j.at("statement");
    c.ref = {s.at("session_id").get<std::string>(), s.at("round").get<int>(), parse_seat(s.at("seat").get<std::string>())};
    c.backend = parse_classifier_backend(j.at("backend").get<std::string>());
    c.unresolved = j.at("unresolved").get<bool>();
    for (const auto& [k, v] : j.at("flags").items()) c.flags[k] = v.get<bool>();
    if (j.contains("raw_judge_output")) c.raw_judge_output = j["raw_judge_output"].get<std::string>();
    if (j.contains("attempts")) c.attempts = j["attempts"].get<int>();
    return c;
  } catch (const json::exception& e) {
    throw DecodeError(std::string("bad classification record: ") + e.what());
  } catch (const UsageError& e) {
    throw DecodeError(std::string("bad classification record: ") + e.what());
  }
}

void append_classifications(const std::filesystem::path& path, const std::vector<Classification>& cs) {
  std::ofstream out(path, std::ios::app | std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for appending");
  for (const auto& c : cs) out << encode_classification(c);
  if (!out.flush()) throw ConfigError("write to " + path.string() + " failed");
}

std::vector<Classification> read_classifications(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::vector<Classification> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    out.push_back(decode_classification(line));
  }
  return out;
}

std::vector<std::size_t> review_sample(std::size_t population, std::size_t k, std::uint64_t seed) {
  if (k > population) throw UsageError("sample size exceeds the number of classifications");
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

std::string review_worksheet(const std::vector<Classification>& classifications, const std::vector<Statement>& statements,
                             const std::vector<std::string>& categories, std::size_t k, std::uint64_t seed) {
  const auto idx = index_statements(statements);
  std::vector<std::string> header = {"statement", "context", "text"};
  for (const auto& c : categories) {
    header.push_back("flag:" + c);
    header.push_back("verdict:" + c);
  }
  std::string out = csv_row(header);
  for (std::size_t i : review_sample(classifications.size(), k, seed)) {
    const auto& c = classifications[i];
    const auto it = idx.find(c.ref);
    std::vector<std::string> row = {c.ref.key(), it != idx.end() ? statement_context(*it->second) : "",
                                    it != idx.end() ? it->second->text : ""};
    for (const auto& cat : categories) {
      const auto f = c.flags.find(cat);
      row.push_back(c.unresolved ? "unresolved" : f == c.flags.end() ? "" : (f->second ? "true" : "false"));
      row.push_back("");
    }
    out += csv_row(row);
  }
  return out;
}

double AgreementReport::rate(const std::string& category) const {
  const auto it = per_category.find(category);
  if (it == per_category.end() || it->second.second == 0) throw UsageError("no reviewed verdicts for '" + category + "'");
  return static_cast<double>(it->second.first) / static_cast<double>(it->second.second);
}

AgreementReport ingest_worksheet(std::string_view csv) {
  const auto rows = csv_parse(csv);
  if (rows.empty()) throw DomainError("worksheet is empty");
  const auto& header = rows.front();
  std::vector<std::pair<std::size_t, std::string>> verdict_cols;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i].rfind("verdict:", 0) == 0) verdict_cols.emplace_back(i, header[i].substr(8));
  if (verdict_cols.empty()) throw DomainError("worksheet has no verdict columns");
  AgreementReport rep;
  for (const auto& [col, cat] : verdict_cols) rep.per_category[cat] = {0, 0};
  for (std::size_t r = 1; r < rows.size(); ++r) {
    ++rep.rows;
    for (const auto& [col, cat] : verdict_cols) {
      if (col >= rows[r].size()) continue;
      bool agree = false;
      if (!parse_verdict(rows[r][col], agree)) continue;
      auto& counts = rep.per_category[cat];
      ++counts.second;
      if (agree) ++counts.first;
    }
  }
  return rep;
}

}  // namespace gamelab
