#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "gamelab/chat_client.hpp"
#include "gamelab/game_core.hpp"
#include "gamelab/prompt_kit.hpp"
#include "gamelab/transcript.hpp"

namespace gamelab {

struct Category {
  std::string id;
  std::string description;
  GameKind scope = GameKind::Ultimatum;
  std::vector<std::string> patterns;  // keyword backend
  std::vector<std::string> excludes;
};

// INI-style catalog; see data/categories.catalog. Throws ConfigError.
std::vector<Category> parse_catalog(std::string_view text);
const std::vector<Category>& builtin_catalog();
std::vector<Category> select_categories(const std::vector<Category>& catalog, const std::vector<std::string>& ids);
std::vector<Category> categories_for(const std::vector<Category>& catalog, GameKind game);

struct StatementRef {
  std::string session_id;
  int round = 0;
  Seat seat = Seat::A;

  std::string key() const;  // "ug-SF-0003/3/B"
  auto operator<=>(const StatementRef&) const = default;
};

enum class DecisionKind { Propose, Accept, Reject, Cooperate, Defect };
std::string_view to_string(DecisionKind d);
DecisionKind parse_decision_kind(std::string_view s);

struct Statement {
  StatementRef ref;
  std::string text;
  GameKind game = GameKind::Ultimatum;
  Role role = Role::Proposer;
  Trait trait = Trait::Fair;
  Treatment treatment;
  int total_rounds = kDefaultRounds;
  DecisionKind decision = DecisionKind::Propose;
  std::optional<Dollars> offer;  // UG: the offer proposed or responded to
};

// One statement per recorded decision in complete or aborted sessions.
std::vector<Statement> extract_statements(const TranscriptSet& set);

// Conjunction of the set fields.
struct StatementFilter {
  std::optional<GameKind> game;
  std::set<int> rounds;
  std::optional<DecisionKind> decision;
  std::optional<Dollars> offer_at_most;
  std::optional<Dollars> offer_at_least;
  std::optional<Trait> trait;
  std::optional<Role> role;

  bool matches(const Statement& s) const;
};

std::vector<Statement> apply_filter(const std::vector<Statement>& statements, const StatementFilter& filter);

struct Preset {
  std::string name;
  StatementFilter filter;
  std::vector<std::string> categories;
};

const std::vector<Preset>& presets();
// Throws UsageError listing the known presets.
const Preset& find_preset(std::string_view name);

enum class ClassifierBackend { Keyword, LLMJudge };
std::string_view to_string(ClassifierBackend b);
ClassifierBackend parse_classifier_backend(std::string_view s);

struct Classification {
  StatementRef ref;
  ClassifierBackend backend = ClassifierBackend::Keyword;
  std::map<std::string, bool> flags;  // exactly the requested categories
  bool unresolved = false;
  std::string raw_judge_output;       // judge only: last reply
  int attempts = 0;                   // judge only
};

class Classifier {
 public:
  virtual ~Classifier() = default;
  // Empty categories give empty flags without any work; an empty statement is a UsageError.
  virtual Classification classify(const Statement& statement, const std::vector<Category>& categories) = 0;
};

class KeywordClassifier final : public Classifier {
 public:
  Classification classify(const Statement& statement, const std::vector<Category>& categories) override;
  // Lowercase-insensitive match after whitespace normalization and exclusion blanking.
  static bool matches(std::string_view text, const Category& category);
};

struct JudgeConfig {
  std::string model;
  double temperature = 0.0;
  int max_attempts = 3;
};

class JudgeClassifier final : public Classifier {
 public:
  // Throws ConfigError when no model is configured.
  JudgeClassifier(std::shared_ptr<ChatClient> chat, JudgeConfig config);
  Classification classify(const Statement& statement, const std::vector<Category>& categories) override;

 private:
  std::shared_ptr<ChatClient> chat_;
  JudgeConfig config_;
};

// e.g. "a reasoning statement provided by a proposer in a multi-round ultimatum game"
std::string statement_context(const Statement& s);
PromptPair render_judge_prompt(const Statement& s, const std::vector<Category>& categories);
// Flat boolean object with exactly the requested ids; throws MalformedDecision otherwise.
std::map<std::string, bool> parse_judge_reply(std::string_view raw, const std::vector<Category>& categories);

// Classifies statements in order; concurrent when `threads` > 1.
std::vector<Classification> classify_all(Classifier& classifier, const std::vector<Statement>& statements,
                                         const std::vector<Category>& categories, int threads = 1);

struct CategoryFraction {
  std::string category;
  std::size_t flagged = 0;
  std::size_t classified = 0;  // resolved only
  std::optional<double> fraction;
};

struct AggregateReport {
  std::size_t matched = 0;     // statements after filtering
  std::size_t unresolved = 0;  // excluded from denominators
  std::vector<CategoryFraction> categories;
  std::optional<CategoryFraction> any_flag;  // share with at least one flag set

  bool empty() const { return matched == 0; }
};

// Joins classifications to statements by ref, applies the filter, then counts.
AggregateReport aggregate(const std::vector<Classification>& classifications, const std::vector<Statement>& statements,
                          const StatementFilter& filter, const std::vector<std::string>& categories);
std::string render_aggregate(const AggregateReport& report, std::string_view title);

// Classification store: one JSON object per line.
std::string encode_classification(const Classification& c);
Classification decode_classification(std::string_view line);
void append_classifications(const std::filesystem::path& path, const std::vector<Classification>& cs);
std::vector<Classification> read_classifications(const std::filesystem::path& path);

// Review worksheet: seeded sample without replacement, one row per statement
// with the machine flags and blank verdict columns.
std::vector<std::size_t> review_sample(std::size_t population, std::size_t k, std::uint64_t seed);
std::string review_worksheet(const std::vector<Classification>& classifications, const std::vector<Statement>& statements,
                             const std::vector<std::string>& categories, std::size_t k, std::uint64_t seed);

struct AgreementReport {
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_category;  // agree, reviewed
  std::size_t rows = 0;
  double rate(const std::string& category) const;
};

// Verdict cells accept agree/disagree, yes/no, y/n, 1/0, true/false; blanks are skipped.
AgreementReport ingest_worksheet(std::string_view csv);

}  // namespace gamelab
