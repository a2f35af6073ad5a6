#include <doctest.h>

#include <json.hpp>

#include "gamelab/csv.hpp"
#include "gamelab/reasoning_lab.hpp"
#include "gamelab/runner.hpp"
#include "test_util.hpp"

using namespace gamelab;
using json = nlohmann::json;

namespace {

Statement make_statement(const json& e) {
  Statement s;
  s.ref = {std::string(e.at("id")), e.at("round").get<int>(), Seat::B};
  s.text = e.at("text");
  s.game = parse_game(e.at("game").get<std::string>());
  s.role = e.at("role") == "responder" ? Role::Responder : Role::PDPlayer1;
  s.treatment = {s.game, Trait::Fair, Trait::Fair};
  s.decision = parse_decision_kind(e.at("decision").get<std::string>());
  if (!e.at("offer").is_null()) s.offer = Dollars::parse(e.at("offer").get<std::string>());
  return s;
}

json exemplars() {
  return json::parse(testutil::slurp(std::filesystem::path(GAMELAB_TEST_DIR) / "fixtures" / "reasoning_exemplars.json"));
}

Statement simple(const std::string& id, const std::string& text, int round = 1) {
  Statement s;
  s.ref = {id, round, Seat::A};
  s.text = text;
  s.game = GameKind::PrisonersDilemma;
  s.role = Role::PDPlayer1;
  s.treatment = {GameKind::PrisonersDilemma, Trait::Fair, Trait::Fair};
  s.decision = DecisionKind::Cooperate;
  return s;
}

const std::vector<Category>& pd_round1_categories() {
  static const auto cats = select_categories(builtin_catalog(), {"reputation_building", "altruism"});
  return cats;
}

}  // namespace

TEST_CASE("built-in catalog") {
  const auto& cat = builtin_catalog();
  CHECK(cat.size() == 9);
  for (const auto& c : cat) {
    CHECK_FALSE(c.description.empty());
    CHECK_FALSE(c.patterns.empty());
  }
  CHECK(categories_for(cat, GameKind::Ultimatum).size() == 4);
  CHECK(categories_for(cat, GameKind::PrisonersDilemma).size() == 5);
  CHECK_THROWS_AS(select_categories(cat, {"no_such"}), UsageError);
}

TEST_CASE("catalog parsing errors") {
  CHECK_THROWS_AS(parse_catalog("[x]\nscope = ug\npattern = (unclosed\n"), ConfigError);
  CHECK_THROWS_AS(parse_catalog("pattern = before any section\n"), ConfigError);
  const auto c = parse_catalog("[x]\nscope = pd\ndescription = d\npattern = abc\nexclude = not abc\n");
  REQUIRE(c.size() == 1);
  CHECK(c[0].scope == GameKind::PrisonersDilemma);
}

TEST_CASE("keyword backend on the exemplar statements") {
  KeywordClassifier kw;
  for (const auto& e : exemplars().at("statements")) {
    const auto s = make_statement(e);
    CAPTURE(s.ref.session_id);
    std::vector<std::string> ids;
    for (const auto& [k, v] : e.at("expect").items()) ids.push_back(k);
    const auto cats = select_categories(builtin_catalog(), ids);
    const auto c = kw.classify(s, cats);
    for (const auto& [k, v] : e.at("expect").items()) {
      CAPTURE(k);
      CHECK(c.flags.at(k) == v.get<bool>());
    }
    if (e.value("any_flag", false)) {
      const auto all = kw.classify(s, select_categories(builtin_catalog(), {"je1_simultaneous_response",
                                                                         "je2_mutual_defection_risk",
                                                                         "je3_final_round_retaliation"}));
      bool any = false;
      for (const auto& [k, v] : all.flags) any |= v;
      CHECK(any);
    }
  }
}

TEST_CASE("keyword matching details") {
  Category c;
  c.id = "t";
  c.patterns = {"future\\s+rounds"};
  c.excludes = {"no future rounds"};
  CHECK(KeywordClassifier::matches("better in FUTURE\n rounds", c));
  CHECK_FALSE(KeywordClassifier::matches("there are no future rounds", c));
  CHECK(KeywordClassifier::matches("there are no future rounds, but future rounds matter", c));
  KeywordClassifier kw;
  CHECK(kw.classify(simple("a", "text"), {}).flags.empty());
  CHECK_THROWS_AS(kw.classify(simple("a", ""), pd_round1_categories()), UsageError);
}

TEST_CASE("judge: well-formed reply") {
  auto chat = std::make_shared<testutil::FakeChat>(
      std::vector<std::string>{R"(```json
{"reputation_building": true, "altruism": false}
```)"});
  JudgeClassifier judge(chat, {"judge-model"});
  const auto c = judge.classify(simple("s1", "trust now pays later"), pd_round1_categories());
  CHECK_FALSE(c.unresolved);
  CHECK(c.flags.at("reputation_building"));
  CHECK_FALSE(c.flags.at("altruism"));
  CHECK(c.attempts == 1);
  REQUIRE(chat->requests.size() == 1);
  CHECK(chat->requests[0].model == "judge-model");
  CHECK(chat->requests[0].temperature == 0.0);
  const auto& user = chat->requests[0].messages.back().content;
  CHECK(user.find("trust now pays later") != std::string::npos);
  CHECK(user.find("reputation_building") != std::string::npos);
}

TEST_CASE("judge: unresolved after three bad replies") {
  auto chat = std::make_shared<testutil::FakeChat>(std::vector<std::string>{
      "yes", R"({"reputation_building": "yes", "altruism": false})", R"({"reputation_building": true})"});
  JudgeClassifier judge(chat, {"judge-model"});
  const auto c = judge.classify(simple("s1", "text"), pd_round1_categories());
  CHECK(c.unresolved);
  CHECK(c.attempts == 3);
  CHECK(c.raw_judge_output == R"({"reputation_building": true})");
  CHECK(chat->requests.size() == 3);
  CHECK(chat->requests[1].messages.back().content.find(kFormatReminder) != std::string::npos);
}

TEST_CASE("judge: transport failure is unresolved; empty categories make no call") {
  auto chat = std::make_shared<testutil::FakeChat>(std::vector<std::string>{});
  JudgeClassifier judge(chat, {"judge-model"});
  CHECK(judge.classify(simple("s1", "text"), pd_round1_categories()).unresolved);
  const auto before = chat->requests.size();
  const auto c = judge.classify(simple("s2", "text"), {});
  CHECK(c.flags.empty());
  CHECK_FALSE(c.unresolved);
  CHECK(chat->requests.size() == before);
  CHECK_THROWS_AS(JudgeClassifier(chat, {""}), ConfigError);
}

TEST_CASE("judge reply parsing is strict") {
  const auto& cats = pd_round1_categories();
  CHECK(parse_judge_reply(R"({"altruism": true, "reputation_building": false})", cats).at("altruism"));
  CHECK_THROWS(parse_judge_reply(R"({"altruism": true, "reputation_building": false, "extra": true})", cats));
  CHECK_THROWS(parse_judge_reply(R"({"altruism": 1, "reputation_building": false})", cats));
  CHECK_THROWS(parse_judge_reply("none", cats));
}

TEST_CASE("statement context and judge prompt") {
  Statement s = simple("ug-SF-0001", "text", 3);
  s.game = GameKind::Ultimatum;
  s.role = Role::Responder;
  s.decision = DecisionKind::Reject;
  s.offer = Dollars::whole(25);
  const auto ctx = statement_context(s);
  CHECK(ctx.find("responder") != std::string::npos);
  CHECK(ctx.find("round 3 of 5") != std::string::npos);
  CHECK(ctx.find("25 dollars") != std::string::npos);
  const auto p = render_judge_prompt(s, select_categories(builtin_catalog(), {"diminishing_offers"}));
  CHECK(p.user.find(ctx) != std::string::npos);
  CHECK(p.user.find("diminishing_offers") != std::string::npos);
  CHECK(p.user.find('[') == std::string::npos);
}

TEST_CASE("statement extraction and filters") {
  ExperimentPlan plan;
  plan.sessions_per_treatment = 2;
  plan.timestamps = false;
  plan.seat_a.script = {"40", "35", "25", "25", "25"};
  plan.seat_b.script = {"atleast:30"};
  MemorySink sink;
  TranscriptSet set;
  set.sessions = run_sessions(plan, plan_jobs(plan), sink, ExecutionMode::Serial);
  const auto all = extract_statements(set);
  CHECK(all.size() == 8 * 5 * 2);
  const auto& preset = find_preset("ug-round3-rejections");
  const auto slice = apply_filter(all, preset.filter);
  CHECK(slice.size() == 8);
  for (const auto& s : slice) {
    CHECK(s.decision == DecisionKind::Reject);
    CHECK(s.ref.round == 3);
    CHECK(s.offer == Dollars::whole(25));
  }
  StatementFilter low;
  low.decision = DecisionKind::Accept;
  low.offer_at_most = Dollars::whole(35);
  CHECK(apply_filter(all, low).size() == 8);
  CHECK_THROWS_AS(find_preset("nope"), UsageError);
  CHECK(presets().size() == 6);
}

TEST_CASE("aggregation: 8 of 10 flagged, unresolved excluded") {
  std::vector<Statement> statements;
  std::vector<Classification> cs;
  for (int i = 0; i < 11; ++i) {
    statements.push_back(simple("s" + std::to_string(i), "t"));
    Classification c;
    c.ref = statements.back().ref;
    c.flags = {{"reputation_building", i < 8}, {"altruism", false}};
    c.unresolved = i == 10;
    cs.push_back(c);
  }
  const auto rep = aggregate(cs, statements, {}, {"reputation_building", "altruism"});
  CHECK(rep.matched == 11);
  CHECK(rep.unresolved == 1);
  CHECK(rep.categories[0].flagged == 8);
  CHECK(rep.categories[0].classified == 10);
  CHECK(*rep.categories[0].fraction == doctest::Approx(0.8));
  CHECK(*rep.categories[1].fraction == 0.0);
  CHECK(*rep.any_flag->fraction == doctest::Approx(0.8));
  CHECK(render_aggregate(rep, "title").find("title") != std::string::npos);
  const auto empty = aggregate(cs, {}, {}, {"altruism"});
  CHECK(empty.empty());
}

TEST_CASE("classification store round trip") {
  testutil::TempDir dir("store");
  Classification c;
  c.ref = {"pd-FF-0001", 2, Seat::B};
  c.backend = ClassifierBackend::LLMJudge;
  c.flags = {{"altruism", true}};
  c.raw_judge_output = "{\"altruism\": true}";
  c.attempts = 2;
  append_classifications(dir / "c.jsonl", {c, c});
  const auto back = read_classifications(dir / "c.jsonl");
  REQUIRE(back.size() == 2);
  CHECK(back[0].ref == c.ref);
  CHECK(back[0].flags == c.flags);
  CHECK(back[0].attempts == 2);
  CHECK(decode_classification(encode_classification(c)).raw_judge_output == c.raw_judge_output);
}

TEST_CASE("review worksheet: seeded, deterministic, ingest") {
  const auto a = review_sample(100, 10, 7);
  CHECK(a == review_sample(100, 10, 7));
  CHECK(a != review_sample(100, 10, 8));
  std::set<std::size_t> uniq(a.begin(), a.end());
  CHECK(uniq.size() == 10);
  CHECK_THROWS_AS(review_sample(5, 6, 1), UsageError);

  std::vector<Statement> statements;
  std::vector<Classification> cs;
  for (int i = 0; i < 20; ++i) {
    statements.push_back(simple("s" + std::to_string(i), "text " + std::to_string(i)));
    Classification c;
    c.ref = statements.back().ref;
    c.flags = {{"altruism", i % 2 == 0}};
    cs.push_back(c);
  }
  const auto ws = review_worksheet(cs, statements, {"altruism"}, 5, 3);
  CHECK(ws == review_worksheet(cs, statements, {"altruism"}, 5, 3));
  auto rows = csv_parse(ws);
  REQUIRE(rows.size() == 6);
  const auto& header = rows[0];
  const auto col = std::find(header.begin(), header.end(), "verdict:altruism") - header.begin();
  REQUIRE(col < static_cast<long>(header.size()));
  for (std::size_t r = 1; r < rows.size(); ++r) rows[r][col] = r % 2 ? "agree" : "yes";
  std::string filled;
  for (const auto& r : rows) filled += csv_row(r);
  const auto rep = ingest_worksheet(filled);
  CHECK(rep.rows == 5);
  CHECK(rep.rate("altruism") == 1.0);
  rows[1][col] = "disagree";
  filled.clear();
  for (const auto& r : rows) filled += csv_row(r);
  CHECK(ingest_worksheet(filled).rate("altruism") == doctest::Approx(0.8));
}
