// Acceptance checks. One line per criterion: "ACCEPTANCE n: PASS|FAIL|SKIP <detail>".
// Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gamelab/game_core.hpp"
#include "gamelab/prompt_kit.hpp"
#include "gamelab/reasoning_lab.hpp"
#include "gamelab/runner.hpp"
#include "gamelab/stats.hpp"
#include "gamelab/tables.hpp"
#include "gamelab/validate.hpp"
#include "logit_grid.hpp"
#include "test_util.hpp"

using namespace gamelab;
using json = nlohmann::json;

namespace {

// Pinned tolerances and budgets.
constexpr double kPromptBudgetS = 1.0;
constexpr double kPayoffBudgetS = 1.0;
constexpr double kOlsTol = 1e-9;
constexpr double kLogitGridTol = 1e-3;
constexpr double kScaleTol = 1e-10;
constexpr double kRegressionBudgetS = 10.0;
constexpr double kOfferSEs = 3.0;
constexpr double kPipelineBudgetS = 60.0;
constexpr double kCoopTol = 0.05;
constexpr std::size_t kCoopMinCell = 50;
constexpr double kReasoningBudgetS = 1.0;
constexpr std::uint64_t kSeed = 20231116;

const std::filesystem::path kTests(GAMELAB_TEST_DIR);

struct Verdict {
  enum Kind { Pass, Fail, Skip } kind = Pass;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::string fmt(double v, int prec = 4) {
  std::ostringstream ss;
  ss.precision(prec);
  ss << std::fixed << v;
  return ss.str();
}

// Corpora generated here, validated together by criterion 8.
std::vector<std::pair<std::string, TranscriptSet>> g_corpora;
testutil::TempDir g_dir("acceptance");

TranscriptSet generate(const std::string& name, ExperimentPlan plan, ExecutionMode mode = ExecutionMode::Parallel) {
  plan.output = g_dir / (name + ".jsonl");
  plan.timestamps = false;
  RunOptions opt;
  opt.mode = mode;
  run_experiment(plan, opt);
  auto set = read_transcript_file(plan.output);
  g_corpora.emplace_back(name, set);
  return set;
}

std::string normalize(std::string s) {
  std::string out;
  for (char c : s) {
    if (c != '\r') out += c;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

Verdict prompt_fidelity() {
  Timer t;
  const json manifest = json::parse(testutil::slurp(kTests / "golden" / "manifest.json"));
  const int total = manifest.at("total_rounds");
  std::size_t cases = 0, equal = 0;
  bool ug = false, pd = false, first = false, later = false, fair = false, selfish = false;
  for (const auto& c : manifest.at("cases")) {
    Treatment tr;
    tr.game = parse_game(c.at("game").get<std::string>());
    const std::string code = c.at("treatment");
    tr.seat_a = code[0] == 'F' ? Trait::Fair : Trait::Selfish;
    tr.seat_b = code[1] == 'F' ? Trait::Fair : Trait::Selfish;
    auto state = SessionState::fresh(tr, total);
    int k = 1;
    for (const auto& h : c.at("history")) {
      if (tr.game == GameKind::Ultimatum) {
        state = apply_round(state, make_ultimatum_round(k++, Dollars::parse(h.at("offer").get<std::string>()),
                                                        parse_response(h.at("response").get<std::string>())));
      } else {
        state = apply_round(state, make_pd_round(k++, parse_move(h.at("a").get<std::string>()),
                                                 parse_move(h.at("b").get<std::string>())));
      }
    }
    const Seat seat = parse_seat(c.at("seat").get<std::string>());
    std::optional<Dollars> pending;
    if (!c.at("pending_offer").is_null()) pending = Dollars::parse(c.at("pending_offer").get<std::string>());
    const auto p = render_prompt(state, viewpoint_for(tr, seat), pending);
    ++cases;
    equal += normalize(p.system) == normalize(testutil::slurp(kTests / "golden" / c.at("system").get<std::string>())) &&
             normalize(p.user) == normalize(testutil::slurp(kTests / "golden" / c.at("user").get<std::string>()));
    (tr.game == GameKind::Ultimatum ? ug : pd) = true;
    (state.current_round() == 1 ? first : later) = true;
    (tr.trait(seat) == Trait::Fair ? fair : selfish) = true;
  }
  const double s = t.seconds();
  const bool coverage = ug && pd && first && later && fair && selfish && cases >= 20;
  const bool ok = coverage && equal == cases && s < kPromptBudgetS;
  return {ok ? Verdict::Pass : Verdict::Fail, std::to_string(equal) + "/" + std::to_string(cases) +
                                                  " golden prompts identical, coverage " + (coverage ? "ok" : "missing") +
                                                  ", " + fmt(s, 3) + " s"};
}

Verdict payoffs() {
  Timer t;
  // Hand table: both cooperate 200 each, lone cooperator 0 vs 300, both defect 100 each.
  const int table[2][2][2] = {{{200, 200}, {0, 300}}, {{300, 0}, {100, 100}}};
  int matrix_ok = 0;
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) {
      const auto [pa, pb] = pd_payoffs(a ? Move::Defect : Move::Cooperate, b ? Move::Defect : Move::Cooperate);
      matrix_ok += pa == Dollars::whole(table[a][b][0]) && pb == Dollars::whole(table[a][b][1]);
    }
  }
  std::mt19937_64 gen(kSeed);
  std::uniform_int_distribution<std::int64_t> cents(0, 10000);
  int conserved = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto offer = Dollars::from_cents(cents(gen));
    const auto [p, r] = ultimatum_payoffs(offer, Response::Accept);
    const auto [p0, r0] = ultimatum_payoffs(offer, Response::Reject);
    conserved += p + r == kPie && r == offer && p0 == Dollars{} && r0 == Dollars{};
  }
  const double s = t.seconds();
  const bool ok = matrix_ok == 4 && conserved == 10000 && s < kPayoffBudgetS;
  return {ok ? Verdict::Pass : Verdict::Fail, "PD cells " + std::to_string(matrix_ok) + "/4, UG conservation " +
                                                  std::to_string(conserved) + "/10000, " + fmt(s, 3) + " s"};
}

Design design_of(const std::vector<std::string>& names, const std::vector<std::vector<double>>& rows) {
  return make_design(names, rows);
}

Verdict regression_engine() {
  Timer t;
  double worst_ols = 0;
  auto track = [&](double got, double want) { worst_ols = std::max(worst_ols, std::abs(got - want)); };
  {  // y = 2x + 1 exactly
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    for (int i = 0; i < 5; ++i) {
      rows.push_back({double(i), 1.0});
      y.push_back(2.0 * i + 1.0);
    }
    const auto r = ols(y, design_of({"x", "constant"}, rows));
    track(r.coef("x"), 2.0);
    track(r.coef("constant"), 1.0);
  }
  {  // three points: normal equations give slope 3/2, intercept 5/6
    const auto r = ols(std::vector<double>{1, 2, 4}, design_of({"x", "constant"}, {{0, 1}, {1, 1}, {2, 1}}));
    track(r.coef("x"), 1.5);
    track(r.coef("constant"), 5.0 / 6.0);
  }
  {  // balanced 2x2 with cell means 1, 2.5, 2, 4: main effects from marginal means
    std::vector<std::vector<double>> rows;
    std::vector<double> y;
    const double mean[2][2] = {{1.0, 2.5}, {2.0, 4.0}};
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        for (double e : {-0.5, 0.5}) {
          rows.push_back({double(a), double(b), 1.0});
          y.push_back(mean[a][b] + e);
        }
    const auto r = ols(y, design_of({"a", "b", "constant"}, rows));
    track(r.coef("a"), 1.25);
    track(r.coef("b"), 1.75);
    track(r.coef("constant"), 0.875);
  }

  double worst_logit = 0;
  int grids = 0;
  std::mt19937 gen(kSeed);
  std::uniform_real_distribution<double> ud(-2, 2);
  for (int trial = 0; trial < 40 && grids < 6; ++trial) {
    const int n = 6 + trial % 3;
    std::vector<double> y(n);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
      const double x = ud(gen);
      rows.push_back({x, 1.0});
      y[i] = ud(gen) + 0.8 * x > 0 ? 1.0 : 0.0;
    }
    const auto d = design_of({"x", "constant"}, rows);
    RegressionResult r;
    try {
      r = logit(y, d);
    } catch (const DomainError&) {
      continue;
    }
    if (r.separation) continue;
    const auto [beta, ll] = testutil::grid_logit_2d(y, d.x);
    worst_logit = std::max({worst_logit, std::abs(r.coef("x") - beta[0]), std::abs(r.coef("constant") - beta[1])});
    ++grids;
  }

  double worst_scale = 0;
  {
    std::normal_distribution<double> nd;
    std::vector<std::vector<double>> rows, scaled;
    std::vector<double> y;
    for (int i = 0; i < 50; ++i) {
      const double a = nd(gen), b = nd(gen);
      rows.push_back({a, b, 1.0});
      scaled.push_back({a * 1000.0, b, 1.0});
      y.push_back(0.3 * a - 2 * b + 1 + nd(gen));
    }
    const auto r1 = ols(y, design_of({"a", "b", "constant"}, rows));
    const auto r2 = ols(y, design_of({"a", "b", "constant"}, scaled));
    worst_scale = std::max({std::abs(r2.coef("a") * 1000.0 - r1.coef("a")) / std::abs(r1.coef("a")),
                            std::abs(r2.se("a") * 1000.0 - r1.se("a")) / r1.se("a"),
                            std::abs(r2.coef("b") - r1.coef("b")), std::abs(r2.coef("constant") - r1.coef("constant"))});
  }
  const double s = t.seconds();
  const bool ok = worst_ols <= kOlsTol && grids >= 5 && worst_logit <= kLogitGridTol && worst_scale <= kScaleTol &&
                  s < kRegressionBudgetS;
  std::ostringstream d;
  d << "OLS max error " << worst_ols << ", logit vs grid max diff " << worst_logit << " over " << grids
    << " datasets, scale equivariance " << worst_scale << ", " << fmt(s, 2) << " s";
  return {ok ? Verdict::Pass : Verdict::Fail, d.str()};
}

Verdict ug_identifiability() {
  Timer t;
  ExperimentPlan plan;
  plan.game = GameKind::Ultimatum;
  plan.sessions_per_treatment = 100;
  plan.seed_base = kSeed;
  plan.seat_a.backend = plan.seat_b.backend = Backend::Statistical;
  plan.stat.offer.constant = 45.0;
  plan.stat.offer.round = -1.5;
  plan.stat.offer.proposer_selfish = -10.0;
  plan.stat.offer.responder_selfish = -2.0;
  const auto set = generate("ug_statistical", plan);
  const auto t3 = ug_regressions(set);
  if (!t3.offer) return {Verdict::Fail, "offer regression missing"};
  const std::pair<const char*, double> truth[] = {
      {"constant", 45.0}, {"round", -1.5}, {"proposer_selfish", -10.0}, {"responder_selfish", -2.0}};
  bool ok = set.count(SessionStatus::Complete) == 400;
  std::ostringstream d;
  d << set.count(SessionStatus::Complete) << " sessions;";
  for (const auto& [name, want] : truth) {
    const double z = (t3.offer->coef(name) - want) / t3.offer->se(name);
    ok &= std::abs(z) <= kOfferSEs;
    d << " " << name << " " << fmt(t3.offer->coef(name), 3) << " (" << fmt(z, 2) << " SE)";
  }
  const double s = t.seconds();
  ok &= s < kPipelineBudgetS;
  d << ", " << fmt(s, 2) << " s";
  return {ok ? Verdict::Pass : Verdict::Fail, d.str()};
}

Verdict pd_identifiability() {
  Timer t;
  ExperimentPlan plan;
  plan.game = GameKind::PrisonersDilemma;
  plan.sessions_per_treatment = 100;
  plan.seed_base = kSeed;
  plan.seat_a.backend = plan.seat_b.backend = Backend::Statistical;
  const auto set = generate("pd_statistical", plan);
  const auto t5 = conditional_coop(set);
  const double fair[4] = {0.994, 0.023, 0.750, 0.057};
  const double selfish[4] = {0.629, 0.052, 0.104, 0.089};
  bool ok = set.count(SessionStatus::Complete) == 300;
  int assessed = 0;
  std::ostringstream d;
  for (const auto& row : t5.rows) {
    const double* want = row.trait == Trait::Fair ? fair : selfish;
    d << (row.trait == Trait::Fair ? " fair" : " selfish");
    for (std::size_t c = 0; c < 4; ++c) {
      d << " " << to_string(kOutcomes[c]) << "=";
      if (row.counts[c] < kCoopMinCell || !row.given[c]) {
        d << "n" << row.counts[c] << "(skip)";
        continue;
      }
      ++assessed;
      const double diff = row.given[c]->value - want[c];
      ok &= std::abs(diff) <= kCoopTol;
      d << fmt(row.given[c]->value, 3) << "/n" << row.counts[c];
    }
  }
  const double s = t.seconds();
  ok &= assessed > 0 && s < kPipelineBudgetS;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(assessed) + " cells assessed:" + d.str() + ", " + fmt(s, 2) + " s"};
}

Verdict tit_for_tat() {
  ExperimentPlan plan;
  plan.game = GameKind::PrisonersDilemma;
  plan.sessions_per_treatment = 2;
  plan.seat_a.script = {"tft"};
  plan.seat_b.script = {"d"};
  const auto set = generate("pd_tft_vs_defect", plan, ExecutionMode::Serial);
  bool ok = set.sessions.size() == 6;
  for (const auto& tr : set.sessions) {
    ok &= tr.entries.size() == 5;
    for (std::size_t i = 0; i < tr.entries.size(); ++i) {
      const auto [a, b] = round_payoffs(tr.entries[i].record);
      const int wa = i == 0 ? 0 : 100;
      const int wb = i == 0 ? 300 : 100;
      ok &= a == Dollars::whole(wa) && b == Dollars::whole(wb);
    }
  }
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(set.sessions.size()) + " sessions, expected (0,300) then (100,100) x4"};
}

Verdict reasoning_fixtures() {
  Timer t;
  const json fx = json::parse(testutil::slurp(kTests / "fixtures" / "reasoning_exemplars.json"));
  KeywordClassifier kw;
  int counted = 0, passed = 0;
  std::string failures;
  for (const auto& e : fx.at("statements")) {
    if (!e.value("counted", false)) continue;
    ++counted;
    Statement s;
    s.ref = {e.at("id").get<std::string>(), e.at("round").get<int>(), Seat::B};
    s.text = e.at("text");
    s.game = parse_game(e.at("game").get<std::string>());
    s.role = e.at("role") == "responder" ? Role::Responder : Role::PDPlayer1;
    s.treatment = {s.game, Trait::Fair, Trait::Fair};
    s.decision = parse_decision_kind(e.at("decision").get<std::string>());
    std::vector<std::string> ids;
    for (const auto& [k, v] : e.at("expect").items()) ids.push_back(k);
    const auto c = kw.classify(s, select_categories(builtin_catalog(), ids));
    bool ok = true;
    for (const auto& [k, v] : e.at("expect").items()) ok &= c.flags.at(k) == v.get<bool>();
    passed += ok;
    if (!ok) failures += " " + s.ref.session_id;
  }
  const double s = t.seconds();
  const bool ok = counted == 9 && passed == 9 && s < kReasoningBudgetS;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::to_string(passed) + "/" + std::to_string(counted) + " exemplars" +
              (failures.empty() ? "" : " (failed:" + failures + ")") + ", " + fmt(s, 3) + " s"};
}

Verdict information_hygiene() {
  // One more corpus with remote seats fed by a local fake, so the audit sees real prompts with reasoning text.
  ExperimentPlan plan;
  plan.game = GameKind::PrisonersDilemma;
  plan.sessions_per_treatment = 5;
  plan.seat_a.backend = plan.seat_b.backend = Backend::Remote;
  plan.seat_a.model_id = plan.seat_b.model_id = "offline-fake";
  plan.output = g_dir / "pd_fake_remote.jsonl";
  plan.timestamps = false;
  std::atomic<int> counter{0};
  RunOptions opt;
  opt.chat = std::make_shared<testutil::FakeChat>([&](const ChatRequest&) {
    const int n = counter++;
    return render_envelope("distinctive reasoning number " + std::to_string(n) + " for the audit",
                           n % 3 ? "cooperate" : "defect");
  });
  run_experiment(plan, opt);
  g_corpora.emplace_back("pd_fake_remote", read_transcript_file(plan.output));

  ExperimentPlan ug = plan;
  ug.game = GameKind::Ultimatum;
  ug.output = g_dir / "ug_fake_remote.jsonl";
  RunOptions ug_opt;
  ug_opt.chat = std::make_shared<testutil::FakeChat>([&](const ChatRequest& req) {
    const int n = counter++;
    const bool proposer = req.messages.back().content.find("If you reject") == std::string::npos;
    return render_envelope("distinctive reasoning number " + std::to_string(n) + " for the audit",
                           proposer ? format_proposal(Dollars::whole(60), Dollars::whole(40))
                                    : (n % 4 ? "accept" : "reject"));
  });
  run_experiment(ug, ug_opt);
  g_corpora.emplace_back("ug_fake_remote", read_transcript_file(ug.output));

  std::size_t checked = 0, violations = 0;
  std::string detail;
  for (const auto& [name, set] : g_corpora) {
    const auto rep = validate_transcripts(set);
    checked += rep.sessions_checked;
    violations += rep.violations.size();
    for (const auto& t : set.sessions) violations += audit_information_flow(t).size();
    detail += " " + name + "=" + std::to_string(rep.sessions_checked);
  }
  const bool ok = violations == 0 && checked > 0 && g_corpora.size() >= 5;
  return {ok ? Verdict::Pass : Verdict::Fail, std::to_string(violations) + " violations over " +
                                                  std::to_string(checked) + " sessions:" + detail};
}

Verdict live_mode() {
  const char* key = std::getenv(kDefaultApiKeyEnv);
  if (!key || !*key) return {Verdict::Skip, std::string(kDefaultApiKeyEnv) + " not set; live sign checks skipped"};
  const char* per = std::getenv("GAMELAB_LIVE_SESSIONS");
  const int sessions = per ? std::max(1, std::atoi(per)) : 10;
  auto base = [&](GameKind game) {
    ExperimentPlan p;
    p.game = game;
    p.sessions_per_treatment = sessions;
    p.seed_base = kSeed;
    p.seat_a.backend = p.seat_b.backend = Backend::Remote;
    p.seat_a.model_id = p.seat_b.model_id = "gpt-4-1106-preview";
    if (const char* m = std::getenv("GAMELAB_LIVE_MODEL")) p.seat_a.model_id = p.seat_b.model_id = m;
    return p;
  };
  const auto ug = generate("live_ug", base(GameKind::Ultimatum));
  const auto pd = generate("live_pd", base(GameKind::PrisonersDilemma));

  const auto t3 = ug_regressions(ug);
  const bool fair_higher = t3.offer && t3.offer->coef("proposer_selfish") < 0;
  const bool offer_lowers_rejection = t3.rejection && t3.rejection->coef("offered_amount") < 0;
  const auto series = pd_outcome_rates(pd);
  double ff = -1, others = 0;
  for (const auto& r : series) {
    if (!r.rate_c) continue;
    if (r.treatment.code() == "FF") ff = r.rate_c->value;
    else others = std::max(others, r.rate_c->value);
  }
  const bool ff_highest = ff > others;
  const bool ok = fair_higher && offer_lowers_rejection && ff_highest;
  return {ok ? Verdict::Pass : Verdict::Fail,
          std::string("fair offers exceed selfish: ") + (fair_higher ? "yes" : "no") +
              ", rejection falls with offer: " + (offer_lowers_rejection ? "yes" : "no") +
              ", fair-fair cooperation highest: " + (ff_highest ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<int, std::function<Verdict()>>> criteria = {
      {1, prompt_fidelity}, {2, payoffs},     {3, regression_engine},   {4, ug_identifiability},
      {5, pd_identifiability}, {6, tit_for_tat}, {7, reasoning_fixtures}, {8, information_hygiene},
      {9, live_mode}};
  int failures = 0;
  for (const auto& [n, fn] : criteria) {
    Verdict o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* label = o.kind == Verdict::Pass ? "PASS" : o.kind == Verdict::Fail ? "FAIL" : "SKIP";
    failures += o.kind == Verdict::Fail;
    std::cout << "ACCEPTANCE " << n << ": " << label << " " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
