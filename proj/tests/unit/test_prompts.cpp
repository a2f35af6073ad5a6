#include <doctest.h>

#include <json.hpp>

#include "gamelab/errors.hpp"
#include "gamelab/prompt_kit.hpp"
#include "test_util.hpp"

using namespace gamelab;
using json = nlohmann::json;

namespace {

const std::filesystem::path kGolden = std::filesystem::path(GAMELAB_TEST_DIR) / "golden";

std::string normalize(std::string s) {
  std::string out;
  for (char c : s) {
    if (c != '\r') out += c;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

Treatment treatment_of(const json& c) {
  Treatment t;
  t.game = parse_game(c.at("game").get<std::string>());
  const auto code = c.at("treatment").get<std::string>();
  t.seat_a = code[0] == 'F' ? Trait::Fair : Trait::Selfish;
  t.seat_b = code[1] == 'F' ? Trait::Fair : Trait::Selfish;
  return t;
}

SessionState replay(const json& c, const Treatment& t, int total_rounds) {
  auto state = SessionState::fresh(t, total_rounds);
  int k = 1;
  for (const auto& h : c.at("history")) {
    if (t.game == GameKind::Ultimatum) {
      state = apply_round(state, make_ultimatum_round(k, Dollars::parse(h.at("offer").get<std::string>()),
                                                      parse_response(h.at("response").get<std::string>())));
    } else {
      state = apply_round(state, make_pd_round(k, parse_move(h.at("a").get<std::string>()),
                                               parse_move(h.at("b").get<std::string>())));
    }
    ++k;
  }
  return state;
}

}  // namespace

TEST_CASE("rendered prompts match the independent golden corpus byte for byte") {
  const json manifest = json::parse(testutil::slurp(kGolden / "manifest.json"));
  const int total_rounds = manifest.at("total_rounds");
  const auto& cases = manifest.at("cases");
  REQUIRE(cases.size() >= 20);
  int ug = 0, pd = 0, later = 0, fractional = 0;
  for (const auto& c : cases) {
    const std::string id = c.at("id");
    CAPTURE(id);
    const Treatment t = treatment_of(c);
    const auto state = replay(c, t, total_rounds);
    const Seat seat = parse_seat(c.at("seat").get<std::string>());
    std::optional<Dollars> pending;
    if (!c.at("pending_offer").is_null()) pending = Dollars::parse(c.at("pending_offer").get<std::string>());
    const auto prompt = render_prompt(state, viewpoint_for(t, seat), pending);
    CHECK(normalize(prompt.system) == normalize(testutil::slurp(kGolden / c.at("system").get<std::string>())));
    CHECK(normalize(prompt.user) == normalize(testutil::slurp(kGolden / c.at("user").get<std::string>())));
    (t.game == GameKind::Ultimatum ? ug : pd)++;
    if (state.current_round() > 1) ++later;
    if (prompt.user.find(".50 dollars") != std::string::npos || prompt.user.find(".75 dollars") != std::string::npos)
      ++fractional;
  }
  CHECK(ug > 0);
  CHECK(pd > 0);
  CHECK(later > 0);
  CHECK(fractional > 0);
}

TEST_CASE("first-round prompts have no history section") {
  for (auto game : {GameKind::Ultimatum, GameKind::PrisonersDilemma}) {
    for (auto t : expand_treatments(game)) {
      for (auto seat : {Seat::A, Seat::B}) {
        auto state = SessionState::fresh(t);
        std::optional<Dollars> pending;
        if (game == GameKind::Ultimatum && seat == Seat::B) pending = Dollars::whole(40);
        const auto p = render_prompt(state, viewpoint_for(t, seat), pending);
        CHECK(p.user.find("Now let us begin the game!") != std::string::npos);
        CHECK(p.user.find("summary") == std::string::npos);
        CHECK(p.user.find("This is round 1 of the game with 4 round(s) left.") != std::string::npos);
        CHECK(p.user.find('[') == p.user.find("[]"));
      }
    }
  }
}

TEST_CASE("system prompt carries the seat's trait features") {
  CHECK(render_system(Trait::Fair).find("fairness concern") != std::string::npos);
  CHECK(render_system(Trait::Selfish).find("selfishness") != std::string::npos);
  CHECK(render_system(Trait::Fair).find("selfishness") == std::string::npos);
}

TEST_CASE("prompt preconditions") {
  Treatment ug{GameKind::Ultimatum, Trait::Fair, Trait::Selfish};
  auto state = SessionState::fresh(ug);
  CHECK_THROWS_AS(render_prompt(state, viewpoint_for(ug, Seat::B)), UsageError);
  CHECK_THROWS_AS(render_prompt(state, viewpoint_for(ug, Seat::A), Dollars::whole(10)), UsageError);
  CHECK_THROWS_AS(render_prompt(state, viewpoint_for(ug, Seat::B), Dollars::whole(101)), DomainError);
  Treatment pd{GameKind::PrisonersDilemma, Trait::Fair, Trait::Fair};
  CHECK_THROWS_AS(render_prompt(state, viewpoint_for(pd, Seat::A)), UsageError);
  CHECK_THROWS_AS(render_history(state, viewpoint_for(ug, Seat::A)), UsageError);
  for (int k = 1; k <= 5; ++k) state = apply_round(state, make_ultimatum_round(k, Dollars::whole(40), Response::Accept));
  CHECK_THROWS_AS(render_prompt(state, viewpoint_for(ug, Seat::A)), UsageError);
}

TEST_CASE("placeholder filling is single pass and strict") {
  CHECK(fill_placeholders("a [x] b []", {{"x", "[y]"}}) == "a [y] b []");
  CHECK_THROWS_AS(fill_placeholders("[missing]", {}), UsageError);
  CHECK(fill_placeholders("open [ only", {}) == "open [ only");
}

TEST_CASE("template sections strip trailing whitespace and blank lines") {
  auto tf = TemplateFile::parse("ignored\n@@ one\nline  \n\nsecond\n\n\n@@ two\nx\n");
  CHECK(tf.section("one") == "line\n\nsecond");
  CHECK(tf.section("two") == "x");
  CHECK_FALSE(tf.has("three"));
  CHECK_THROWS_AS(tf.section("three"), ConfigError);
}

TEST_CASE("PD history is rendered from each seat's own perspective") {
  Treatment pd{GameKind::PrisonersDilemma, Trait::Selfish, Trait::Fair};
  auto state = apply_round(SessionState::fresh(pd), make_pd_round(1, Move::Cooperate, Move::Defect));
  const auto a = render_history(state, viewpoint_for(pd, Seat::A));
  const auto b = render_history(state, viewpoint_for(pd, Seat::B));
  CHECK(a.find("You choose to cooperate and the other player chooses to defect. You get 0 dollars") != std::string::npos);
  CHECK(b.find("You choose to defect and the other player chooses to cooperate. You get 300 dollars") != std::string::npos);
}
