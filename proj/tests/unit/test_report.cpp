#include <doctest.h>

#include "gamelab/csv.hpp"
#include "gamelab/report.hpp"
#include "gamelab/runner.hpp"

using namespace gamelab;

namespace {

TranscriptSet corpus(GameKind game) {
  ExperimentPlan p;
  p.game = game;
  p.sessions_per_treatment = 10;
  p.timestamps = false;
  p.seat_a.backend = p.seat_b.backend = Backend::Statistical;
  MemorySink sink;
  ExperimentHeader h;
  h.game = game;
  h.plan_hash = p.hash();
  h.config = p.effective_config();
  sink.write(encode_header_line(h));
  run_sessions(p, plan_jobs(p), sink, ExecutionMode::Serial);
  return decode_transcripts(sink.contents());
}

const ReportFile* file(const Report& r, const std::string& name) {
  for (const auto& f : r.files) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("table ids") {
  CHECK(parse_table_id("t3") == TableId::T3);
  CHECK(parse_table_id("fig2") == TableId::Fig2);
  CHECK_THROWS_AS(parse_table_id("t9"), UsageError);
  CHECK(game_for(TableId::T4) == GameKind::PrisonersDilemma);
  CHECK(tables_for(GameKind::Ultimatum).size() == 4);
  CHECK(tables_for(GameKind::PrisonersDilemma).size() == 3);
}

TEST_CASE("UG report files parse as CSV with the documented headers") {
  const auto set = corpus(GameKind::Ultimatum);
  const auto rep = build_report(set, tables_for(GameKind::Ultimatum), {}, {"in.jsonl"});
  REQUIRE(file(rep, "t1.csv"));
  const auto t1 = csv_parse(file(rep, "t1.csv")->contents);
  CHECK(t1.front() == std::vector<std::string>{"table", "row", "column", "estimate", "se", "n", "p_value", "stars"});
  const auto t3 = csv_parse(file(rep, "t3.csv")->contents);
  CHECK(t3.front().front() == "table");
  CHECK(t3.size() > kOfferRegressors.size());
  const auto fig1 = csv_parse(file(rep, "fig1.csv")->contents);
  CHECK(fig1.front() == std::vector<std::string>{"figure", "group", "measure", "round", "estimate", "se", "n"});
  CHECK(fig1.size() == 1 + 4 * 2 * 5);
  CHECK(rep.text.find("in.jsonl") != std::string::npos);
  CHECK(rep.text.find(set.header->plan_hash) != std::string::npos);
  CHECK(rep.text.find("0.01") != std::string::npos);
}

TEST_CASE("PD report and game mismatch") {
  const auto set = corpus(GameKind::PrisonersDilemma);
  const auto rep = build_report(set, tables_for(GameKind::PrisonersDilemma));
  CHECK(file(rep, "t4.csv"));
  CHECK(file(rep, "t5.csv"));
  CHECK(file(rep, "fig2.csv"));
  CHECK_THROWS_AS(build_report(set, {TableId::T1}), UsageError);
}

TEST_CASE("number formatting") {
  CHECK(format_number(1.5) == "1.500000");
  CHECK(format_number(-0.0000001, 3) == "0.000");
  CHECK(format_number(2.0 / 3.0, 2) == "0.67");
}
