#include "gamelab/runner.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <map>
#include <set>

#include "gamelab/errors.hpp"
#include "gamelab/prompt_kit.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {
namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

SeatMeta seat_meta_for(const AgentSpec& spec) {
  SeatMeta m;
  m.backend = spec.backend;
  m.trait = spec.trait;
  m.seed = spec.seed;
  m.system_prompt = render_system(spec.trait);
  if (spec.backend == Backend::Remote) {
    m.model_id = spec.model_id;
    m.temperature = spec.temperature;
    m.omitted_params = {"top_p", "max_tokens", "presence_penalty", "frequency_penalty", "seed"};
  }
  return m;
}

ExperimentHeader header_for(const ExperimentPlan& plan) {
  ExperimentHeader h;
  h.game = plan.game;
  h.plan_hash = plan.hash();
  h.rounds = plan.rounds;
  h.config = plan.effective_config();
  return h;
}

// Cuts a partial final line; returns true if anything was removed.
bool repair_tail(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();
  if (bytes.empty() || bytes.back() == '\n') return false;
  const auto nl = bytes.rfind('\n');
  std::filesystem::resize_file(path, nl == std::string::npos ? 0 : nl + 1);
  return true;
}

}  // namespace

FileSink::FileSink(const std::filesystem::path& path) : path_(path), out_(path, std::ios::app | std::ios::binary) {
  if (!out_) throw SinkError("cannot open " + path.string() + " for appending");
}

void FileSink::write(std::string_view lines) {
  std::lock_guard lock(mutex_);
  out_.write(lines.data(), static_cast<std::streamsize>(lines.size()));
  out_.flush();
  if (!out_) throw SinkError("write to " + path_.string() + " failed");
}

void MemorySink::write(std::string_view lines) {
  std::lock_guard lock(mutex_);
  buffer_.append(lines);
}

std::string MemorySink::contents() const {
  std::lock_guard lock(mutex_);
  return buffer_;
}

std::string session_id_for(const Treatment& treatment, int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", index);
  return std::string(treatment.game == GameKind::Ultimatum ? "ug" : "pd") + "-" + treatment.code() + "-" + buf;
}

std::uint64_t session_seed(std::uint64_t seed_base, std::string_view session_id) {
  return seed_base ^ stable_hash(session_id);
}

std::uint64_t seat_seed(std::uint64_t session_seed, Seat seat) {
  return splitmix64(session_seed + (seat == Seat::A ? 1 : 2));
}

Transcript run_session(const ExperimentPlan& plan, const SessionJob& job, TranscriptSink& sink,
                       std::shared_ptr<ChatClient> chat) {
  if (job.treatment.game != plan.game) throw UsageError("session " + job.session_id + " does not match the plan's game");
  Transcript t;
  t.session_id = job.session_id;
  t.treatment = job.treatment;
  t.index = job.index;
  t.rounds = plan.rounds;
  t.seed = session_seed(plan.seed_base, job.session_id);
  t.plan_hash = plan.hash();
  const AgentSpec spec_a = agent_spec_for(plan, job.treatment, Seat::A, seat_seed(t.seed, Seat::A));
  const AgentSpec spec_b = agent_spec_for(plan, job.treatment, Seat::B, seat_seed(t.seed, Seat::B));
  t.seat_a = seat_meta_for(spec_a);
  t.seat_b = seat_meta_for(spec_b);
  if (plan.timestamps) t.started_at = utc_now();
  auto agent_a = make_agent(spec_a, chat);
  auto agent_b = make_agent(spec_b, chat);
  sink.write(encode_session_start(t));

  SessionState state = SessionState::fresh(job.treatment, plan.rounds);
  Seat deciding = Seat::A;
  auto ask = [&](Seat seat, const PromptPair& prompt, std::optional<Dollars> offer) {
    deciding = seat;
    Agent& agent = seat == Seat::A ? *agent_a : *agent_b;
    return next_decision(agent, prompt, DecisionContext{state, viewpoint_for(job.treatment, seat), offer});
  };

  try {
    while (!state.finished()) {
      RoundEntry entry;
      const int r = state.current_round();
      if (plan.game == GameKind::Ultimatum) {
        const auto vp_a = viewpoint_for(job.treatment, Seat::A);
        const auto prompt_a = render_ultimatum_prompt(state, vp_a, std::nullopt);
        const Decision da = ask(Seat::A, prompt_a, std::nullopt);
        const Dollars offer = std::get<ParsedUltimatumProposal>(da.action).offer;
        const auto vp_b = viewpoint_for(job.treatment, Seat::B);
        const auto prompt_b = render_ultimatum_prompt(state, vp_b, offer);
        const Decision db = ask(Seat::B, prompt_b, offer);
        entry.record = make_ultimatum_round(r, offer, std::get<Response>(db.action));
        entry.decisions = {{Seat::A, prompt_a.user, da.envelope}, {Seat::B, prompt_b.user, db.envelope}};
      } else {
        // Both prompts come from the same pre-round state, so neither seat
        // can see the other's current move.
        const auto prompt_a = render_pd_prompt(state, viewpoint_for(job.treatment, Seat::A));
        const auto prompt_b = render_pd_prompt(state, viewpoint_for(job.treatment, Seat::B));
        const Decision da = ask(Seat::A, prompt_a, std::nullopt);
        const Decision db = ask(Seat::B, prompt_b, std::nullopt);
        entry.record = make_pd_round(r, std::get<Move>(da.action), std::get<Move>(db.action));
        entry.decisions = {{Seat::A, prompt_a.user, da.envelope}, {Seat::B, prompt_b.user, db.envelope}};
      }
      state = apply_round(state, entry.record);
      sink.write(encode_round_line(t.session_id, entry));
      t.entries.push_back(std::move(entry));
    }
    t.status = SessionStatus::Complete;
  } catch (const SessionAbort& e) {
    t.status = SessionStatus::Aborted;
    t.abort = AbortInfo{e.reason(), e.what(), state.current_round(), deciding, e.last_raw(), e.attempts()};
  }
  t.reported_totals = std::make_pair(state.cumulative(Seat::A), state.cumulative(Seat::B));
  if (plan.timestamps) t.finished_at = utc_now();
  sink.write(encode_session_end(t));
  return t;
}

std::vector<Transcript> run_sessions(const ExperimentPlan& plan, const std::vector<SessionJob>& jobs,
                                     TranscriptSink& sink, ExecutionMode mode, std::shared_ptr<ChatClient> chat) {
  std::vector<Transcript> out(jobs.size());
  if (mode == ExecutionMode::Serial) {
    for (std::size_t i = 0; i < jobs.size(); ++i) out[i] = run_session(plan, jobs[i], sink, chat);
    return out;
  }
  std::vector<std::exception_ptr> errors(jobs.size());
  const long n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(plan.concurrency)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = run_session(plan, jobs[i], sink, chat);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw SinkError("session " + jobs[i].session_id + ": " + e.what());
    }
  }
  return out;
}

std::vector<SessionJob> plan_jobs(const ExperimentPlan& plan) {
  std::vector<SessionJob> jobs;
  for (const auto& tr : expand_treatments(plan.game)) {
    for (int i = 0; i < plan.sessions_per_treatment; ++i) jobs.push_back({session_id_for(tr, i), tr, i});
  }
  return jobs;
}

RunSummary run_experiment(const ExperimentPlan& plan, const RunOptions& options) {
  plan.validate();
  RunSummary summary;
  summary.plan_hash = plan.hash();

  std::map<std::string, SessionStatus> previous;
  auto has_content = [&] { return std::filesystem::exists(plan.output) && std::filesystem::file_size(plan.output) > 0; };
  if (has_content()) summary.repaired_tail = repair_tail(plan.output);
  const bool exists = has_content();
  if (exists) {
    const TranscriptSet prior = read_transcript_file(plan.output);
    if (prior.header) {
      if (prior.header->game != plan.game) {
        throw PlanMismatch("output file holds a different game (" + std::string(to_string(prior.header->game)) + ")");
      }
      if (prior.header->plan_hash != summary.plan_hash && !options.allow_plan_mismatch) {
        throw PlanMismatch("output file was written by plan " + prior.header->plan_hash + ", current plan is " +
                           summary.plan_hash + "; pass the mismatch override to append anyway");
      }
    }
    for (const auto& s : prior.sessions) previous[s.session_id] = s.status;
  }

  std::shared_ptr<ChatClient> chat = options.chat;
  if (!chat && plan.uses_remote()) {
    chat = std::make_shared<HttpChatClient>(chat_config_for(plan.remote, require_api_key(plan.remote), plan.concurrency));
  }

  std::vector<SessionJob> todo;
  for (auto& job : plan_jobs(plan)) {
    const auto it = previous.find(job.session_id);
    if (it != previous.end() && it->second != SessionStatus::Incomplete) {
      ++summary.skipped;
      continue;
    }
    if (options.max_new_sessions && todo.size() >= *options.max_new_sessions) continue;
    todo.push_back(std::move(job));
  }

  FileSink sink(plan.output);
  if (!exists) sink.write(encode_header_line(header_for(plan)));
  const auto results = run_sessions(plan, todo, sink, options.mode, chat);
  summary.executed = results.size();
  for (const auto& t : results) previous[t.session_id] = t.status;

  for (const auto& tr : expand_treatments(plan.game)) {
    TreatmentCounts c{tr};
    for (int i = 0; i < plan.sessions_per_treatment; ++i) {
      const auto it = previous.find(session_id_for(tr, i));
      if (it == previous.end() || it->second == SessionStatus::Incomplete) {
        ++c.pending;
      } else if (it->second == SessionStatus::Complete) {
        ++c.complete;
      } else {
        ++c.aborted;
      }
    }
    summary.per_treatment.push_back(c);
  }
  return summary;
}

}  // namespace gamelab
