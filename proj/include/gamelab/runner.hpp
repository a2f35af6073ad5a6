#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "gamelab/agents.hpp"
#include "gamelab/chat_client.hpp"
#include "gamelab/errors.hpp"
#include "gamelab/plan.hpp"
#include "gamelab/transcript.hpp"

namespace gamelab {

// Receives encoded transcript lines as each record completes.
// Implementations must tolerate concurrent writes from several sessions.
class TranscriptSink {
 public:
  virtual ~TranscriptSink() = default;
  virtual void write(std::string_view lines) = 0;
};

class SinkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Appends and flushes every write; a failed write throws SinkError.
class FileSink final : public TranscriptSink {
 public:
  explicit FileSink(const std::filesystem::path& path);
  void write(std::string_view lines) override;

 private:
  std::filesystem::path path_;
  std::ofstream out_;
  std::mutex mutex_;
};

class MemorySink final : public TranscriptSink {
 public:
  void write(std::string_view lines) override;
  std::string contents() const;

 private:
  mutable std::mutex mutex_;
  std::string buffer_;
};

// "ug-SF-0007"
std::string session_id_for(const Treatment& treatment, int index);
std::uint64_t session_seed(std::uint64_t seed_base, std::string_view session_id);
std::uint64_t seat_seed(std::uint64_t session_seed, Seat seat);

struct SessionJob {
  std::string session_id;
  Treatment treatment;
  int index = 0;
};

// Plays one session to completion or abort, streaming each record to `sink`.
// An agent abort is recorded in the transcript; anything else propagates.
Transcript run_session(const ExperimentPlan& plan, const SessionJob& job, TranscriptSink& sink,
                       std::shared_ptr<ChatClient> chat = nullptr);

enum class ExecutionMode { Serial, Parallel };

// Serial: sessions one after another on the calling thread, in job order.
// Parallel: OpenMP over sessions, at most plan.concurrency at once.
// Results come back in job order either way.
std::vector<Transcript> run_sessions(const ExperimentPlan& plan, const std::vector<SessionJob>& jobs,
                                     TranscriptSink& sink, ExecutionMode mode,
                                     std::shared_ptr<ChatClient> chat = nullptr);

std::vector<SessionJob> plan_jobs(const ExperimentPlan& plan);

class PlanMismatch : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct RunOptions {
  ExecutionMode mode = ExecutionMode::Parallel;
  bool allow_plan_mismatch = false;
  std::optional<std::size_t> max_new_sessions;
  // Overrides the HTTP client built from the plan (tests, replay).
  std::shared_ptr<ChatClient> chat;
};

struct TreatmentCounts {
  Treatment treatment;
  std::size_t complete = 0;
  std::size_t aborted = 0;
  std::size_t pending = 0;  // not yet run or left incomplete
};

struct RunSummary {
  std::string plan_hash;
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already finished in an earlier run
  bool repaired_tail = false;
  std::vector<TreatmentCounts> per_treatment;
};

// Runs every session of the plan that the output file does not already hold
// as complete or aborted. A torn final line is cut off before appending.
RunSummary run_experiment(const ExperimentPlan& plan, const RunOptions& options = {});

}  // namespace gamelab
