#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gamelab/agents.hpp"
#include "gamelab/chat_client.hpp"
#include "gamelab/game_core.hpp"

namespace gamelab {

struct SeatConfig {
  Backend backend = Backend::Scripted;
  std::string model_id;
  double temperature = 1.0;
  int max_attempts = kMaxDecisionAttempts;
  std::vector<std::string> script;  // empty = backend default
};

struct RemoteSettings {
  std::string endpoint = kDefaultEndpoint;
  std::string api_key_env = kDefaultApiKeyEnv;
  int transport_retries = 5;
  int backoff_ms = 1000;
  int timeout_s = 120;
  int rate_limit_ms = 0;
};

// Flat key = value configuration. Lines starting with '#' are comments.
// Keys: game, sessions_per_treatment, rounds, seed_base, output, concurrency,
// timestamps, backend, model, seat_a.* / seat_b.* (backend, model,
// temperature, max_attempts, script), remote.*, stat.* (see README).
struct ExperimentPlan {
  GameKind game = GameKind::Ultimatum;
  int sessions_per_treatment = 100;
  int rounds = kDefaultRounds;
  SeatConfig seat_a;
  SeatConfig seat_b;
  StatisticalParams stat;
  std::uint64_t seed_base = 0;
  std::filesystem::path output = "transcripts.jsonl";
  int concurrency = 8;
  bool timestamps = true;
  RemoteSettings remote;

  const SeatConfig& seat(Seat s) const { return s == Seat::A ? seat_a : seat_b; }
  SeatConfig& seat(Seat s) { return s == Seat::A ? seat_a : seat_b; }
  bool uses_remote() const;
  // Script used for a scripted seat, with defaults filled in
  // (UG proposer offers 50, responder accepts, PD plays tit-for-tat).
  std::vector<std::string> effective_script(Seat s) const;

  // Every setting, canonical formatting, sorted by key.
  std::map<std::string, std::string> effective_config() const;
  // Hash over the settings that shape outcomes (operational keys such as
  // output, sessions_per_treatment and concurrency are excluded).
  std::string hash() const;
  // Throws ConfigError on inconsistent settings.
  void validate() const;
};

// Applies one key/value; throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentPlan& plan, std::string_view key, std::string_view value);
ExperimentPlan parse_plan(std::string_view text);
ExperimentPlan load_plan(const std::filesystem::path& path);

AgentSpec agent_spec_for(const ExperimentPlan& plan, const Treatment& treatment, Seat seat, std::uint64_t seed);

// Reads the API key from the configured environment variable; throws
// ConfigError naming the variable when it is unset or empty.
std::string require_api_key(const RemoteSettings& remote);
HttpChatConfig chat_config_for(const RemoteSettings& remote, const std::string& api_key, int concurrency);

}  // namespace gamelab
