#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gamelab/chat_client.hpp"
#include "gamelab/envelope.hpp"
#include "gamelab/game_core.hpp"
#include "gamelab/prompt_kit.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {

enum class Backend { Remote, Scripted, Statistical };

std::string_view to_string(Backend b);
Backend parse_backend(std::string_view s);

// Cooperation probabilities for one trait: first round, then given the
// previous outcome from the player's own perspective.
struct PDPolicy {
  double first = 0.0;
  double given_cc = 0.0;
  double given_cd = 0.0;
  double given_dc = 0.0;
  double given_dd = 0.0;

  // Conditional cells are the GPT-4 conditional cooperation rates; the
  // first-round levels (fair 0.99, selfish 0.10) are calibration knobs.
  static PDPolicy defaults(Trait trait);
  double cooperate_probability(std::optional<Outcome> previous) const;
  // Throws ConfigError if any probability lies outside [0, 1].
  void validate() const;

  bool operator==(const PDPolicy&) const = default;
};

// offer = constant + round*r + proposer_selfish*ps + responder_selfish*rs + N(0, noise_sd),
// clamped to [0, 100] and rounded to the cent.
struct UltimatumOfferModel {
  double constant = 45.106;
  double round = -1.531;
  double proposer_selfish = -9.806;
  double responder_selfish = -1.920;
  double noise_sd = 6.0;

  bool operator==(const UltimatumOfferModel&) const = default;
};

// P(reject) = logistic(constant + offer*o + round*r + proposer_selfish*ps + responder_selfish*rs).
struct UltimatumRejectModel {
  double constant = 6.692;
  double offer = -0.237;
  double round = -0.370;
  double proposer_selfish = -0.245;
  double responder_selfish = -2.539;

  bool operator==(const UltimatumRejectModel&) const = default;
};

struct StatisticalParams {
  PDPolicy fair = PDPolicy::defaults(Trait::Fair);
  PDPolicy selfish = PDPolicy::defaults(Trait::Selfish);
  UltimatumOfferModel offer;
  UltimatumRejectModel reject;

  const PDPolicy& policy(Trait t) const { return t == Trait::Fair ? fair : selfish; }
  bool operator==(const StatisticalParams&) const = default;
};

inline constexpr int kMaxDecisionAttempts = 3;

struct AgentSpec {
  Backend backend = Backend::Scripted;
  Trait trait = Trait::Fair;
  std::string model_id;      // Remote only
  double temperature = 1.0;  // Remote only
  int max_attempts = kMaxDecisionAttempts;
  std::uint64_t seed = 0;            // Scripted / Statistical
  std::vector<std::string> script;   // Scripted only
  StatisticalParams policy;          // Statistical only
};

// Throws ConfigError when backend-specific fields are missing or misplaced.
void validate(const AgentSpec& spec);

enum class AbortReason { Malformed, Transport };

std::string_view to_string(AbortReason r);
AbortReason parse_abort_reason(std::string_view s);

// Thrown by an agent when it cannot produce a usable decision; the runner
// records it and marks the session aborted.
class SessionAbort : public std::runtime_error {
 public:
  SessionAbort(AbortReason reason, const std::string& detail, std::string last_raw, int attempts)
      : std::runtime_error(detail), reason_(reason), last_raw_(std::move(last_raw)), attempts_(attempts) {}
  AbortReason reason() const { return reason_; }
  const std::string& last_raw() const { return last_raw_; }
  int attempts() const { return attempts_; }

 private:
  AbortReason reason_;
  std::string last_raw_;
  int attempts_;
};

struct DecisionContext {
  const SessionState& state;
  Viewpoint viewpoint;
  std::optional<Dollars> pending_offer;
};

struct Decision {
  DecisionEnvelope envelope;
  Action action;
};

// Appended to the original user message on a re-prompt.
inline constexpr const char* kFormatReminder =
    "Your previous answer could not be read; please reply with only the single-line JSON object "
    "with the keys \"reasoning\" and \"decision\", exactly in the format described above.";

class Agent {
 public:
  explicit Agent(AgentSpec spec) : spec_(std::move(spec)) {}
  virtual ~Agent() = default;
  Agent(const Agent&) = delete;
  Agent& operator=(const Agent&) = delete;

  const AgentSpec& spec() const { return spec_; }
  virtual Decision decide(const PromptPair& prompt, const DecisionContext& context) = 0;

 protected:
  AgentSpec spec_;
};

// Checks the context matches the agent's seat and trait, then asks it.
Decision next_decision(Agent& agent, const PromptPair& prompt, const DecisionContext& context);

// Remote agents require `chat`; the other backends ignore it.
std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::shared_ptr<ChatClient> chat = nullptr);

Move statistical_pd_policy(std::optional<Outcome> previous, Trait trait, Rng& rng,
                           const StatisticalParams& params = {});

}  // namespace gamelab
