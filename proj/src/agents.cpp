#include "gamelab/agents.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "gamelab/errors.hpp"

namespace gamelab {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string fmt_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", p);
  return buf;
}

std::optional<Outcome> previous_outcome(const SessionState& state, Seat seat) {
  if (state.history().empty()) return std::nullopt;
  return outcome_for(std::get<PDRound>(state.history().back()), seat);
}

Decision from_decision_text(std::string_view reasoning, std::string_view decision, Role role) {
  // Route through the same parsers as model output so every backend obeys one format.
  DecisionEnvelope env = parse_envelope(render_envelope(reasoning, decision));
  Action action = parse_action(role, env.decision);
  return Decision{std::move(env), std::move(action)};
}

std::string decision_text(const Action& a) {
  if (const auto* p = std::get_if<ParsedUltimatumProposal>(&a)) return format_proposal(p->keep, p->offer);
  if (const auto* r = std::get_if<Response>(&a)) return std::string(to_string(*r));
  return std::string(to_string(std::get<Move>(a)));
}

class ScriptedAgent final : public Agent {
 public:
  using Agent::Agent;

  Decision decide(const PromptPair&, const DecisionContext& ctx) override {
    const auto& script = spec_.script;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(ctx.state.current_round() - 1), script.size() - 1);
    const std::string item = lower(script[idx]);
    const Role role = ctx.viewpoint.role;
    Action action;
    if (role == Role::Proposer) {
      const Dollars offer = Dollars::parse(item);
      if (offer < Dollars{} || offer > kPie) throw ConfigError("scripted offer outside [0, 100]: " + item);
      action = ParsedUltimatumProposal{kPie - offer, offer};
    } else if (role == Role::Responder) {
      if (item == "accept" || item == "a") {
        action = Response::Accept;
      } else if (item == "reject" || item == "r") {
        action = Response::Reject;
      } else if (item.rfind("atleast:", 0) == 0) {
        action = *ctx.pending_offer >= Dollars::parse(item.substr(8)) ? Response::Accept : Response::Reject;
      } else {
        throw ConfigError("unknown responder script item '" + item + "'");
      }
    } else {
      if (item == "tft") {
        action = ctx.state.history().empty()
                     ? Move::Cooperate
                     : std::get<PDRound>(ctx.state.history().back()).action(other(ctx.viewpoint.seat()));
      } else {
        try {
          action = parse_move(item);
        } catch (const UsageError&) {
          throw ConfigError("unknown PD script item '" + item + "'");
        }
      }
    }
    return from_decision_text("scripted", decision_text(action), role);
  }
};

class StatisticalAgent final : public Agent {
 public:
  explicit StatisticalAgent(AgentSpec spec) : Agent(std::move(spec)), rng_(spec_.seed) {}

  Decision decide(const PromptPair&, const DecisionContext& ctx) override {
    const auto& state = ctx.state;
    const Role role = ctx.viewpoint.role;
    const double round = state.current_round();
    const double ps = state.treatment().seat_a == Trait::Selfish ? 1.0 : 0.0;
    const double rs = state.treatment().seat_b == Trait::Selfish ? 1.0 : 0.0;
    if (role == Role::Proposer) {
      const auto& m = spec_.policy.offer;
      const double mean = m.constant + m.round * round + m.proposer_selfish * ps + m.responder_selfish * rs;
      const double draw = std::clamp(mean + m.noise_sd * rng_.normal(), 0.0, 100.0);
      const Dollars offer = Dollars::from_double(draw);
      return from_decision_text("statistical offer model, mean " + fmt_prob(mean),
                                format_proposal(kPie - offer, offer), role);
    }
    if (role == Role::Responder) {
      const auto& m = spec_.policy.reject;
      const double eta = m.constant + m.offer * ctx.pending_offer->value() + m.round * round +
                         m.proposer_selfish * ps + m.responder_selfish * rs;
      const double p_reject = 1.0 / (1.0 + std::exp(-eta));
      const bool reject = rng_.bernoulli(p_reject);
      return from_decision_text("statistical rejection model, P(reject) = " + fmt_prob(p_reject),
                                reject ? "reject" : "accept", role);
    }
    const auto prev = previous_outcome(state, ctx.viewpoint.seat());
    const double p = spec_.policy.policy(spec_.trait).cooperate_probability(prev);
    const Move m = rng_.bernoulli(p) ? Move::Cooperate : Move::Defect;
    const std::string cond = prev ? std::string(to_string(*prev)) : "first round";
    return from_decision_text("statistical policy, P(cooperate | " + cond + ") = " + fmt_prob(p),
                              std::string(to_string(m)), role);
  }

 private:
  Rng rng_;
};

class RemoteAgent final : public Agent {
 public:
  RemoteAgent(AgentSpec spec, std::shared_ptr<ChatClient> chat) : Agent(std::move(spec)), chat_(std::move(chat)) {}

  Decision decide(const PromptPair& prompt, const DecisionContext& ctx) override {
    std::string last_raw;
    std::string last_problem;
    for (int attempt = 1; attempt <= spec_.max_attempts; ++attempt) {
      ChatRequest req;
      req.model = spec_.model_id;
      req.temperature = spec_.temperature;
      const std::string user = attempt == 1 ? prompt.user : prompt.user + "\n" + kFormatReminder;
      req.messages = {{"system", prompt.system}, {"user", user}};
      std::string raw;
      try {
        raw = chat_->complete(req);
      } catch (const TransportError& e) {
        throw SessionAbort(AbortReason::Transport, e.what(), last_raw, attempt);
      }
      try {
        DecisionEnvelope env = parse_envelope(raw);
        Action action = parse_action(ctx.viewpoint.role, env.decision);
        env.attempts = attempt;
        return Decision{std::move(env), std::move(action)};
      } catch (const DecisionFormatError& e) {
        last_raw = std::move(raw);
        last_problem = e.what();
      }
    }
    throw SessionAbort(AbortReason::Malformed, last_problem, last_raw, spec_.max_attempts);
  }

 private:
  std::shared_ptr<ChatClient> chat_;
};

}  // namespace

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::Remote: return "remote";
    case Backend::Scripted: return "scripted";
    case Backend::Statistical: return "statistical";
  }
  return "?";
}

Backend parse_backend(std::string_view s) {
  const auto v = lower(s);
  if (v == "remote" || v == "llm") return Backend::Remote;
  if (v == "scripted") return Backend::Scripted;
  if (v == "statistical") return Backend::Statistical;
  throw ConfigError("unknown backend '" + std::string(s) + "'");
}

PDPolicy PDPolicy::defaults(Trait trait) {
  if (trait == Trait::Fair) return PDPolicy{0.99, 0.994, 0.023, 0.750, 0.057};
  return PDPolicy{0.10, 0.629, 0.052, 0.104, 0.089};
}

double PDPolicy::cooperate_probability(std::optional<Outcome> previous) const {
  if (!previous) return first;
  switch (*previous) {
    case Outcome::CC: return given_cc;
    case Outcome::CD: return given_cd;
    case Outcome::DC: return given_dc;
    case Outcome::DD: return given_dd;
  }
  return 0.0;
}

void PDPolicy::validate() const {
  for (double p : {first, given_cc, given_cd, given_dc, given_dd}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("cooperation probability " + std::to_string(p) + " outside [0, 1]");
  }
}

std::string_view to_string(AbortReason r) { return r == AbortReason::Malformed ? "malformed" : "transport"; }

AbortReason parse_abort_reason(std::string_view s) {
  if (s == "malformed") return AbortReason::Malformed;
  if (s == "transport") return AbortReason::Transport;
  throw UsageError("unknown abort reason '" + std::string(s) + "'");
}

void validate(const AgentSpec& spec) {
  switch (spec.backend) {
    case Backend::Remote:
      if (spec.model_id.empty()) throw ConfigError("remote agent requires a model id");
      if (!(spec.temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
      if (!spec.script.empty()) throw ConfigError("remote agent does not take a script");
      if (spec.max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
      break;
    case Backend::Scripted:
      if (spec.script.empty()) throw ConfigError("scripted agent requires a non-empty script");
      if (!spec.model_id.empty()) throw ConfigError("scripted agent does not take a model id");
      break;
    case Backend::Statistical:
      if (!spec.script.empty()) throw ConfigError("statistical agent does not take a script");
      if (!spec.model_id.empty()) throw ConfigError("statistical agent does not take a model id");
      spec.policy.fair.validate();
      spec.policy.selfish.validate();
      if (!(spec.policy.offer.noise_sd >= 0.0)) throw ConfigError("offer noise_sd must be >= 0");
      break;
  }
}

Decision next_decision(Agent& agent, const PromptPair& prompt, const DecisionContext& context) {
  if (agent.spec().trait != context.viewpoint.trait) {
    throw UsageError("agent trait does not match the seat's viewpoint");
  }
  if (context.state.treatment().trait(context.viewpoint.seat()) != context.viewpoint.trait) {
    throw UsageError("viewpoint trait does not match the treatment");
  }
  if ((context.viewpoint.role == Role::Responder) != context.pending_offer.has_value()) {
    throw UsageError("pending offer must be present exactly for responders");
  }
  return agent.decide(prompt, context);
}

std::unique_ptr<Agent> make_agent(const AgentSpec& spec, std::shared_ptr<ChatClient> chat) {
  validate(spec);
  switch (spec.backend) {
    case Backend::Scripted: return std::make_unique<ScriptedAgent>(spec);
    case Backend::Statistical: return std::make_unique<StatisticalAgent>(spec);
    case Backend::Remote:
      if (!chat) throw ConfigError("remote agent requires a chat client");
      return std::make_unique<RemoteAgent>(spec, std::move(chat));
  }
  throw ConfigError("unknown backend");
}

Move statistical_pd_policy(std::optional<Outcome> previous, Trait trait, Rng& rng, const StatisticalParams& params) {
  const auto& policy = params.policy(trait);
  policy.validate();
  return rng.bernoulli(policy.cooperate_probability(previous)) ? Move::Cooperate : Move::Defect;
}

}  // namespace gamelab
