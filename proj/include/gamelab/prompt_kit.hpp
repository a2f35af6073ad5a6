#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "gamelab/game_core.hpp"

namespace gamelab {

enum class Role { Proposer, Responder, PDPlayer1, PDPlayer2 };

std::string_view to_string(Role r);

struct Viewpoint {
  GameKind game = GameKind::Ultimatum;
  Role role = Role::Proposer;
  Trait trait = Trait::Fair;

  Seat seat() const { return role == Role::Proposer || role == Role::PDPlayer1 ? Seat::A : Seat::B; }
  bool operator==(const Viewpoint&) const = default;
};

// The viewpoint of whoever sits in `seat` under `treatment`.
Viewpoint viewpoint_for(const Treatment& treatment, Seat seat);

struct PromptPair {
  std::string system;
  std::string user;

  bool operator==(const PromptPair&) const = default;
};

// A template file split into named sections ("@@ name" marker lines).
// Section bodies keep their line breaks; trailing whitespace on each line
// and trailing blank lines are dropped.
class TemplateFile {
 public:
  static TemplateFile parse(std::string_view text);
  static TemplateFile embedded(std::string_view name);

  const std::string& section(std::string_view name) const;
  bool has(std::string_view name) const;

 private:
  std::map<std::string, std::string, std::less<>> sections_;
};

// Replaces every "[name]" whose name is a key in `values`. An empty "[]" is
// left alone (it is part of the prompt text); any other unknown bracketed
// name throws UsageError.
std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values);

std::string render_system(Trait trait);
std::string features_text(Trait trait);

// Proposer viewpoints require `pending_offer` absent, responders require it present.
PromptPair render_ultimatum_prompt(const SessionState& state, const Viewpoint& viewpoint,
                                   std::optional<Dollars> pending_offer);
PromptPair render_pd_prompt(const SessionState& state, const Viewpoint& viewpoint);
// Dispatches on the state's game.
PromptPair render_prompt(const SessionState& state, const Viewpoint& viewpoint,
                         std::optional<Dollars> pending_offer = std::nullopt);

// One "Round k summary: ..." line per past round. Throws UsageError in round 1.
std::string render_history(const SessionState& state, const Viewpoint& viewpoint);

}  // namespace gamelab
