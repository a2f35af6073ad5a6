#include "gamelab/prompt_kit.hpp"

#include <sstream>
#include <vector>

#include "gamelab/embedded_data.hpp"
#include "gamelab/errors.hpp"

namespace gamelab {
namespace {

constexpr std::string_view kSystemFile = "templates/system.tmpl";
constexpr std::string_view kProposerFile = "templates/ultimatum_proposer.tmpl";
constexpr std::string_view kResponderFile = "templates/ultimatum_responder.tmpl";
constexpr std::string_view kPDFile = "templates/prisoners_dilemma.tmpl";

const TemplateFile& cached(std::string_view name) {
  // Templates are immutable after first load; static init is thread-safe.
  static const TemplateFile system = TemplateFile::embedded(kSystemFile);
  static const TemplateFile proposer = TemplateFile::embedded(kProposerFile);
  static const TemplateFile responder = TemplateFile::embedded(kResponderFile);
  static const TemplateFile pd = TemplateFile::embedded(kPDFile);
  if (name == kSystemFile) return system;
  if (name == kProposerFile) return proposer;
  if (name == kResponderFile) return responder;
  return pd;
}

std::string rstrip(std::string_view s) {
  auto end = s.find_last_not_of(" \t\r");
  return end == std::string_view::npos ? std::string() : std::string(s.substr(0, end + 1));
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

std::map<std::string, std::string> common_values(const SessionState& state, const Viewpoint& vp) {
  const int round = state.current_round();
  return {
      {"total rounds", std::to_string(state.total_rounds())},
      {"round", std::to_string(round)},
      {"round - 1", std::to_string(round - 1)},
      {"5 - round", std::to_string(state.total_rounds() - round)},
      {"features", features_text(vp.trait)},
  };
}

void check_live(const SessionState& state) {
  if (state.finished()) throw UsageError("cannot render a prompt for a finished session");
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::Proposer: return "proposer";
    case Role::Responder: return "responder";
    case Role::PDPlayer1: return "player1";
    case Role::PDPlayer2: return "player2";
  }
  return "?";
}

Viewpoint viewpoint_for(const Treatment& treatment, Seat seat) {
  Viewpoint vp;
  vp.game = treatment.game;
  vp.trait = treatment.trait(seat);
  if (treatment.game == GameKind::Ultimatum) {
    vp.role = seat == Seat::A ? Role::Proposer : Role::Responder;
  } else {
    vp.role = seat == Seat::A ? Role::PDPlayer1 : Role::PDPlayer2;
  }
  return vp;
}

TemplateFile TemplateFile::parse(std::string_view text) {
  TemplateFile tf;
  std::string current;
  std::vector<std::string> lines;
  auto flush = [&] {
    if (current.empty()) return;
    while (!lines.empty() && lines.back().empty()) lines.pop_back();
    std::string body;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (i) body += '\n';
      body += lines[i];
    }
    tf.sections_[current] = std::move(body);
    lines.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line = rstrip(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.rfind("@@ ", 0) == 0) {
      flush();
      current = line.substr(3);
    } else if (!current.empty()) {
      lines.push_back(std::move(line));
    }
    if (nl == text.size()) break;
  }
  flush();
  return tf;
}

TemplateFile TemplateFile::embedded(std::string_view name) { return parse(embedded_file(name)); }

const std::string& TemplateFile::section(std::string_view name) const {
  auto it = sections_.find(name);
  if (it == sections_.end()) throw ConfigError("template has no section '" + std::string(name) + "'");
  return it->second;
}

bool TemplateFile::has(std::string_view name) const { return sections_.find(name) != sections_.end(); }

std::string fill_placeholders(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size() + 256);
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find('[', pos);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(pos));
      break;
    }
    out.append(tmpl.substr(pos, open - pos));
    auto close = tmpl.find(']', open);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(open));
      break;
    }
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    if (name.empty()) {
      out += "[]";
    } else if (auto it = values.find(name); it != values.end()) {
      out += it->second;
    } else {
      throw UsageError("unbound template placeholder [" + name + "]");
    }
    pos = close + 1;
  }
  return out;
}

std::string features_text(Trait trait) {
  return cached(kSystemFile).section(trait == Trait::Fair ? "features_fair" : "features_selfish");
}

std::string render_system(Trait trait) {
  return fill_placeholders(cached(kSystemFile).section("system"), {{"features", features_text(trait)}});
}

std::string render_history(const SessionState& state, const Viewpoint& vp) {
  if (state.current_round() == 1) {
    throw UsageError("no history in round 1; use the first-round branch");
  }
  const TemplateFile* tf = nullptr;
  switch (vp.role) {
    case Role::Proposer: tf = &cached(kProposerFile); break;
    case Role::Responder: tf = &cached(kResponderFile); break;
    default: tf = &cached(kPDFile); break;
  }
  const std::string& line_tmpl = tf->section("history_line");
  const Seat me = vp.seat();
  std::string out;
  for (const auto& rec : state.history()) {
    std::map<std::string, std::string> v{{"k", std::to_string(round_index(rec))}};
    if (const auto* u = std::get_if<UltimatumRound>(&rec)) {
      if (vp.game != GameKind::Ultimatum) throw UsageError("viewpoint does not match game");
      v["offered amount"] = u->offer.str();
      v["100 - offered amount"] = (kPie - u->offer).str();
      v["accept or reject"] = std::string(to_string(u->response));
    } else {
      if (vp.game != GameKind::PrisonersDilemma) throw UsageError("viewpoint does not match game");
      const auto& p = std::get<PDRound>(rec);
      v["own choice"] = std::string(to_string(p.action(me)));
      v["other choice"] = std::string(to_string(p.action(other(me))));
      v["own payoff"] = p.payoff(me).str();
      v["other payoff"] = p.payoff(other(me)).str();
    }
    if (!out.empty()) out += '\n';
    out += fill_placeholders(line_tmpl, v);
  }
  return out;
}

PromptPair render_ultimatum_prompt(const SessionState& state, const Viewpoint& vp,
                                   std::optional<Dollars> pending_offer) {
  check_live(state);
  if (state.treatment().game != GameKind::Ultimatum || vp.game != GameKind::Ultimatum) {
    throw UsageError("ultimatum prompt requested for a non-ultimatum state or viewpoint");
  }
  const bool proposer = vp.role == Role::Proposer;
  if (!proposer && vp.role != Role::Responder) throw UsageError("viewpoint role not valid for ultimatum");
  if (proposer && pending_offer) throw UsageError("proposer prompt must not carry a pending offer");
  if (!proposer && !pending_offer) throw UsageError("responder prompt requires the pending offer");

  const TemplateFile& tf = cached(proposer ? kProposerFile : kResponderFile);
  auto v = common_values(state, vp);
  v["proposer earnings"] = state.cumulative(Seat::A).str();
  v["responder earnings"] = state.cumulative(Seat::B).str();
  if (pending_offer) {
    if (*pending_offer < Dollars{} || *pending_offer > kPie) throw DomainError("pending offer outside [0, 100]");
    v["offered amount"] = pending_offer->str();
    v["100 - offered amount"] = (kPie - *pending_offer).str();
  }

  std::vector<std::string> blocks;
  blocks.push_back(fill_placeholders(tf.section("intro"), v));
  if (state.current_round() == 1) {
    blocks.push_back(fill_placeholders(tf.section("first_round"), v));
  } else {
    v["game history"] = render_history(state, vp);
    blocks.push_back(fill_placeholders(tf.section("later_round"), v));
  }
  if (!proposer) blocks.push_back(fill_placeholders(tf.section("offer"), v));
  blocks.push_back(fill_placeholders(tf.section("footer"), v));
  return PromptPair{render_system(vp.trait), join_blocks(blocks)};
}

PromptPair render_pd_prompt(const SessionState& state, const Viewpoint& vp) {
  check_live(state);
  if (state.treatment().game != GameKind::PrisonersDilemma || vp.game != GameKind::PrisonersDilemma ||
      (vp.role != Role::PDPlayer1 && vp.role != Role::PDPlayer2)) {
    throw UsageError("prisoner's dilemma prompt requested for a non-PD state or viewpoint");
  }
  const TemplateFile& tf = cached(kPDFile);
  const Seat me = vp.seat();
  auto v = common_values(state, vp);
  v["1 or 2"] = me == Seat::A ? "1" : "2";
  v["your earnings"] = state.cumulative(me).str();
  v["opponent earnings"] = state.cumulative(other(me)).str();

  std::vector<std::string> blocks;
  blocks.push_back(fill_placeholders(tf.section("intro"), v));
  blocks.push_back(fill_placeholders(tf.section("payoff_rule"), v));
  blocks.push_back(fill_placeholders(tf.section("rule_notes"), v));
  if (state.current_round() == 1) {
    blocks.push_back(fill_placeholders(tf.section("first_round"), v));
  } else {
    v["game history"] = render_history(state, vp);
    blocks.push_back(fill_placeholders(tf.section("later_round"), v));
  }
  blocks.push_back(fill_placeholders(tf.section("footer"), v));
  return PromptPair{render_system(vp.trait), join_blocks(blocks)};
}

PromptPair render_prompt(const SessionState& state, const Viewpoint& vp, std::optional<Dollars> pending_offer) {
  if (state.treatment().game == GameKind::Ultimatum) return render_ultimatum_prompt(state, vp, pending_offer);
  if (pending_offer) throw UsageError("prisoner's dilemma prompts take no pending offer");
  return render_pd_prompt(state, vp);
}

}  // namespace gamelab
