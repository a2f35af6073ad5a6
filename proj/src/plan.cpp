#include "gamelab/plan.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gamelab/errors.hpp"
#include "gamelab/rng.hpp"

namespace gamelab {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double d = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("'" + std::string(key) + "' expects a number, got '" + s + "'");
  return d;
}

long long to_int(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const long long n = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + s + "'");
  return n;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::vector<std::string> split_list(std::string_view v) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += ',';
    out += s;
  }
  return out;
}

void apply_seat(SeatConfig& seat, std::string_view field, std::string_view key, std::string_view value) {
  if (field == "backend") {
    seat.backend = parse_backend(value);
  } else if (field == "model") {
    seat.model_id = std::string(value);
  } else if (field == "temperature") {
    seat.temperature = to_double(key, value);
  } else if (field == "max_attempts") {
    seat.max_attempts = static_cast<int>(to_int(key, value));
  } else if (field == "script") {
    seat.script = split_list(value);
  } else {
    throw ConfigError("unknown plan key '" + std::string(key) + "'");
  }
}

double* pd_field(PDPolicy& p, std::string_view f) {
  if (f == "first") return &p.first;
  if (f == "cc") return &p.given_cc;
  if (f == "cd") return &p.given_cd;
  if (f == "dc") return &p.given_dc;
  if (f == "dd") return &p.given_dd;
  return nullptr;
}

double* stat_field(StatisticalParams& s, std::string_view key) {
  auto rest = key.substr(5);  // after "stat."
  if (rest.rfind("pd.fair.", 0) == 0) return pd_field(s.fair, rest.substr(8));
  if (rest.rfind("pd.selfish.", 0) == 0) return pd_field(s.selfish, rest.substr(11));
  if (rest.rfind("ug.offer.", 0) == 0) {
    auto f = rest.substr(9);
    if (f == "constant") return &s.offer.constant;
    if (f == "round") return &s.offer.round;
    if (f == "proposer_selfish") return &s.offer.proposer_selfish;
    if (f == "responder_selfish") return &s.offer.responder_selfish;
    if (f == "noise_sd") return &s.offer.noise_sd;
  }
  if (rest.rfind("ug.reject.", 0) == 0) {
    auto f = rest.substr(10);
    if (f == "constant") return &s.reject.constant;
    if (f == "offer") return &s.reject.offer;
    if (f == "round") return &s.reject.round;
    if (f == "proposer_selfish") return &s.reject.proposer_selfish;
    if (f == "responder_selfish") return &s.reject.responder_selfish;
  }
  return nullptr;
}

void put_stat(std::map<std::string, std::string>& m, const StatisticalParams& s) {
  auto pd = [&](const char* name, const PDPolicy& p) {
    const std::string base = std::string("stat.pd.") + name + ".";
    m[base + "first"] = fmt_double(p.first);
    m[base + "cc"] = fmt_double(p.given_cc);
    m[base + "cd"] = fmt_double(p.given_cd);
    m[base + "dc"] = fmt_double(p.given_dc);
    m[base + "dd"] = fmt_double(p.given_dd);
  };
  pd("fair", s.fair);
  pd("selfish", s.selfish);
  m["stat.ug.offer.constant"] = fmt_double(s.offer.constant);
  m["stat.ug.offer.round"] = fmt_double(s.offer.round);
  m["stat.ug.offer.proposer_selfish"] = fmt_double(s.offer.proposer_selfish);
  m["stat.ug.offer.responder_selfish"] = fmt_double(s.offer.responder_selfish);
  m["stat.ug.offer.noise_sd"] = fmt_double(s.offer.noise_sd);
  m["stat.ug.reject.constant"] = fmt_double(s.reject.constant);
  m["stat.ug.reject.offer"] = fmt_double(s.reject.offer);
  m["stat.ug.reject.round"] = fmt_double(s.reject.round);
  m["stat.ug.reject.proposer_selfish"] = fmt_double(s.reject.proposer_selfish);
  m["stat.ug.reject.responder_selfish"] = fmt_double(s.reject.responder_selfish);
}

}  // namespace

bool ExperimentPlan::uses_remote() const {
  return seat_a.backend == Backend::Remote || seat_b.backend == Backend::Remote;
}

std::vector<std::string> ExperimentPlan::effective_script(Seat s) const {
  const auto& cfg = seat(s);
  if (!cfg.script.empty()) return cfg.script;
  if (game == GameKind::PrisonersDilemma) return {"tft"};
  return {s == Seat::A ? "50" : "accept"};
}

std::map<std::string, std::string> ExperimentPlan::effective_config() const {
  std::map<std::string, std::string> m;
  m["game"] = std::string(to_string(game));
  m["sessions_per_treatment"] = std::to_string(sessions_per_treatment);
  m["rounds"] = std::to_string(rounds);
  m["seed_base"] = std::to_string(seed_base);
  m["output"] = output.string();
  m["concurrency"] = std::to_string(concurrency);
  m["timestamps"] = timestamps ? "true" : "false";
  for (Seat s : {Seat::A, Seat::B}) {
    const std::string base = s == Seat::A ? "seat_a." : "seat_b.";
    const auto& c = seat(s);
    m[base + "backend"] = std::string(to_string(c.backend));
    if (c.backend == Backend::Remote) {
      m[base + "model"] = c.model_id;
      m[base + "temperature"] = fmt_double(c.temperature);
      m[base + "max_attempts"] = std::to_string(c.max_attempts);
    }
    if (c.backend == Backend::Scripted) m[base + "script"] = join_list(effective_script(s));
  }
  if (uses_remote()) {
    m["remote.endpoint"] = remote.endpoint;
    m["remote.api_key_env"] = remote.api_key_env;
    m["remote.transport_retries"] = std::to_string(remote.transport_retries);
    m["remote.backoff_ms"] = std::to_string(remote.backoff_ms);
    m["remote.timeout_s"] = std::to_string(remote.timeout_s);
    m["remote.rate_limit_ms"] = std::to_string(remote.rate_limit_ms);
  }
  if (seat_a.backend == Backend::Statistical || seat_b.backend == Backend::Statistical) put_stat(m, stat);
  return m;
}

std::string ExperimentPlan::hash() const {
  static const char* kOperational[] = {"output", "sessions_per_treatment", "concurrency", "timestamps",
                                       "remote.api_key_env", "remote.transport_retries", "remote.backoff_ms",
                                       "remote.timeout_s", "remote.rate_limit_ms"};
  auto cfg = effective_config();
  for (const char* k : kOperational) cfg.erase(k);
  std::string canon;
  for (const auto& [k, v] : cfg) canon += k + "=" + v + "\n";
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(stable_hash(canon)));
  return buf;
}

void ExperimentPlan::validate() const {
  if (sessions_per_treatment < 1) throw ConfigError("sessions_per_treatment must be >= 1");
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
  for (Seat s : {Seat::A, Seat::B}) {
    const auto& c = seat(s);
    if (c.backend == Backend::Remote && c.model_id.empty()) {
      throw ConfigError(std::string("seat_") + std::string(to_string(s)) + " uses the remote backend but has no model");
    }
  }
  stat.fair.validate();
  stat.selfish.validate();
}

void apply_setting(ExperimentPlan& plan, std::string_view key_in, std::string_view value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "game") {
    try {
      plan.game = parse_game(value);
    } catch (const UsageError& e) {
      throw ConfigError(e.what());
    }
  } else if (key == "sessions_per_treatment" || key == "sessions") {
    plan.sessions_per_treatment = static_cast<int>(to_int(key, value));
  } else if (key == "rounds") {
    plan.rounds = static_cast<int>(to_int(key, value));
  } else if (key == "seed_base" || key == "seed") {
    plan.seed_base = std::strtoull(value.c_str(), nullptr, 10);
    if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
      throw ConfigError("'seed_base' expects a non-negative integer");
    }
  } else if (key == "output") {
    plan.output = value;
  } else if (key == "concurrency") {
    plan.concurrency = static_cast<int>(to_int(key, value));
  } else if (key == "timestamps") {
    plan.timestamps = to_bool(key, value);
  } else if (key == "backend" || key == "model" || key == "temperature") {
    apply_seat(plan.seat_a, key, key, value);
    apply_seat(plan.seat_b, key, key, value);
  } else if (key.rfind("seat_a.", 0) == 0) {
    apply_seat(plan.seat_a, std::string_view(key).substr(7), key, value);
  } else if (key.rfind("seat_b.", 0) == 0) {
    apply_seat(plan.seat_b, std::string_view(key).substr(7), key, value);
  } else if (key == "remote.endpoint") {
    plan.remote.endpoint = value;
  } else if (key == "remote.api_key_env") {
    plan.remote.api_key_env = value;
  } else if (key == "remote.transport_retries") {
    plan.remote.transport_retries = static_cast<int>(to_int(key, value));
  } else if (key == "remote.backoff_ms") {
    plan.remote.backoff_ms = static_cast<int>(to_int(key, value));
  } else if (key == "remote.timeout_s") {
    plan.remote.timeout_s = static_cast<int>(to_int(key, value));
  } else if (key == "remote.rate_limit_ms") {
    plan.remote.rate_limit_ms = static_cast<int>(to_int(key, value));
  } else if (key.rfind("stat.", 0) == 0) {
    double* field = stat_field(plan.stat, key);
    if (!field) throw ConfigError("unknown plan key '" + key + "'");
    *field = to_double(key, value);
  } else {
    throw ConfigError("unknown plan key '" + key + "'");
  }
}

ExperimentPlan parse_plan(std::string_view text) {
  ExperimentPlan plan;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line[0] != '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ConfigError("plan line " + std::to_string(line_no) + ": expected key = value");
      apply_setting(plan, line.substr(0, eq), line.substr(eq + 1));
    }
    if (nl == text.size()) break;
  }
  return plan;
}

ExperimentPlan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read plan file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

AgentSpec agent_spec_for(const ExperimentPlan& plan, const Treatment& treatment, Seat seat, std::uint64_t seed) {
  const auto& cfg = plan.seat(seat);
  AgentSpec spec;
  spec.backend = cfg.backend;
  spec.trait = treatment.trait(seat);
  spec.seed = seed;
  switch (cfg.backend) {
    case Backend::Remote:
      spec.model_id = cfg.model_id;
      spec.temperature = cfg.temperature;
      spec.max_attempts = cfg.max_attempts;
      break;
    case Backend::Scripted: spec.script = plan.effective_script(seat); break;
    case Backend::Statistical: spec.policy = plan.stat; break;
  }
  return spec;
}

std::string require_api_key(const RemoteSettings& remote) {
  const char* v = std::getenv(remote.api_key_env.c_str());
  if (!v || !*v) {
    throw ConfigError("environment variable " + remote.api_key_env + " is not set (required for the remote backend)");
  }
  return v;
}

HttpChatConfig chat_config_for(const RemoteSettings& remote, const std::string& api_key, int concurrency) {
  HttpChatConfig c;
  c.endpoint = remote.endpoint;
  c.api_key = api_key;
  c.max_retries = remote.transport_retries;
  c.backoff_base = std::chrono::milliseconds(remote.backoff_ms);
  c.timeout = std::chrono::seconds(remote.timeout_s);
  c.max_concurrent = concurrency;
  c.min_interval = std::chrono::milliseconds(remote.rate_limit_ms);
  return c;
}

}  // namespace gamelab
