#include "absforge/proposer.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "absforge/error.hpp"
#include "absforge/features.hpp"

namespace absforge::proposer {

using nlohmann::json;

const std::string_view kDocSchema = R"schema({
  "features": [
    {"name": "<variable name>", "kind": "boolean" | "numerical", "definition": "<formula or count term>"}
  ],
  "qnp": {
    "bools": ["<boolean variable>", ...],
    "nums": ["<numerical variable>", ...],
    "actions": [
      {"name": "<HL action>",
       "pre": ["p", "!p", "n>0", "n=0", ...],
       "bool_eff": ["p", "!p", ...],
       "num_eff": ["inc(n)", "dec(n)", ...]}
    ],
    "init": ["<literal>", ...],
    "goal": ["<literal>", ...]
  },
  "action_map": [
    {"hl_name": "<HL action>", "ll_schema": "<PDDL action schema name>"}
  ]
}
Rules: every QNP variable has exactly one feature of the same name; boolean
variables use formulas and numerical variables use (count ...) terms; an
action with dec(n) must have n>0 in its precondition; no action both
increases and decreases a variable; each HL action maps to one PDDL schema.
)schema";

const std::string_view kSystemPreamble =
    "You are an expert in PDDL planning and generalized planning. You build qualitative numerical "
    "planning (QNP) abstractions of planning domains, with features written in first-order logic "
    "with counting.";

DocError::DocError(Kind kind, std::string where, const std::string& message)
    : std::runtime_error(where.empty() ? message : where + ": " + message), kind_(kind), where_(std::move(where)) {}

ProtocolError::ProtocolError(int status, std::string excerpt)
    : std::runtime_error("chat endpoint returned status " + std::to_string(status) + ": " + excerpt),
      status_(status),
      excerpt_(std::move(excerpt)) {}

// ---------------------------------------------------------------------------
// Document JSON

json AbstractionDoc::to_json() const {
  json j;
  j["features"] = json::array();
  for (const auto& f : features) j["features"].push_back({{"name", f.name}, {"kind", f.kind}, {"definition", f.definition}});
  json q;
  q["bools"] = qnp.bools;
  q["nums"] = qnp.nums;
  q["actions"] = json::array();
  for (const auto& a : qnp.actions) {
    q["actions"].push_back({{"name", a.name}, {"pre", a.pre}, {"bool_eff", a.bool_eff}, {"num_eff", a.num_eff}});
  }
  q["init"] = qnp.init;
  q["goal"] = qnp.goal;
  j["qnp"] = std::move(q);
  j["action_map"] = json::array();
  for (const auto& m : action_map) j["action_map"].push_back({{"hl_name", m.hl_name}, {"ll_schema", m.ll_schema}});
  return j;
}

std::string AbstractionDoc::serialize() const { return to_json().dump(2) + "\n"; }

std::optional<json> extract_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos; start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}' && --depth == 0) {
        auto parsed = json::parse(text.substr(start, i - start + 1), nullptr, false);
        if (!parsed.is_discarded() && parsed.is_object()) return parsed;
        break;
      }
    }
  }
  return std::nullopt;
}

namespace {

[[noreturn]] void violation(const std::string& path, const std::string& msg) {
  throw DocError(DocError::Kind::SchemaViolation, path, msg);
}

const json& member(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) violation(path, std::string("missing field '") + key + "'");
  return obj[key];
}

std::string string_at(const json& obj, const char* key, const std::string& path) {
  const auto& v = member(obj, key, path);
  if (!v.is_string()) violation(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<std::string> strings_at(const json& obj, const char* key, const std::string& path, bool optional) {
  if (!obj.contains(key)) {
    if (optional) return {};
    violation(path, std::string("missing field '") + key + "'");
  }
  const auto& v = obj[key];
  const std::string here = path.empty() ? key : path + "." + key;
  if (!v.is_array()) violation(here, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) violation(here + "[" + std::to_string(i) + "]", "expected a string");
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

const json& array_at(const json& obj, const char* key, const std::string& path) {
  const auto& v = member(obj, key, path);
  if (!v.is_array()) violation(path.empty() ? key : path + "." + key, "expected an array");
  return v;
}

std::string strip(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

/// "inc(N)" -> {N, true}; nullopt when malformed.
std::optional<std::pair<std::string, bool>> parse_num_effect(std::string_view text) {
  std::string t = strip(text);
  if (t.size() < 6 || t.back() != ')') return std::nullopt;
  bool inc = t.starts_with("inc(");
  if (!inc && !t.starts_with("dec(")) return std::nullopt;
  return std::make_pair(t.substr(4, t.size() - 5), inc);
}

}  // namespace

AbstractionDoc doc_from_json(const json& j) {
  if (!j.is_object()) violation("", "expected a JSON object");
  AbstractionDoc doc;
  const auto& feats = array_at(j, "features", "");
  for (std::size_t i = 0; i < feats.size(); ++i) {
    const std::string path = "features[" + std::to_string(i) + "]";
    if (!feats[i].is_object()) violation(path, "expected an object");
    FeatureDoc f{string_at(feats[i], "name", path), string_at(feats[i], "kind", path),
                 string_at(feats[i], "definition", path)};
    if (f.kind != "boolean" && f.kind != "numerical") violation(path + ".kind", "expected \"boolean\" or \"numerical\"");
    doc.features.push_back(std::move(f));
  }
  const auto& q = member(j, "qnp", "");
  if (!q.is_object()) violation("qnp", "expected an object");
  doc.qnp.bools = strings_at(q, "bools", "qnp", false);
  doc.qnp.nums = strings_at(q, "nums", "qnp", false);
  const auto& acts = array_at(q, "actions", "qnp");
  for (std::size_t i = 0; i < acts.size(); ++i) {
    const std::string path = "qnp.actions[" + std::to_string(i) + "]";
    if (!acts[i].is_object()) violation(path, "expected an object");
    ActionDoc a;
    a.name = string_at(acts[i], "name", path);
    a.pre = strings_at(acts[i], "pre", path, true);
    a.bool_eff = strings_at(acts[i], "bool_eff", path, true);
    a.num_eff = strings_at(acts[i], "num_eff", path, true);
    doc.qnp.actions.push_back(std::move(a));
  }
  doc.qnp.init = strings_at(q, "init", "qnp", false);
  doc.qnp.goal = strings_at(q, "goal", "qnp", false);
  const auto& map = array_at(j, "action_map", "");
  for (std::size_t i = 0; i < map.size(); ++i) {
    const std::string path = "action_map[" + std::to_string(i) + "]";
    if (!map[i].is_object()) violation(path, "expected an object");
    doc.action_map.push_back({string_at(map[i], "hl_name", path), string_at(map[i], "ll_schema", path)});
  }
  return doc;
}

AbstractionDoc parse_abstraction_doc(std::string_view text, const pddl::Domain* dom) {
  auto j = extract_json_object(text);
  if (!j) throw DocError(DocError::Kind::NoJsonFound, "", "no JSON object found in the reply");
  AbstractionDoc doc = doc_from_json(*j);
  for (std::size_t i = 0; i < doc.qnp.actions.size(); ++i) {
    const auto& a = doc.qnp.actions[i];
    const std::string path = "qnp.actions[" + std::to_string(i) + "]";
    for (const auto& e : a.num_eff) {
      auto eff = parse_num_effect(e);
      if (!eff) violation(path + ".num_eff", "malformed numerical effect '" + e + "'");
      if (eff->second) continue;
      bool guarded = std::any_of(a.pre.begin(), a.pre.end(), [&](const std::string& p) { return strip(p) == eff->first + ">0"; });
      if (!guarded) violation(path, "action " + a.name + " decrements " + eff->first + " without the precondition " + eff->first + ">0");
    }
  }
  if (dom) {
    for (const auto& f : doc.features) {
      try {
        (void)features::parse_feature(f.name, f.definition, *dom);
      } catch (const ParseError& e) {
        throw DocError(DocError::Kind::FormulaParseError, f.name, e.what());
      }
    }
  }
  return doc;
}

std::variant<refinement::Abstraction, pipeline::DebugReport> validate_doc(const AbstractionDoc& doc,
                                                                          const pddl::Domain& dom) {
  std::vector<std::string> errs;

  qnp::Problem names;
  bool names_ok = true;
  try {
    names = qnp::Problem(doc.qnp.bools, doc.qnp.nums, {}, {}, {});
  } catch (const qnp::QnpError& e) {
    errs.push_back(std::string("qnp variables: ") + e.what());
    names_ok = false;
  }

  std::vector<qnp::Action> actions;
  std::vector<qnp::Literal> init, goal;
  if (names_ok) {
    auto literals = [&](const std::vector<std::string>& texts, const std::string& where, bool bool_only) {
      std::vector<qnp::Literal> out;
      for (const auto& t : texts) {
        try {
          auto l = names.parse_literal(t);
          if (bool_only && l.kind != qnp::VarKind::Bool) {
            errs.push_back(where + ": '" + t + "' is numerical; use inc/dec in num_eff");
            continue;
          }
          out.push_back(l);
        } catch (const qnp::QnpError& e) {
          errs.push_back(where + ": " + e.what());
        }
      }
      return out;
    };
    std::set<std::string> seen_actions;
    for (const auto& a : doc.qnp.actions) {
      const std::string where = "action " + a.name;
      if (!seen_actions.insert(a.name).second) errs.push_back(where + ": duplicate action name");
      const std::size_t before = errs.size();
      auto pre = literals(a.pre, where + " pre", false);
      auto eff = literals(a.bool_eff, where + " bool_eff", true);
      std::vector<qnp::NumEffect> num;
      for (const auto& e : a.num_eff) {
        auto parsed = parse_num_effect(e);
        auto var = parsed ? names.find_num(parsed->first) : std::nullopt;
        if (!var) {
          errs.push_back(where + " num_eff: '" + e + "' is not inc(n) or dec(n) over a numerical variable");
          continue;
        }
        num.push_back({*var, parsed->second});
      }
      if (errs.size() != before) continue;
      try {
        actions.push_back(qnp::make_action(a.name, std::move(pre), std::move(eff), std::move(num)));
      } catch (const qnp::QnpError& e) {
        errs.push_back(where + ": " + e.what());
      }
    }
    init = literals(doc.qnp.init, "init", false);
    goal = literals(doc.qnp.goal, "goal", false);
  }

  // Features: one per variable, matching kinds.
  refinement::RefinementMapping m;
  std::map<std::string, features::Feature> parsed;
  std::set<std::string> declared(doc.qnp.bools.begin(), doc.qnp.bools.end());
  declared.insert(doc.qnp.nums.begin(), doc.qnp.nums.end());
  for (const auto& f : doc.features) {
    if (parsed.count(f.name)) {
      errs.push_back("feature " + f.name + ": defined more than once");
      continue;
    }
    if (!declared.count(f.name)) {
      errs.push_back("feature " + f.name + ": not a QNP variable");
      continue;
    }
    try {
      auto feat = features::parse_feature(f.name, f.definition, dom);
      const bool numerical = feat.kind == features::FeatureKind::Numerical;
      if (numerical != (f.kind == "numerical")) {
        errs.push_back("feature " + f.name + ": declared " + f.kind + " but its definition is " +
                       (numerical ? "a count term" : "a formula"));
        continue;
      }
      parsed.emplace(f.name, std::move(feat));
    } catch (const ParseError& e) {
      errs.push_back("feature " + f.name + ": " + e.what());
    }
  }
  auto take = [&](const std::string& var, features::FeatureKind kind, std::vector<features::Feature>& out) {
    auto it = parsed.find(var);
    if (it == parsed.end()) {
      bool defined = std::any_of(doc.features.begin(), doc.features.end(), [&](const FeatureDoc& f) { return f.name == var; });
      if (!defined) errs.push_back("variable " + var + ": no feature defines it");
      return;
    }
    if (it->second.kind != kind) {
      errs.push_back("variable " + var + ": is " + (kind == features::FeatureKind::Boolean ? "boolean" : "numerical") +
                     " in the QNP but its feature is not");
      return;
    }
    out.push_back(it->second);
  };
  for (const auto& b : doc.qnp.bools) take(b, features::FeatureKind::Boolean, m.bool_features);
  for (const auto& n : doc.qnp.nums) take(n, features::FeatureKind::Numerical, m.num_features);

  // Action map: known HL names, existing schemata, at most one entry each.
  std::map<std::string, std::string> schema_of;
  for (const auto& e : doc.action_map) {
    bool known = std::any_of(doc.qnp.actions.begin(), doc.qnp.actions.end(), [&](const ActionDoc& a) { return a.name == e.hl_name; });
    if (!known) errs.push_back("action_map: " + e.hl_name + " is not a QNP action");
    if (!dom.find_action(e.ll_schema)) errs.push_back("action_map: " + e.hl_name + " maps to unknown schema " + e.ll_schema);
    if (!schema_of.emplace(e.hl_name, e.ll_schema).second) errs.push_back("action_map: " + e.hl_name + " is mapped twice");
  }

  std::optional<qnp::Problem> problem;
  if (errs.empty()) {
    try {
      problem.emplace(doc.qnp.bools, doc.qnp.nums, actions, init, goal);
    } catch (const qnp::QnpError& e) {
      errs.push_back(std::string("qnp: ") + e.what());
    }
  }
  if (!errs.empty()) {
    pipeline::DebugReport r;
    r.stage = pipeline::Stage::DocInvalid;
    r.detail = std::to_string(errs.size()) + " problem(s) in the abstraction document";
    r.violations = std::move(errs);
    return r;
  }
  for (const auto& a : problem->actions()) {
    m.hl_actions.push_back(a.name);
    auto it = schema_of.find(a.name);
    m.schema_of.push_back(it == schema_of.end() ? std::nullopt : std::optional<std::string>(it->second));
  }
  return refinement::Abstraction{std::move(*problem), std::move(m)};
}

// ---------------------------------------------------------------------------
// Prompts

namespace {

std::string block(std::string_view title, std::string_view body) {
  std::string out(title);
  out += ":\n```\n";
  out += body;
  if (!body.empty() && body.back() != '\n') out += '\n';
  out += "```\n";
  return out;
}

constexpr std::string_view kFeatureOutput = R"({"features": [{"name": "<name>", "kind": "boolean" | "numerical", "definition": "<formula or count term>"}]})";

}  // namespace

std::string render_feature_prompt(const pddl::Domain& dom) {
  std::string out = "Input: Domain D_l\n";
  out += block("D_l", dom.source.empty() ? "(define (domain " + dom.name + "))" : dom.source);
  out += "Generate Boolean and numerical features according to the following template,\n";
  out += "- Boolean feature: p := exists x. phi(x), where phi(x) is a first-order formula over D_l.\n";
  out += "- Numerical feature: n := # x. delta(x), where delta(x) is a first-order formula over D_l.\n";
  out += "Output the Boolean feature set B and numerical feature set X.\n\n";
  out += "Write each definition in this s-expression grammar (a Boolean feature is a formula f, "
         "a numerical feature is a count term):\n";
  out += block("grammar", features::kGrammar);
  out += "Reply with one JSON object of this form:\n";
  out += block("format", kFeatureOutput);
  return out;
}

std::string render_abstraction_prompt(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                                      std::string_view features) {
  if (insts.empty()) throw EmptyTrainingSet("the abstraction prompt needs at least one training instance");
  if (features.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    throw std::invalid_argument("the abstraction prompt needs a nonempty feature set");
  }
  std::string names;
  for (std::size_t i = 0; i < insts.size(); ++i) names += (i ? ", " : "") + insts[i].name();
  std::string out = "Input: Domain D_l, Instances {" + names + "}\n";
  out += block("D_l", dom.source);
  for (const auto& inst : insts) out += block("Instance " + inst.name(), inst.source());
  out += block("Features", features);
  out += "Generate a QNP abstraction for instances based on the feature as follows.\n";
  out += "- Step 1: compute the abstraction S_0 for the initial states in {" + names + "};\n";
  out += "- Step 2: compute the abstraction S_G for the goals in {" + names + "};\n";
  out += "- Step 3: compute the abstraction action set A_h based on the action set A_l of domain D_l\n";
  out += "Output QNP Q = <D_h, S_0, S_G>, where D_h = <B, X, A_h>, and refinement mapping m.\n\n";
  out += "Feature definitions use this grammar:\n";
  out += block("grammar", features::kGrammar);
  out += "Reply with one JSON object in this format (S_0 is qnp.init, S_G is qnp.goal, m is the features "
         "together with action_map):\n";
  out += block("format", kDocSchema);
  return out;
}

// ---------------------------------------------------------------------------
// Conversations

json Conversation::to_json() const {
  json j = json::array();
  for (const auto& m : messages) j.push_back({{"role", m.role}, {"content", m.content}});
  return j;
}

std::size_t estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

std::size_t estimate_tokens(const Conversation& c) {
  std::size_t total = 0;
  for (const auto& m : c.messages) total += estimate_tokens(m.content);
  return total;
}

void truncate_conversation(Conversation& c, std::size_t budget) {
  auto& msgs = c.messages;
  const std::size_t first = (!msgs.empty() && msgs.front().role == "system") ? 1 : 0;
  while (estimate_tokens(c) > budget && msgs.size() > first + 1) {
    msgs.erase(msgs.begin() + static_cast<std::ptrdiff_t>(first));
  }
}

// ---------------------------------------------------------------------------
// Config

ProposerConfig ProposerConfig::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("proposer config must be a JSON object");
  for (const auto* banned : {"api_key", "key", "token"}) {
    if (j.contains(banned)) {
      throw std::invalid_argument(std::string("proposer config must not contain '") + banned +
                                  "'; put the key in the environment variable named by api_key_env");
    }
  }
  ProposerConfig c;
  const std::string kind = j.value("kind", "file");
  if (kind == "llm") {
    c.kind = Kind::Llm;
  } else if (kind == "file") {
    c.kind = Kind::File;
  } else {
    throw std::invalid_argument("proposer kind must be \"llm\" or \"file\"");
  }
  c.endpoint = j.value("endpoint", "");
  c.model = j.value("model", "");
  c.api_key_env = j.value("api_key_env", c.api_key_env);
  c.timeout = std::chrono::seconds(j.value("timeout_s", c.timeout.count()));
  c.max_retries = j.value("max_retries", c.max_retries);
  c.backoff = std::chrono::milliseconds(j.value("backoff_ms", c.backoff.count()));
  c.token_budget = j.value("token_budget", c.token_budget);
  c.files = j.value("files", std::vector<std::string>{});
  if (c.kind == Kind::Llm && (c.endpoint.empty() || c.model.empty())) {
    throw std::invalid_argument("an llm proposer needs both endpoint and model");
  }
  return c;
}

json ProposerConfig::to_json() const {
  json j;
  j["kind"] = kind == Kind::Llm ? "llm" : "file";
  j["endpoint"] = endpoint;
  j["model"] = model;
  j["api_key_env"] = api_key_env;
  j["timeout_s"] = timeout.count();
  j["max_retries"] = max_retries;
  j["backoff_ms"] = backoff.count();
  j["token_budget"] = token_budget;
  j["files"] = files;
  return j;
}

// ---------------------------------------------------------------------------
// Proposers

FileProposer::FileProposer(std::vector<std::string> paths) : paths_(std::move(paths)) {}

std::string FileProposer::next_doc() {
  if (next_ >= paths_.size()) {
    throw ScriptExhausted("scripted proposer has no document for call " + std::to_string(next_));
  }
  const std::string& path = paths_[next_++];
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read scripted document " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string FileProposer::propose_initial(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                                          Conversation& conv) {
  std::string doc = next_doc();
  conv.messages.push_back({"system", std::string(kSystemPreamble)});
  conv.messages.push_back({"user", render_feature_prompt(dom)});
  if (!insts.empty()) conv.messages.push_back({"user", render_abstraction_prompt(dom, insts, "(scripted)")});
  conv.messages.push_back({"assistant", doc});
  return doc;
}

std::string FileProposer::propose_fix(Conversation& conv, std::string_view feedback) {
  std::string doc = next_doc();
  conv.messages.push_back({"user", std::string(feedback)});
  conv.messages.push_back({"assistant", doc});
  return doc;
}

LlmProposer::LlmProposer(ProposerConfig cfg, ChatFn chat, LogSink log)
    : cfg_(std::move(cfg)), chat_(std::move(chat)), log_(std::move(log)) {
  if (!chat_) {
    chat_ = [this](const Conversation& c) { return llm_chat(cfg_, c, log_); };
  }
}

std::string LlmProposer::ask(Conversation& conv, std::string prompt) {
  conv.messages.push_back({"user", std::move(prompt)});
  truncate_conversation(conv, cfg_.token_budget);
  std::string reply = chat_(conv);
  conv.messages.push_back({"assistant", reply});
  return reply;
}

std::string LlmProposer::propose_initial(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                                         Conversation& conv) {
  conv.messages.push_back({"system", std::string(kSystemPreamble)});
  std::string features = ask(conv, render_feature_prompt(dom));
  return ask(conv, render_abstraction_prompt(dom, insts, features));
}

std::string LlmProposer::propose_fix(Conversation& conv, std::string_view feedback) {
  return ask(conv, std::string(feedback));
}

std::unique_ptr<Proposer> make_proposer(const ProposerConfig& cfg, LogSink log) {
  if (cfg.kind == ProposerConfig::Kind::File) return std::make_unique<FileProposer>(cfg.files);
  return std::make_unique<LlmProposer>(cfg, ChatFn{}, std::move(log));
}

}  // namespace absforge::proposer
