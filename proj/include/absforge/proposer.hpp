#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "absforge/pddl.hpp"
#include "absforge/pipeline.hpp"
#include "absforge/refinement.hpp"

namespace absforge::proposer {

// ---------------------------------------------------------------------------
// Abstraction document

struct FeatureDoc {
  std::string name;
  std::string kind;  // "boolean" | "numerical"
  std::string definition;

  friend bool operator==(const FeatureDoc&, const FeatureDoc&) = default;
};

struct ActionDoc {
  std::string name;
  std::vector<std::string> pre;       // "N>0", "!H", ...
  std::vector<std::string> bool_eff;  // "H", "!A"
  std::vector<std::string> num_eff;   // "inc(N)", "dec(N)"

  friend bool operator==(const ActionDoc&, const ActionDoc&) = default;
};

struct QnpDoc {
  std::vector<std::string> bools;
  std::vector<std::string> nums;
  std::vector<ActionDoc> actions;
  std::vector<std::string> init;
  std::vector<std::string> goal;

  friend bool operator==(const QnpDoc&, const QnpDoc&) = default;
};

struct ActionMapEntry {
  std::string hl_name;
  std::string ll_schema;

  friend bool operator==(const ActionMapEntry&, const ActionMapEntry&) = default;
};

/// The JSON exchanged with proposers; see docs/abstraction-doc.md.
struct AbstractionDoc {
  std::vector<FeatureDoc> features;
  QnpDoc qnp;
  std::vector<ActionMapEntry> action_map;

  nlohmann::json to_json() const;
  /// Pretty-printed JSON with a trailing newline.
  std::string serialize() const;
  friend bool operator==(const AbstractionDoc&, const AbstractionDoc&) = default;
};

/// The JSON schema text embedded in prompts.
extern const std::string_view kDocSchema;

class DocError : public std::runtime_error {
 public:
  enum class Kind { NoJsonFound, SchemaViolation, FormulaParseError };
  DocError(Kind kind, std::string where, const std::string& message);
  Kind kind() const { return kind_; }
  /// JSON path for schema violations, the feature name for formula errors.
  const std::string& where() const { return where_; }

 private:
  Kind kind_;
  std::string where_;
};

/// Returns the first balanced `{...}` in `text` that parses as JSON.
std::optional<nlohmann::json> extract_json_object(std::string_view text);

/// Extracts and schema-checks a document. Also enforces the QNP action rules
/// that need no domain (dec(v) requires v>0). When `dom` is given, feature
/// definitions are parsed against it. Throws DocError.
AbstractionDoc parse_abstraction_doc(std::string_view text, const pddl::Domain* dom = nullptr);
AbstractionDoc doc_from_json(const nlohmann::json& j);

/// Builds the abstraction, or a DOC_INVALID report naming every violation.
std::variant<refinement::Abstraction, pipeline::DebugReport> validate_doc(const AbstractionDoc& doc,
                                                                          const pddl::Domain& dom);

// ---------------------------------------------------------------------------
// Prompts

class EmptyTrainingSet : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

extern const std::string_view kSystemPreamble;

std::string render_feature_prompt(const pddl::Domain& dom);

/// `features` is the feature set as text (typically the model's reply to the
/// feature prompt). Throws EmptyTrainingSet without instances and
/// std::invalid_argument for an empty feature text.
std::string render_abstraction_prompt(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                                      std::string_view features);

// ---------------------------------------------------------------------------
// Conversations

struct Message {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct Conversation {
  std::vector<Message> messages;

  nlohmann::json to_json() const;
};

/// Rough token count: one token per four characters, rounded up.
std::size_t estimate_tokens(std::string_view text);
std::size_t estimate_tokens(const Conversation& c);

/// Drops the oldest messages until the estimate fits `budget`, never
/// dropping the leading system message or the last message.
void truncate_conversation(Conversation& c, std::size_t budget);

// ---------------------------------------------------------------------------
// Configuration and the chat client

struct ProposerConfig {
  enum class Kind { Llm, File };
  Kind kind = Kind::File;
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string model;
  std::string api_key_env = "ABSFORGE_API_KEY";
  std::chrono::seconds timeout{120};
  std::size_t max_retries = 3;
  std::chrono::milliseconds backoff{500};
  std::size_t token_budget = 100'000;
  std::vector<std::string> files;

  /// Rejects configs that carry an API key or lack endpoint/model for the
  /// llm kind. Throws std::invalid_argument.
  static ProposerConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

class AuthError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class TimeoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(int status, std::string excerpt);
  int status() const { return status_; }
  const std::string& excerpt() const { return excerpt_; }

 private:
  int status_;
  std::string excerpt_;
};
class MissingApiKey : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ScriptExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LogSink = std::function<void(std::string_view)>;

/// POSTs {model, messages} to the endpoint and returns
/// choices[0].message.content. Retries 5xx, 429 and transport failures with
/// exponential backoff; 401/403 fail at once with AuthError.
std::string llm_chat(const ProposerConfig& cfg, const Conversation& conv, const LogSink& log = {});

// ---------------------------------------------------------------------------
// Proposers

class Proposer {
 public:
  virtual ~Proposer() = default;
  /// Returns the raw reply that should contain an abstraction document.
  virtual std::string propose_initial(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                                      Conversation& conv) = 0;
  virtual std::string propose_fix(Conversation& conv, std::string_view feedback) = 0;
};

/// Returns the i-th scripted document text on the i-th call.
class FileProposer : public Proposer {
 public:
  explicit FileProposer(std::vector<std::string> paths);
  std::string propose_initial(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                              Conversation& conv) override;
  std::string propose_fix(Conversation& conv, std::string_view feedback) override;
  std::size_t calls() const { return next_; }

 private:
  std::string next_doc();
  std::vector<std::string> paths_;
  std::size_t next_ = 0;
};

using ChatFn = std::function<std::string(const Conversation&)>;

/// Two calls for the initial proposal (features, then the abstraction) and
/// one per fix. The whole conversation is resent each time.
class LlmProposer : public Proposer {
 public:
  explicit LlmProposer(ProposerConfig cfg, ChatFn chat = {}, LogSink log = {});
  LlmProposer(const LlmProposer&) = delete;
  LlmProposer& operator=(const LlmProposer&) = delete;
  std::string propose_initial(const pddl::Domain& dom, std::span<const pddl::Instance> insts,
                              Conversation& conv) override;
  std::string propose_fix(Conversation& conv, std::string_view feedback) override;

 private:
  std::string ask(Conversation& conv, std::string prompt);
  ProposerConfig cfg_;
  ChatFn chat_;
  LogSink log_;
};

std::unique_ptr<Proposer> make_proposer(const ProposerConfig& cfg, LogSink log = {});

}  // namespace absforge::proposer
