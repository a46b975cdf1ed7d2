#pragma once

// Strategy/selection advisors: a live chat-completions client plus scripted
// and replay backends that stand in for it.

#include <chrono>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hh/core.hpp"
#include "hh/heuristics.hpp"

namespace hh {

enum class AdvisorRole { Evolve, Refine, Filter, Select };

const char* to_string(AdvisorRole role);

struct DecodingParams {
  double temperature = 0.7;
  double top_p = 0.95;
  int max_tokens = 1600;
};

/// Structured inputs the scripted backend reasons over. Never serialized;
/// live and replay backends only see the prompt text.
struct ScriptedContext {
  std::vector<HeuristicGenome> pool;       // filter, select
  const ProblemState* state = nullptr;     // select
  const HeuristicGenome* genome = nullptr; // evolve, refine
  std::function<double(const HeuristicGenome&)> evaluate;  // evolve, refine
  ObjectiveSense sense = ObjectiveSense::Minimize;
  int sample_index = 0;  // select: index within a group of proposals
};

struct AdvisorRequest {
  AdvisorRole role = AdvisorRole::Filter;
  std::string prompt;
  std::size_t context_budget = 1000;  // characters of rendered problem state
  DecodingParams decoding;
  const ScriptedContext* context = nullptr;
};

/// Hex FNV-1a of (role, prompt); the replay key.
std::string request_hash(const AdvisorRequest& request);

class Advisor {
 public:
  virtual ~Advisor() = default;
  /// Raw reply text. Throws Timeout, HttpError, BudgetExhausted,
  /// TranscriptMiss or AdvisorUnavailable depending on the backend.
  virtual std::string complete(const AdvisorRequest& request) = 0;
  virtual std::string backend_name() const = 0;
};

using AdvisorPtr = std::shared_ptr<Advisor>;

class ScriptedAdvisor : public Advisor {
 public:
  std::string complete(const AdvisorRequest& request) override;
  std::string backend_name() const override { return "scripted"; }
};

struct TranscriptEntry {
  std::string hash;
  std::string role;
  std::string reply;
};

std::vector<TranscriptEntry> load_transcript(const std::string& path);

class ReplayAdvisor : public Advisor {
 public:
  explicit ReplayAdvisor(const std::vector<TranscriptEntry>& entries);
  std::string complete(const AdvisorRequest& request) override;
  std::string backend_name() const override { return "replay"; }

 private:
  std::map<std::string, std::string> replies_;
};

/// Forwards to another advisor and appends every exchange to a JSONL file.
class RecordingAdvisor : public Advisor {
 public:
  RecordingAdvisor(AdvisorPtr inner, std::string path);
  std::string complete(const AdvisorRequest& request) override;
  std::string backend_name() const override { return inner_->backend_name(); }

 private:
  AdvisorPtr inner_;
  std::string path_;
  std::mutex mutex_;
};

struct LiveAdvisorConfig {
  std::string base_url;  // e.g. https://api.example.com/v1
  std::string api_key;
  std::string model;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds backoff{1000};  // doubled per retry
  std::optional<long> call_budget;          // nullopt = unlimited

  /// Reads HH_ADVISOR_URL, HH_ADVISOR_KEY and HH_ADVISOR_MODEL.
  static LiveAdvisorConfig from_env();
};

class LiveAdvisor : public Advisor {
 public:
  explicit LiveAdvisor(LiveAdvisorConfig config);
  std::string complete(const AdvisorRequest& request) override;
  std::string backend_name() const override { return "live"; }
  long calls_made() const;

 private:
  LiveAdvisorConfig config_;
  mutable std::mutex mutex_;
  long calls_ = 0;
  long reserved_ = 0;
};

// ---------------------------------------------------------------------------
// Prompts

/// Substitutes {{name}} placeholders. Unknown placeholders are left as is.
std::string render_template(const std::string& text,
                            const std::map<std::string, std::string>& values);
const std::string& prompt_template(AdvisorRole role);

std::string heuristic_catalog_text(const std::vector<HeuristicGenome>& pool);
std::string edit_surface_text(const HeuristicGenome& genome);

std::string render_filter_prompt(const ProblemState& state,
                                 const std::vector<HeuristicGenome>& pool,
                                 std::size_t budget);
std::string render_select_prompt(const ProblemState& state,
                                 const std::vector<HeuristicGenome>& pool,
                                 std::size_t budget);
std::string render_evolve_prompt(const HeuristicGenome& genome,
                                 const ProblemState& z,
                                 const OperationRecord& original,
                                 const OperationRecord& replacement,
                                 double delta, std::size_t budget);
std::string render_refine_prompt(const HeuristicGenome& genome,
                                 const StrategyEdit& strategy, double p,
                                 int iteration);

// ---------------------------------------------------------------------------
// Reply grammar

struct ParsedFilter {
  std::vector<std::string> names;  // known names, pool order
  bool parse_ok = false;
};
/// Comma/newline separated names; unknown names are dropped. parse_ok
/// requires at least one known name.
ParsedFilter parse_filter_reply(const std::string& raw,
                                const std::vector<HeuristicGenome>& pool);

struct ParsedEdit {
  std::optional<StrategyEdit> edit;
  bool parse_ok = false;
  std::string error;
};
/// Fenced ```edit block of `key = value` lines, optional `family = name`
/// line; `rationale:` line outside the block. Undeclared keys fail.
ParsedEdit parse_edit_reply(const std::string& raw, Family family,
                            const std::string& strategy_id);

struct ParsedSelect {
  std::string heuristic;
  FeatureMap predicted;
  bool has_name = false;
  bool has_features = false;
  bool parse_ok = false;  // name in pool and a non-empty feature block
};
/// `heuristic: name` line plus a fenced ```features block.
ParsedSelect parse_select_reply(const std::string& raw,
                                const std::vector<HeuristicGenome>& pool);

std::string format_edit_reply(const StrategyEdit& edit);
std::string format_select_reply(const std::string& heuristic,
                                const FeatureMap& predicted);

}  // namespace hh
