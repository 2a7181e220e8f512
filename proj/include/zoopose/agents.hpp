#pragma once

#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/library.hpp"
#include "zoopose/skeleton.hpp"

#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

struct ChatRequest {
  std::string system;
  std::string user;
  int max_tokens = 4096;
  double temperature = 0.9;
};

/// Implementations must be safe to call from several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Throws Error{backend_error}.
  virtual std::string complete(const ChatRequest& request) = 0;
};

/// OpenAI-style chat-completions client.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string url, std::string api_key, std::string model = "gpt-4o", int timeout_s = 60);
  std::string complete(const ChatRequest& request) override;

 private:
  std::string base_;
  std::string path_;
  std::string api_key_;
  std::string model_;
  int timeout_s_;
};

/// Replays canned responses keyed by prompt_key(system, user). Unmatched
/// prompts fall back to queued responses (FIFO), then to the fallback text.
class ScriptedBackend : public ChatBackend {
 public:
  static std::string prompt_key(std::string_view system, std::string_view user);

  void add(std::string key, std::string response);
  void enqueue(std::string response);
  void set_fallback(std::string response);
  /// Loads every *.json transcript in `dir` (see transcript_fixture).
  /// Throws Error{io_error} or Error{schema_error}.
  void load_fixtures(const std::filesystem::path& dir);
  void load_fixture(std::string_view name, std::string_view text);
  /// The transcripts compiled in from fixtures/transcripts.
  void load_builtin_fixtures();
  std::size_t size() const;

  std::string complete(const ChatRequest& request) override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_key_;
  std::deque<std::string> queue_;
  std::optional<std::string> fallback_;
};

struct TranscriptEntry {
  std::string stage;  // finder, observer, modifier
  int attempt = 0;
  std::string system;
  std::string user;
  std::string response;
};

using Transcript = std::vector<TranscriptEntry>;

/// Error raised by a pipeline stage; carries the exchanges made so far.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause, Transcript transcript)
      : Error(cause.code(), stage + ": " + cause.what()), stage_(std::move(stage)), transcript_(std::move(transcript)) {}

  const std::string& stage() const noexcept { return stage_; }
  const Transcript& transcript() const noexcept { return transcript_; }

 private:
  std::string stage_;
  Transcript transcript_;
};

/// Number of extra attempts the finder makes after an unusable answer.
inline constexpr int kFinderRetries = 3;

struct FinderResult {
  LibraryEntry chosen;
  std::string display_name;
  std::string rationale;
};

enum class InstructionOp { translate, set_position, scale_segment };

std::string_view to_string(InstructionOp op);

struct Instruction {
  InstructionOp op = InstructionOp::translate;
  std::string target;            // keypoint (translate, set_position)
  std::optional<Bone> segment;   // scale_segment: parent end stays fixed
  Vec3 vector = Vec3::Zero();    // translate delta or absolute position
  double factor = 1.0;           // scale_segment

  friend bool operator==(const Instruction& a, const Instruction& b) {
    return a.op == b.op && a.target == b.target && a.segment == b.segment && a.vector == b.vector &&
           a.factor == b.factor;
  }
};

struct ObservationPlan {
  std::vector<Instruction> instructions;
  std::string commentary;
};

/// Loaded from the compiled-in prompt assets. Sections are introduced by
/// "[system]" and "[user]" lines; {{name}} placeholders are substituted.
struct PromptTemplate {
  std::string system;
  std::string user;
};
const PromptTemplate& prompt_template(std::string_view stage);
std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars);

/// Throws Error{empty_library} or Error{unparseable_response} once the
/// retries are used up.
FinderResult finder_select(ChatBackend& backend, const PoseLibrary& lib, std::string_view animal,
                           std::span<const std::string_view> keypoint_names, Transcript* transcript = nullptr);

/// Parses a finder reply into a library entry, if it names one.
std::optional<std::pair<LibraryEntry, std::string>> parse_finder_response(const PoseLibrary& lib,
                                                                          std::string_view response);

ObservationPlan observer_plan(ChatBackend& backend, const Skeleton& chosen, std::string_view chosen_name,
                              std::string_view animal, std::string_view pose, Transcript* transcript = nullptr);

/// Strict-JSON plan: an array of instructions or {"instructions": [...],
/// "commentary": "..."}; code fences are ignored. Every bad element is
/// reported. Throws Error{unparseable_response}.
ObservationPlan parse_plan(std::string_view response);

/// Asks the backend to restate a free-text plan as strict JSON.
ObservationPlan modifier_translate(ChatBackend& backend, const Skeleton& chosen, std::string_view plan_text,
                                   Transcript* transcript = nullptr);

/// Applies the plan in order. Throws Error{unknown_target},
/// Error{non_finite_result} or Error{invalid_skeleton}.
Skeleton modifier_apply(const Skeleton& chosen, const ObservationPlan& plan);

struct AdaptationRecord {
  std::string animal;
  std::string pose;
  FinderResult finder;
  ObservationPlan plan;
  bool plan_translated = false;  // observer reply needed the modifier translation pass
  Skeleton result;
  Transcript transcript;
};

/// Finder, observer, then local modifier. Throws StageError.
AdaptationRecord adapt_pose(ChatBackend& backend, const PoseLibrary& lib, std::string_view animal,
                            std::string_view pose);

ojson instruction_to_json(const Instruction& ins);
ojson plan_to_json(const ObservationPlan& plan);
ojson transcript_to_json(const Transcript& transcript);
ojson record_to_json(const AdaptationRecord& record);

/// Writes a replayable fixture {"request": {...}, "exchanges": [...]}.
ojson transcript_fixture(std::string_view animal, std::string_view pose, const Transcript& transcript);

}  // namespace zoopose
