#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dataset.hpp"
#include "similarity.hpp"

namespace graminfer {

enum class Role { System, User, Assistant };
std::string_view role_name(Role r);

struct ChatMessage {
  Role role;
  std::string content;
};

// The three prompt templates. `initial_user_pattern` takes {code};
// `feedback_user_pattern` takes {grammar} and {error}.
struct PromptTemplates {
  std::string system_text;
  std::string initial_user_pattern;
  std::string feedback_user_pattern;

  static const PromptTemplates& defaults();
  // Reads system.txt / initial_user.txt / feedback_user.txt from a directory.
  static Result<PromptTemplates, std::string> load_dir(const std::string& dir);
  // Placeholder and content checks; returns a diagnostic on violation.
  std::optional<std::string> validate() const;
};

// [system] + one user/assistant pair per exemplar (assistant content wrapped
// in <GRAMMAR> tags) + the final user message carrying the snippet.
std::vector<ChatMessage> build_initial_messages(const PromptTemplates& t,
                                                std::span<const SimilarityHit> examples,
                                                const std::vector<FslRecord>& fsl,
                                                std::string_view snippet);

// Feedback turn: previous grammar (or a fixed placeholder line when no
// grammar block was extracted) plus the engine error, as a user message.
ChatMessage build_feedback_message(const PromptTemplates& t,
                                   std::optional<std::string_view> prev_grammar,
                                   std::string_view error);

// Content of the first <GRAMMAR>...</GRAMMAR> span, trimmed; nullopt when the
// response has no complete span.
std::optional<std::string> extract_grammar(std::string_view response);

// Canonical error text used when extraction fails (traced and fed back).
inline constexpr std::string_view kMissingGrammarTags = "output missing GRAMMAR tags";

// Audit hash of a message list, recorded per iteration in run reports.
std::string hash_messages(std::span<const ChatMessage> messages);

}  // namespace graminfer
