#include "prompting.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace graminfer {

namespace {

const char* kDefaultSystem =
    "You are a grammar engineer. You will be shown a code snippet written in an "
    "unknown domain-specific language. Infer a context-free grammar that parses the "
    "snippet. The grammar must load under an LALR(1) parser and follow this notation:\n"
    "- Rules are lower_case, terminals are UPPER_CASE, and definitions look like "
    "`name: body`.\n"
    "- Alternatives are separated by `|` and may end with `-> alias`.\n"
    "- Atoms are rule names, terminal names, \"string literals\", /regex literals/, "
    "and parenthesised groups; the quantifiers `?`, `*`, `+` apply to the preceding "
    "atom.\n"
    "- `%import common.NAME` (e.g. NUMBER, WS, CNAME) and `%ignore TERMINAL` are "
    "allowed.\n"
    "Requirements: define a `start` rule; define every symbol you reference; do not "
    "leave any rule or terminal undefined.\n"
    "Reply with exactly one grammar enclosed in <GRAMMAR> and </GRAMMAR> tags. "
    "Nothing outside the tags is required.";

const char* kDefaultInitialUser =
    "Infer a grammar for the following code snippet:\n\n{code}";

const char* kDefaultFeedbackUser =
    "The previous grammar did not work.\n\nGrammar:\n{grammar}\n\nParser error:\n"
    "{error}\n\nPlease fix the grammar and reply with one corrected grammar inside "
    "<GRAMMAR> and </GRAMMAR> tags.";

const char* kNoGrammarPlaceholder = "(no grammar block was found in your reply)";

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
  size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

Result<std::string, std::string> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  using R = Result<std::string, std::string>;
  if (!in) return R::err("template file not readable: " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return R::ok(os.str());
}

}  // namespace

std::string_view role_name(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates t{kDefaultSystem, kDefaultInitialUser, kDefaultFeedbackUser};
  return t;
}

Result<PromptTemplates, std::string> PromptTemplates::load_dir(const std::string& dir) {
  std::filesystem::path base(dir);
  PromptTemplates t;
  auto sys = read_file(base / "system.txt");
  if (!sys.ok()) return sys.error();
  auto init = read_file(base / "initial_user.txt");
  if (!init.ok()) return init.error();
  auto fb = read_file(base / "feedback_user.txt");
  if (!fb.ok()) return fb.error();
  t.system_text = std::move(sys).take();
  t.initial_user_pattern = std::move(init).take();
  t.feedback_user_pattern = std::move(fb).take();
  if (auto err = t.validate()) return *err;
  return t;
}

std::optional<std::string> PromptTemplates::validate() const {
  if (system_text.empty()) return "system template is empty";
  if (system_text.find("<GRAMMAR>") == std::string::npos)
    return "system template must instruct wrapping output in <GRAMMAR> tags";
  if (system_text.find("start") == std::string::npos)
    return "system template must require a 'start' rule";
  if (initial_user_pattern.find("{code}") == std::string::npos)
    return "initial user template must contain {code}";
  if (initial_user_pattern.find("{grammar}") != std::string::npos ||
      initial_user_pattern.find("{error}") != std::string::npos)
    return "initial user template only takes {code}";
  if (feedback_user_pattern.find("{grammar}") == std::string::npos ||
      feedback_user_pattern.find("{error}") == std::string::npos)
    return "feedback template must contain {grammar} and {error}";
  if (feedback_user_pattern.find("{code}") != std::string::npos)
    return "feedback template does not take {code}";
  return std::nullopt;
}

std::vector<ChatMessage> build_initial_messages(const PromptTemplates& t,
                                                std::span<const SimilarityHit> examples,
                                                const std::vector<FslRecord>& fsl,
                                                std::string_view snippet) {
  std::vector<ChatMessage> out;
  out.push_back({Role::System, t.system_text});
  for (const SimilarityHit& hit : examples) {
    const FslRecord& rec = fsl[hit.index];
    out.push_back({Role::User, replace_all(t.initial_user_pattern, "{code}", rec.code)});
    out.push_back({Role::Assistant, "<GRAMMAR>\n" + rec.grammar + "\n</GRAMMAR>"});
  }
  out.push_back({Role::User, replace_all(t.initial_user_pattern, "{code}", snippet)});
  return out;
}

ChatMessage build_feedback_message(const PromptTemplates& t,
                                   std::optional<std::string_view> prev_grammar,
                                   std::string_view error) {
  std::string_view grammar = prev_grammar ? *prev_grammar : kNoGrammarPlaceholder;
  std::string content = replace_all(t.feedback_user_pattern, "{grammar}", grammar);
  content = replace_all(std::move(content), "{error}", error);
  return {Role::User, std::move(content)};
}

std::optional<std::string> extract_grammar(std::string_view response) {
  constexpr std::string_view open = "<GRAMMAR>";
  constexpr std::string_view close = "</GRAMMAR>";
  size_t b = response.find(open);
  if (b == std::string_view::npos) return std::nullopt;
  size_t body = b + open.size();
  size_t e = response.find(close, body);
  if (e == std::string_view::npos) return std::nullopt;
  return trim(response.substr(body, e - body));
}

std::string hash_messages(std::span<const ChatMessage> messages) {
  std::string buf;
  for (const ChatMessage& m : messages) {
    buf += role_name(m.role);
    buf.push_back('\x1f');
    buf += m.content;
    buf.push_back('\x1e');
  }
  return fnv1a_hex(buf);
}

}  // namespace graminfer
