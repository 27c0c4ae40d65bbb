#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lgr/world.hpp"

namespace lgr {

// ---------------------------------------------------------------------------
// Prompt builders

inline std::string render_category_list(const RoomCategoryList& categories) {
  std::string out = "[";
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (i) out += ", ";
    out += '"' + categories[i] + '"';
  }
  return out + "]";
}

/// Room classification prompt for one view's detections.
inline std::string build_room_prompt(const std::vector<std::string>& detected_objects,
                                     const RoomCategoryList& categories) {
  if (categories.empty()) throw std::invalid_argument("build_room_prompt: empty category list");
  std::string od;
  for (std::size_t i = 0; i < detected_objects.size(); ++i) {
    if (i) od += ", ";
    od += detected_objects[i];
  }
  return "The detected objects are: " + od + ". Which room category from " + render_category_list(categories) +
         " is most likely?";
}

namespace detail {

// {og} is the target object, {n} stands for len(responses).
inline constexpr std::string_view kRankingTemplate =
    "Now, could you please list all the selected locations from Step 1 in a concise manner,\n"
    "one location per line, like this:\n"
    "Step 1: [location]\n"
    "Step 2: [location]\n"
    "...\n"
    "Please ensure the response is limited to only one concise list and does not contain\n"
    "any additional explanations or variations.\n"
    "\n"
    "Now, I am trying to determine the most likely place where a \"{og}\" (defined in step 11)\n"
    "might be found. Based on the selected locations from the previous steps,\n"
    "please identify the most likely location(s).\n"
    "\n"
    "### Important Rules:\n"
    "1. Even if a location appears multiple times in the steps, you must consider each \n"
    "   occurrence individually and assign it a unique rank.\n"
    "2. Do not group or combine multiple occurrences of the same location.\n"
    "3. All {n} steps must be ranked from 1 to {n} without \n"
    "   omitting any step.\n"
    "\n"
    "### Expected Output:\n"
    "Please provide the ranked locations in the following format:\n"
    "1. [Location from Step X]\n"
    "2. [Location from Step Y]\n"
    "3. [Location from Step Z]\n"
    "...\n"
    "{n}. [Location from Step W]\n"
    "\n"
    "Ensure that the ranking explicitly includes the step number along with the location\n"
    "(e.g., \"living room from Step 2\").\n";

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace detail

/// Ranking prompt asking for all `response_count` room answers in order.
inline std::string build_ranking_prompt(const std::string& target, int response_count) {
  if (response_count < 1) throw std::invalid_argument("build_ranking_prompt: response_count must be >= 1");
  std::string s(detail::kRankingTemplate);
  s = detail::replace_all(std::move(s), "{n}", std::to_string(response_count));
  return detail::replace_all(std::move(s), "{og}", target);
}

/// Everything sent to the model for one scan.
struct PromptBundle {
  std::vector<std::string> room_prompts;
  std::string ranking_prompt;
  std::string target_object;
  int response_count{0};
};

inline PromptBundle build_prompt_bundle(const std::string& target,
                                        const std::vector<std::vector<std::string>>& per_direction_objects,
                                        const RoomCategoryList& categories) {
  PromptBundle b;
  b.target_object = target;
  for (const auto& objs : per_direction_objects) b.room_prompts.push_back(build_room_prompt(objs, categories));
  b.response_count = static_cast<int>(b.room_prompts.size());
  b.ranking_prompt = build_ranking_prompt(target, b.response_count);
  return b;
}

// ---------------------------------------------------------------------------
// Response parsing

enum class ParseErrorKind {
  Unparseable,
  UnknownCategory,
  NoWellFormedBlock,
  CountMismatch,
  DuplicateRank,
  DuplicateStep,
  RankOutOfRange,
  StepOutOfRange,
  MissingStep,
};

inline std::string to_string(ParseErrorKind k) {
  switch (k) {
    case ParseErrorKind::Unparseable: return "unparseable";
    case ParseErrorKind::UnknownCategory: return "unknown-category";
    case ParseErrorKind::NoWellFormedBlock: return "no-well-formed-block";
    case ParseErrorKind::CountMismatch: return "count-mismatch";
    case ParseErrorKind::DuplicateRank: return "duplicate-rank";
    case ParseErrorKind::DuplicateStep: return "duplicate-step";
    case ParseErrorKind::RankOutOfRange: return "rank-out-of-range";
    case ParseErrorKind::StepOutOfRange: return "step-out-of-range";
    case ParseErrorKind::MissingStep: return "missing-step";
  }
  return "unknown";
}

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrorKind k, const std::string& detail)
      : std::runtime_error(to_string(k) + ": " + detail), kind(k) {}
  ParseErrorKind kind;
};

/// Lowercases, maps '-' and '_' to spaces, and collapses whitespace runs.
inline std::string normalize_category(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char ch : raw) {
    unsigned char u = static_cast<unsigned char>(ch);
    if (ch == '-' || ch == '_' || std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(u));
  }
  return out;
}

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  lines.push_back(cur);
  return lines;
}

// Strips markdown emphasis, code ticks, quotes, brackets and a trailing period.
inline std::string strip_decoration(std::string s) {
  std::erase_if(s, [](char c) { return c == '*' || c == '`' || c == '"' || c == '[' || c == ']'; });
  s = trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == ',')) s.pop_back();
  return trim(s);
}

}  // namespace detail

/// Extracts the room category from a room-classification answer.
///
/// Accepts "Response for odN: <room>", "Step N: <room>" or a bare room
/// token; as a last resort, text that names exactly one category.
inline std::string parse_room_response(const std::string& text, const RoomCategoryList& categories) {
  static const std::regex labelled(R"(^(?:response\s+for\s+od\s*\d+|step\s*\d+)\s*:\s*(.*)$)", std::regex::icase);
  std::vector<std::string> normalized_cats;
  for (const auto& c : categories) normalized_cats.push_back(normalize_category(c));
  auto lookup = [&](const std::string& token) -> const std::string* {
    const std::string n = normalize_category(token);
    for (std::size_t i = 0; i < categories.size(); ++i)
      if (normalized_cats[i] == n) return &categories[i];
    return nullptr;
  };

  std::string first_candidate;
  bool any_content = false;
  for (const auto& raw : detail::split_lines(text)) {
    std::string line = detail::strip_decoration(raw);
    if (line.empty()) continue;
    any_content = true;
    std::smatch m;
    if (std::regex_match(line, m, labelled)) line = detail::strip_decoration(m[1].str());
    if (line.empty()) continue;
    if (const std::string* hit = lookup(line)) return *hit;
    if (first_candidate.empty()) first_candidate = line;
  }
  if (!any_content) throw ParseError(ParseErrorKind::Unparseable, "empty room response");

  // Prose answer: accept it only if exactly one category is named.
  std::string hay = " " + normalize_category(text) + " ";
  std::replace_if(hay.begin(), hay.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)); }, ' ');
  hay = " " + normalize_category(hay) + " ";
  const std::string* found = nullptr;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (hay.find(" " + normalized_cats[i] + " ") != std::string::npos) {
      if (found) throw ParseError(ParseErrorKind::Unparseable, "room response names several categories");
      found = &categories[i];
    }
  }
  if (found) return *found;
  throw ParseError(ParseErrorKind::UnknownCategory, "'" + normalize_category(first_candidate) + "' is not a room category");
}

struct RankedStep {
  int rank{0};
  std::string room;  // normalized
  int step{0};

  friend bool operator==(const RankedStep&, const RankedStep&) = default;
};

/// A validated ranking: ranks and steps are both permutations of 1..N.
struct ParsedRanking {
  std::vector<RankedStep> entries;  // sorted by rank

  /// ranks_by_step()[k-1] is the rank given to step k.
  std::vector<int> ranks_by_step() const {
    std::vector<int> out(entries.size(), 0);
    for (const auto& e : entries) out[static_cast<std::size_t>(e.step - 1)] = e.rank;
    return out;
  }
  /// Steps in rank order.
  std::vector<int> steps_in_rank_order() const {
    std::vector<int> out;
    for (const auto& e : entries) out.push_back(e.step);
    return out;
  }
};

/// Parses "<rank>. <room> from Step <k>" lines.
///
/// The first maximal block of well-formed lines is used; prose before or
/// after it is ignored. Blank lines do not end a block.
inline ParsedRanking parse_ranking_response(const std::string& text, int expected_count) {
  if (expected_count < 1) throw std::invalid_argument("parse_ranking_response: expected_count must be >= 1");
  static const std::regex line_re(R"(^(?:[-+]\s*)?(\d+)\s*[.)]\s*(.+?)\s+from\s+step\s*(\d+)$)", std::regex::icase);

  std::vector<RankedStep> block;
  for (const auto& raw : detail::split_lines(text)) {
    const std::string line = detail::strip_decoration(raw);
    if (line.empty()) continue;
    std::smatch m;
    if (std::regex_match(line, m, line_re)) {
      RankedStep e;
      try {
        e.rank = std::stoi(m[1].str());
        e.step = std::stoi(m[3].str());
      } catch (const std::out_of_range&) {
        throw ParseError(ParseErrorKind::Unparseable, "number too large in '" + line + "'");
      }
      e.room = normalize_category(detail::strip_decoration(m[2].str()));
      block.push_back(std::move(e));
    } else if (!block.empty()) {
      break;
    }
  }

  const auto n = static_cast<std::size_t>(expected_count);
  if (block.empty()) throw ParseError(ParseErrorKind::NoWellFormedBlock, "no '<rank>. <room> from Step <k>' lines found");
  if (block.size() > n)
    throw ParseError(ParseErrorKind::CountMismatch,
                     "expected " + std::to_string(n) + " ranked steps, got " + std::to_string(block.size()));
  std::set<int> ranks;
  std::set<int> steps;
  for (const auto& e : block)
    if (!ranks.insert(e.rank).second) throw ParseError(ParseErrorKind::DuplicateRank, "rank " + std::to_string(e.rank) + " assigned twice");
  for (const auto& e : block)
    if (!steps.insert(e.step).second) throw ParseError(ParseErrorKind::DuplicateStep, "Step " + std::to_string(e.step) + " ranked twice");
  for (const auto& e : block)
    if (e.rank < 1 || e.rank > expected_count)
      throw ParseError(ParseErrorKind::RankOutOfRange, "rank " + std::to_string(e.rank) + " outside 1.." + std::to_string(n));
  for (const auto& e : block)
    if (e.step < 1 || e.step > expected_count)
      throw ParseError(ParseErrorKind::StepOutOfRange, "Step " + std::to_string(e.step) + " outside 1.." + std::to_string(n));
  for (int k = 1; k <= expected_count; ++k)
    if (!steps.contains(k)) throw ParseError(ParseErrorKind::MissingStep, "Step " + std::to_string(k) + " is not ranked");

  ParsedRanking out;
  out.entries = std::move(block);
  std::sort(out.entries.begin(), out.entries.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  return out;
}

// ---------------------------------------------------------------------------
// Response rendering, in the same shapes the parser accepts.

inline std::string hyphenate(std::string room) {
  std::replace(room.begin(), room.end(), ' ', '-');
  return room;
}

/// "Response for od<k>: <room>", k counted from 1.
inline std::string render_room_response(int step, const std::string& room) {
  return "Response for od" + std::to_string(step) + ": " + hyphenate(room);
}

/// One "<rank>. <room> from Step <k>" line per entry, in rank order.
inline std::string render_ranking_response(const ParsedRanking& ranking) {
  std::vector<RankedStep> sorted = ranking.entries;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.rank < b.rank; });
  std::string out;
  for (const auto& e : sorted)
    out += std::to_string(e.rank) + ". " + hyphenate(e.room) + " from Step " + std::to_string(e.step) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Transcripts: JSON Lines, one exchange per record.

struct TranscriptRecord {
  int episode{0};
  int step{0};
  std::string kind;  // "room" | "ranking"
  std::string prompt;
  std::string response;
  std::optional<std::string> error;  // set when the exchange failed in transport

  friend bool operator==(const TranscriptRecord&, const TranscriptRecord&) = default;
};

inline nlohmann::json to_json(const TranscriptRecord& r) {
  nlohmann::json j;
  j["episode"] = r.episode;
  j["step"] = r.step;
  j["kind"] = r.kind;
  j["prompt"] = r.prompt;
  j["response"] = r.response;
  if (r.error) j["error"] = *r.error;
  return j;
}

inline TranscriptRecord transcript_record_from_json(const nlohmann::json& j) {
  TranscriptRecord r;
  r.episode = j.at("episode").get<int>();
  r.step = j.at("step").get<int>();
  r.kind = j.at("kind").get<std::string>();
  if (r.kind != "room" && r.kind != "ranking") throw std::invalid_argument("transcript: unknown record kind '" + r.kind + "'");
  r.prompt = j.at("prompt").get<std::string>();
  r.response = j.at("response").get<std::string>();
  if (j.contains("error")) r.error = j.at("error").get<std::string>();
  return r;
}

inline std::vector<TranscriptRecord> parse_transcript(std::istream& in) {
  std::vector<TranscriptRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    out.push_back(transcript_record_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

inline std::vector<TranscriptRecord> load_transcript(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read transcript: " + path);
  return parse_transcript(in);
}

inline std::string transcript_to_jsonl(const std::vector<TranscriptRecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace lgr
