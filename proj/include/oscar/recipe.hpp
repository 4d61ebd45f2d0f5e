#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "oscar/error.hpp"

namespace oscar {

struct Ingredient {
  std::string name;
  std::optional<std::string> quantity;

  friend bool operator==(const Ingredient&, const Ingredient&) = default;
};

/// A recipe whose steps are addressed 1..N everywhere outside this struct.
struct Recipe {
  std::string title;
  std::vector<Ingredient> ingredients;
  std::vector<std::string> steps;

  int size() const noexcept { return static_cast<int>(steps.size()); }
  bool has_step(int index) const noexcept { return index >= 1 && index <= size(); }
  const std::string& step(int index) const {
    if (!has_step(index)) throw Error(ErrorCode::UnknownStep, "step " + std::to_string(index));
    return steps[static_cast<std::size_t>(index - 1)];
  }

  friend bool operator==(const Recipe&, const Recipe&) = default;
};

struct ObjectStatus {
  std::string verb;
  std::string noun;

  // Query text used for embedding, e.g. "chopping carrots".
  std::string phrase() const { return verb + " " + noun; }

  friend bool operator==(const ObjectStatus&, const ObjectStatus&) = default;
};

class StepStatusMap {
 public:
  StepStatusMap() = default;

  void set(int step, std::vector<ObjectStatus> statuses) { by_step_[step] = std::move(statuses); }

  const std::vector<ObjectStatus>& at(int step) const {
    static const std::vector<ObjectStatus> empty;
    auto it = by_step_.find(step);
    return it == by_step_.end() ? empty : it->second;
  }

  const std::map<int, std::vector<ObjectStatus>>& entries() const noexcept { return by_step_; }

  friend bool operator==(const StepStatusMap&, const StepStatusMap&) = default;

 private:
  std::map<int, std::vector<ObjectStatus>> by_step_;
};

/// Produces a Recipe from raw text (e.g. an LLM reformatter). Its output is
/// re-validated and never repaired.
class TextNormalizationProvider {
 public:
  virtual ~TextNormalizationProvider() = default;
  virtual Recipe normalize(std::string_view raw) const = 0;
};

class StatusExtractionProvider {
 public:
  virtual ~StatusExtractionProvider() = default;
  virtual StepStatusMap extract(const Recipe& recipe) const = 0;
};

namespace text {

inline std::string trim(std::string_view s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = s.size();
  while (b < e && issp(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && issp(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string collapse_spaces(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

inline std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : s) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  lines.push_back(cur);
  return lines;
}

}  // namespace text

// ---------------------------------------------------------------------------
// Validation

inline void check_recipe(const Recipe& r, ErrorCode code) {
  if (r.steps.empty()) throw Error(code, "recipe has no steps");
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    if (text::trim(r.steps[i]).empty())
      throw Error(code, "step " + std::to_string(i + 1) + " is empty");
  }
  for (const auto& ing : r.ingredients) {
    if (text::trim(ing.name).empty()) throw Error(code, "ingredient with empty name");
  }
}

inline bool is_gerund(std::string_view verb) {
  if (verb.size() < 4 || verb.substr(verb.size() - 3) != "ing") return false;
  return std::none_of(verb.begin(), verb.end(),
                      [](unsigned char c) { return std::isspace(c) != 0; });
}

inline void check_status_map(const StepStatusMap& map, const Recipe& recipe, ErrorCode code) {
  for (const auto& [step, statuses] : map.entries()) {
    if (!recipe.has_step(step))
      throw Error(code, "status map references step " + std::to_string(step));
    const std::string step_text = text::lower(recipe.step(step));
    for (const auto& st : statuses) {
      if (text::trim(st.noun).empty()) throw Error(code, "empty noun in step " + std::to_string(step));
      if (!is_gerund(st.verb))
        throw Error(code, "verb '" + st.verb + "' is not a single gerund token");
      const std::string noun = text::lower(st.noun);
      bool known = step_text.find(noun) != std::string::npos;
      for (const auto& ing : recipe.ingredients) known = known || text::lower(ing.name) == noun;
      if (!known)
        throw Error(code, "noun '" + st.noun + "' not in ingredients or step " + std::to_string(step));
    }
  }
}

// ---------------------------------------------------------------------------
// JSON

inline void to_json(nlohmann::json& j, const Ingredient& i) {
  j = nlohmann::json{{"name", i.name}};
  if (i.quantity) j["quantity"] = *i.quantity;
}

inline void from_json(const nlohmann::json& j, Ingredient& i) {
  j.at("name").get_to(i.name);
  if (auto it = j.find("quantity"); it != j.end() && !it->is_null())
    i.quantity = it->get<std::string>();
  else
    i.quantity.reset();
}

inline void to_json(nlohmann::json& j, const Recipe& r) {
  j = nlohmann::json{{"title", r.title}, {"ingredients", r.ingredients}, {"steps", r.steps}};
}

inline void from_json(const nlohmann::json& j, Recipe& r) {
  r.title = j.value("title", std::string{});
  r.ingredients = j.value("ingredients", std::vector<Ingredient>{});
  j.at("steps").get_to(r.steps);
}

inline void to_json(nlohmann::json& j, const ObjectStatus& s) {
  j = nlohmann::json{{"verb", s.verb}, {"noun", s.noun}};
}

inline void from_json(const nlohmann::json& j, ObjectStatus& s) {
  j.at("verb").get_to(s.verb);
  j.at("noun").get_to(s.noun);
}

// Keys are decimal step indices; the "v" key is reserved for the document version.
inline void to_json(nlohmann::json& j, const StepStatusMap& m) {
  j = nlohmann::json::object();
  for (const auto& [step, statuses] : m.entries()) j[std::to_string(step)] = statuses;
}

inline void from_json(const nlohmann::json& j, StepStatusMap& m) {
  m = StepStatusMap{};
  for (const auto& [key, value] : j.items()) {
    if (key == "v") continue;
    m.set(std::stoi(key), value.get<std::vector<ObjectStatus>>());
  }
}

// ---------------------------------------------------------------------------
// Rule-based normalization

namespace detail {

inline const std::set<std::string>& ingredient_headers() {
  static const std::set<std::string> h{"ingredients", "ingredient list", "you will need"};
  return h;
}

inline const std::set<std::string>& step_headers() {
  static const std::set<std::string> h{"steps",      "instructions", "directions",
                                       "method",     "preparation",  "procedure",
                                       "recipe steps"};
  return h;
}

inline std::string header_key(const std::string& line) {
  std::string s = line;
  while (!s.empty() && s.front() == '#') s.erase(s.begin());
  s = text::trim(s);
  if (!s.empty() && s.back() == ':') s.pop_back();
  return text::lower(text::trim(s));
}

inline std::string strip_bullet(const std::string& line) {
  static const std::vector<std::string> bullets{"- ", "* ", "• ", "+ "};
  for (const auto& b : bullets)
    if (line.rfind(b, 0) == 0) return text::trim(line.substr(b.size()));
  return line;
}

// Marker forms: "Step 1:", "Step 1.", "Step 1 -", "1.", "1)".
inline std::optional<std::string> strip_step_marker(const std::string& line) {
  static const std::regex with_word(R"(^step\s*\d+\s*[:.)\-]?\s*(.*)$)", std::regex::icase);
  static const std::regex bare(R"(^\d+\s*[.):](?:\s+(.*))?$)");
  std::smatch m;
  if (std::regex_match(line, m, with_word)) return text::trim(m[1].str());
  if (std::regex_match(line, m, bare)) return text::trim(m[1].str());
  return std::nullopt;
}

// Splits "Step 1: a. Step 2: b." on inline step markers.
inline std::vector<std::string> split_inline_steps(const std::string& line) {
  static const std::regex marker(R"(\bstep\s*\d+\s*[:.])", std::regex::icase);
  std::vector<std::size_t> starts;
  for (auto it = std::sregex_iterator(line.begin(), line.end(), marker); it != std::sregex_iterator();
       ++it)
    starts.push_back(static_cast<std::size_t>(it->position()));
  if (starts.size() <= 1) return {line};
  std::vector<std::string> parts;
  if (starts.front() > 0) parts.push_back(text::trim(line.substr(0, starts.front())));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    std::size_t end = i + 1 < starts.size() ? starts[i + 1] : line.size();
    parts.push_back(text::trim(line.substr(starts[i], end - starts[i])));
  }
  return parts;
}

inline bool is_quantity_token(const std::string& tok) {
  static const std::regex num(R"(^(\d+([./-]\d+)*|\d*[¼½¾⅓⅔]+|\d+\S*[¼½¾⅓⅔])$)");
  return std::regex_match(tok, num);
}

inline bool is_unit_token(const std::string& tok) {
  static const std::set<std::string> units{
      "cup",   "cups",        "tbsp",     "tbs",     "tsp",    "tablespoon", "tablespoons",
      "teaspoon", "teaspoons", "g",       "gram",    "grams",  "kg",         "ml",
      "l",     "liter",       "liters",   "litre",   "litres", "oz",         "ounce",
      "ounces", "lb",         "lbs",      "pound",   "pounds", "clove",      "cloves",
      "pinch", "dash",        "can",      "cans",    "slice",  "slices",     "stick",
      "sticks", "bunch",      "handful",  "piece",   "pieces", "large",      "medium",
      "small", "whole",       "pkg",      "package"};
  return units.contains(text::lower(tok));
}

inline Ingredient parse_ingredient(const std::string& raw_line) {
  std::string line = strip_bullet(raw_line);
  if (auto comma = line.find(','); comma != std::string::npos) line = line.substr(0, comma);
  std::istringstream in(line);
  std::vector<std::string> toks;
  for (std::string t; in >> t;) toks.push_back(t);
  std::size_t q = 0;
  while (q < toks.size() && is_quantity_token(toks[q])) ++q;
  if (q > 0) {
    while (q < toks.size() - 1 && is_unit_token(toks[q])) ++q;
    if (q < toks.size() - 1 && text::lower(toks[q]) == "of") ++q;
  }
  if (q >= toks.size()) q = 0;
  Ingredient ing;
  std::string name;
  for (std::size_t i = q; i < toks.size(); ++i) name += (name.empty() ? "" : " ") + toks[i];
  while (!name.empty() && std::ispunct(static_cast<unsigned char>(name.back()))) name.pop_back();
  ing.name = text::lower(text::trim(name));
  if (q > 0) {
    std::string quantity;
    for (std::size_t i = 0; i < q; ++i)
      if (text::lower(toks[i]) != "of") quantity += (quantity.empty() ? "" : " ") + toks[i];
    ing.quantity = quantity;
  }
  return ing;
}

inline Recipe parse_recipe_text(std::string_view raw) {
  enum class Section { None, Ingredients, Steps };
  Recipe recipe;
  Section section = Section::None;
  std::vector<std::string> step_lines;

  for (const auto& raw_line : text::split_lines(raw)) {
    std::string line = text::collapse_spaces(text::trim(raw_line));
    if (line.empty()) continue;
    const std::string key = header_key(line);
    if (ingredient_headers().contains(key)) {
      section = Section::Ingredients;
      continue;
    }
    if (step_headers().contains(key)) {
      section = Section::Steps;
      continue;
    }
    if (text::lower(line).rfind("title:", 0) == 0) {
      recipe.title = text::trim(line.substr(6));
      continue;
    }
    if (line.front() == '#' && recipe.title.empty() && section == Section::None) {
      recipe.title = header_key(line).empty() ? "" : text::trim(line.substr(line.find_first_not_of('#')));
      continue;
    }
    switch (section) {
      case Section::Ingredients: {
        Ingredient ing = parse_ingredient(line);
        if (!ing.name.empty()) recipe.ingredients.push_back(std::move(ing));
        break;
      }
      case Section::Steps:
      case Section::None:
        for (auto& part : split_inline_steps(line)) step_lines.push_back(part);
        break;
    }
  }

  bool any_marker = std::any_of(step_lines.begin(), step_lines.end(), [](const std::string& l) {
    return strip_step_marker(l).has_value();
  });
  std::vector<std::string> steps;
  for (const auto& l : step_lines) {
    std::string body = strip_bullet(l);
    if (!any_marker) {
      steps.push_back(body);
      continue;
    }
    if (auto stripped = strip_step_marker(body)) {
      steps.push_back(*stripped);
    } else if (!steps.empty()) {
      steps.back() += steps.back().empty() ? body : " " + body;
    } else {
      steps.push_back(body);
    }
  }
  for (auto& s : steps) recipe.steps.push_back(text::collapse_spaces(s));
  std::erase_if(recipe.steps, [](const std::string& s) { return s.empty(); });
  return recipe;
}

}  // namespace detail

/// Renders a recipe as plain text that the rule-based normalizer parses back
/// to the same Recipe.
inline std::string to_text(const Recipe& r) {
  std::string out;
  if (!r.title.empty()) out += "Title: " + r.title + "\n";
  if (!r.ingredients.empty()) {
    out += "Ingredients:\n";
    for (const auto& i : r.ingredients)
      out += "- " + (i.quantity ? *i.quantity + " " : std::string{}) + i.name + "\n";
  }
  out += "Steps:\n";
  for (int i = 1; i <= r.size(); ++i) out += "Step " + std::to_string(i) + ": " + r.step(i) + "\n";
  return out;
}

/// Parses recipe text into a Recipe. A JSON recipe document is accepted as-is
/// (after validation); otherwise the provider, when given, does the parsing
/// and its result must satisfy the same invariants.
inline Recipe normalize_recipe(std::string_view raw,
                               const TextNormalizationProvider* provider = nullptr) {
  const std::string trimmed = text::trim(raw);
  if (trimmed.empty()) throw Error(ErrorCode::EmptyInput, "recipe text is empty");

  if (trimmed.front() == '{') {
    auto doc = nlohmann::json::parse(trimmed, nullptr, false);
    if (!doc.is_discarded() && doc.is_object() && doc.contains("steps")) {
      Recipe r;
      try {
        r = doc.get<Recipe>();
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, e.what());
      }
      if (r.steps.empty()) throw Error(ErrorCode::EmptyInput, "recipe document has no steps");
      check_recipe(r, ErrorCode::MalformedDocument);
      return r;
    }
  }

  if (provider != nullptr) {
    Recipe r = provider->normalize(trimmed);
    check_recipe(r, ErrorCode::ProviderViolation);
    return r;
  }

  Recipe r = detail::parse_recipe_text(trimmed);
  if (r.steps.empty()) throw Error(ErrorCode::EmptyInput, "no parseable steps");
  return r;
}

// ---------------------------------------------------------------------------
// Object-status extraction

/// Cooking verb lexicon: base form and surface gerund -> normalized gerund.
class VerbLexicon {
 public:
  static VerbLexicon parse(std::string_view data) {
    VerbLexicon lex;
    for (const auto& raw : text::split_lines(data)) {
      std::string line = text::trim(raw);
      if (line.empty() || line.front() == '#') continue;
      std::istringstream in(line);
      std::string base, gerund;
      if (!(in >> base >> gerund)) continue;
      lex.forms_[text::lower(base)] = text::lower(gerund);
      lex.forms_[text::lower(gerund)] = text::lower(gerund);
    }
    return lex;
  }

  static const VerbLexicon& builtin();

  std::optional<std::string> gerund(const std::string& word) const {
    auto it = forms_.find(word);
    if (it == forms_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return forms_.size(); }

 private:
  std::unordered_map<std::string, std::string> forms_;
};

inline const VerbLexicon& VerbLexicon::builtin() {
  static const VerbLexicon lex = VerbLexicon::parse(
#include "oscar/cooking_verbs.inc"
  );
  return lex;
}

namespace detail {

struct Token {
  std::string word;  // lowercased; empty for clause punctuation
  bool boundary = false;
};

inline std::vector<Token> tokenize_step(std::string_view s) {
  std::vector<Token> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back({text::lower(cur), false});
    cur.clear();
  };
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) || u >= 0x80 || c == '\'') {
      cur.push_back(c);
    } else {
      flush();
      if (c == '.' || c == ';' || c == '!' || c == '?') out.push_back({"", true});
    }
  }
  flush();
  return out;
}

inline std::string plural_stem(const std::string& w) {
  if (w.size() > 4 && w.ends_with("oes")) return w.substr(0, w.size() - 2);
  if (w.size() > 3 && w.ends_with('s') && !w.ends_with("ss")) return w.substr(0, w.size() - 1);
  return w;
}

inline bool is_pronoun(const std::string& w) { return w == "them" || w == "it" || w == "they"; }

inline bool is_function_word(const std::string& w) {
  static const std::set<std::string> words{
      "the",  "a",    "an",   "some", "of",   "to",    "in",   "into", "on",    "onto", "with",
      "for",  "over", "and",  "or",   "then", "until", "at",   "from", "by",    "about",
      "your", "all",  "each", "any",  "more", "half",  "well", "up",   "down",  "out",
      "off",  "together", "it", "them", "they", "this", "that", "these", "those"};
  return words.contains(w);
}

inline bool is_stop_preposition(const std::string& w) {
  static const std::set<std::string> words{"for", "until", "at", "about", "to", "over", "in",
                                           "into", "on", "onto", "with", "from", "by"};
  return words.contains(w);
}

}  // namespace detail

/// Rule-based (verb, noun) extraction. A lexicon verb governs every ingredient
/// mention up to the next lexicon verb or sentence end; a pronoun resolves to
/// the nearest preceding ingredient mention in the same step. With an empty
/// ingredient list the first content word after the verb is used instead.
inline std::vector<ObjectStatus> extract_step_statuses(const std::string& step,
                                                       const std::vector<Ingredient>& ingredients,
                                                       const VerbLexicon& lexicon) {
  const auto tokens = detail::tokenize_step(step);

  struct Pattern {
    std::vector<std::string> stems;
    const std::string* name;
  };
  std::vector<Pattern> patterns;
  for (const auto& ing : ingredients) {
    Pattern p{{}, &ing.name};
    for (const auto& t : detail::tokenize_step(ing.name))
      if (!t.boundary) p.stems.push_back(detail::plural_stem(t.word));
    if (!p.stems.empty()) patterns.push_back(std::move(p));
  }

  // Longest ingredient match starting at token i, as (length, name).
  auto match_at = [&](std::size_t i) -> std::pair<std::size_t, const std::string*> {
    std::pair<std::size_t, const std::string*> best{0, nullptr};
    for (const auto& p : patterns) {
      if (i + p.stems.size() > tokens.size() || p.stems.size() <= best.first) continue;
      bool ok = true;
      for (std::size_t k = 0; k < p.stems.size() && ok; ++k)
        ok = !tokens[i + k].boundary && detail::plural_stem(tokens[i + k].word) == p.stems[k];
      if (ok) best = {p.stems.size(), p.name};
    }
    return best;
  };

  std::vector<ObjectStatus> out;
  auto emit = [&](const std::string& verb, const std::string& noun) {
    ObjectStatus s{verb, noun};
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(std::move(s));
  };

  const std::string* last_mention = nullptr;
  std::optional<std::string> verb;
  bool governed = false;
  for (std::size_t i = 0; i < tokens.size();) {
    const auto& tok = tokens[i];
    if (tok.boundary) {
      verb.reset();
      ++i;
      continue;
    }
    if (auto [len, name] = match_at(i); len > 0) {
      if (verb) {
        emit(*verb, *name);
        governed = true;
      }
      last_mention = name;
      i += len;
      continue;
    }
    if (auto g = lexicon.gerund(tok.word)) {
      verb = *g;
      governed = false;
      if (patterns.empty()) {
        // No ingredient list: take the first content word of the clause.
        for (std::size_t j = i + 1; j < tokens.size() && !tokens[j].boundary; ++j) {
          const auto& w = tokens[j].word;
          if (lexicon.gerund(w) || detail::is_stop_preposition(w)) break;
          if (std::isdigit(static_cast<unsigned char>(w.front()))) break;
          if (detail::is_pronoun(w)) {
            if (last_mention) emit(*verb, *last_mention);
            governed = true;
            break;
          }
          if (detail::is_function_word(w)) continue;
          emit(*verb, w);
          last_mention = &tokens[j].word;
          governed = true;
          break;
        }
      }
      ++i;
      continue;
    }
    if (verb && !governed && detail::is_pronoun(tok.word) && last_mention != nullptr) {
      emit(*verb, *last_mention);
      governed = true;
    }
    ++i;
  }
  return out;
}

inline StepStatusMap extract_object_statuses(const Recipe& recipe,
                                             const StatusExtractionProvider* provider = nullptr,
                                             const VerbLexicon& lexicon = VerbLexicon::builtin()) {
  check_recipe(recipe, ErrorCode::InvalidArgument);
  if (provider != nullptr) {
    StepStatusMap m = provider->extract(recipe);
    check_status_map(m, recipe, ErrorCode::ProviderViolation);
    return m;
  }
  StepStatusMap m;
  for (int i = 1; i <= recipe.size(); ++i)
    m.set(i, extract_step_statuses(recipe.step(i), recipe.ingredients, lexicon));
  return m;
}

}  // namespace oscar
