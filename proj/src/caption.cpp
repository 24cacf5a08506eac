#include "spatialforge/caption.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace spatialforge {

namespace {

using json = nlohmann::json;
using Family = CaptionLexicon::TemplateFamily;

constexpr std::array<std::pair<Family, const char*>, 5> kFamilies = {{
    {Family::Motion, "motion"},
    {Family::MotionTo, "motion_to"},
    {Family::MotionFrom, "motion_from"},
    {Family::Static, "static"},
    {Family::Bare, "bare"},
}};

constexpr std::array<const char*, 5> kPlaceholders = {"event", "start", "end", "t0", "t1"};

const std::string& pick(const std::vector<std::string>& options, Rng& rng) {
  std::uniform_int_distribution<std::size_t> dist(0, options.size() - 1);
  return options[dist(rng)];
}

std::string format_seconds(double t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", t);
  return buf;
}

// Splits a template into literal text and {placeholder} pieces. Placeholder
// pieces keep their braces.
std::vector<std::string> split_template(std::string_view tmpl) {
  std::vector<std::string> pieces;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    const auto open = tmpl.find('{', pos);
    if (open == std::string_view::npos) {
      pieces.emplace_back(tmpl.substr(pos));
      break;
    }
    if (open > pos) pieces.emplace_back(tmpl.substr(pos, open - pos));
    const auto close = tmpl.find('}', open);
    if (close == std::string_view::npos) {
      throw std::invalid_argument("template '" + std::string(tmpl) + "' has an unclosed placeholder");
    }
    const std::string name(tmpl.substr(open + 1, close - open - 1));
    if (std::find(kPlaceholders.begin(), kPlaceholders.end(), name) == kPlaceholders.end()) {
      throw std::invalid_argument("template '" + std::string(tmpl) + "' uses unknown placeholder {" + name + "}");
    }
    pieces.emplace_back(tmpl.substr(open, close - open + 1));
    pos = close + 1;
  }
  return pieces;
}

bool is_placeholder(const std::string& piece) { return !piece.empty() && piece.front() == '{'; }

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& piece : split_template(tmpl)) {
    if (is_placeholder(piece)) {
      out += values.at(piece.substr(1, piece.size() - 2));
    } else {
      out += piece;
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Side side) { return side == Side::Start ? "start" : "end"; }

void validate(const MotionSpec& spec) {
  validate(spec.start);
  validate(spec.end);
  for (auto side : {Side::Start, Side::End}) {
    for (auto kind : kAllKinds) {
      if (spec.omitted.contains(side, kind) && !category(spec.side(side).get(kind)).omittable) {
        throw std::invalid_argument("motion spec marks non-omittable " + std::string(to_string(side)) + " " +
                                    std::string(to_string(kind)) + " as omitted");
      }
    }
  }
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto uch = static_cast<unsigned char>(ch);
    if (std::isalnum(uch)) {
      current.push_back(static_cast<char>(std::tolower(uch)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

CaptionLexicon CaptionLexicon::load(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open lexicon " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  try {
    return from_json_text(buf.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void CaptionLexicon::add_entry(std::string_view phrase, TokenRole role, CategoryId id, std::string_view owner) {
  auto tokens = tokenize(phrase);
  if (tokens.empty()) throw std::invalid_argument("lexicon phrase '" + std::string(phrase) + "' has no words");
  const auto [it, inserted] = owners_.emplace(tokens, std::string(owner));
  if (!inserted) {
    if (it->second == owner) return;
    throw std::invalid_argument("lexicon phrase '" + std::string(phrase) + "' is claimed by both " + it->second +
                                " and " + std::string(owner));
  }
  auto& bucket = index_[tokens.front()];
  bucket.push_back({std::move(tokens), role, id});
  std::stable_sort(bucket.begin(), bucket.end(),
                   [](const Entry& a, const Entry& b) { return a.tokens.size() > b.tokens.size(); });
}

std::vector<CaptionLexicon::Match> CaptionLexicon::scan(const std::vector<std::string>& tokens) const {
  std::vector<Match> matches;
  std::size_t i = 0;
  while (i < tokens.size()) {
    const auto bucket = index_.find(tokens[i]);
    bool matched = false;
    if (bucket != index_.end()) {
      for (const auto& entry : bucket->second) {
        const std::size_t n = entry.tokens.size();
        if (i + n > tokens.size()) continue;
        if (std::equal(entry.tokens.begin(), entry.tokens.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          matches.push_back({entry.role, entry.category, i, n});
          i += n;
          matched = true;
          break;
        }
      }
    }
    if (!matched) ++i;
  }
  return matches;
}

void CaptionLexicon::validate_free_text(std::string_view text, std::string_view what) const {
  const auto matches = scan(tokenize(text));
  if (!matches.empty()) {
    throw std::invalid_argument(std::string(what) + " '" + std::string(text) +
                                "' contains a spatial keyword, motion verb or end marker");
  }
}

void CaptionLexicon::validate_templates() const {
  for (const auto& [family, family_name] : kFamilies) {
    const auto& list = templates(family);
    if (list.empty()) throw std::invalid_argument(std::string("template family '") + family_name + "' is empty");
    for (const auto& tmpl : list) {
      const std::string where = std::string(family_name) + " template '" + tmpl + "'";
      // Build a token stream with placeholders as opaque tokens so matches
      // cannot span a substitution point.
      std::vector<std::string> tokens;
      std::map<std::string, std::size_t> placeholder_at;
      for (const auto& piece : split_template(tmpl)) {
        if (is_placeholder(piece)) {
          placeholder_at.emplace(piece, tokens.size());
          tokens.push_back(piece);
        } else {
          for (auto& t : tokenize(piece)) tokens.push_back(std::move(t));
        }
      }
      const auto has = [&](const char* p) { return placeholder_at.count(p) > 0; };
      if (!has("{event}")) throw std::invalid_argument(where + " lacks {event}");

      const auto matches = scan(tokens);
      bool verb = false;
      std::vector<std::size_t> markers;
      for (const auto& m : matches) {
        if (m.role == TokenRole::Category) throw std::invalid_argument(where + " contains a spatial keyword");
        if (m.role == TokenRole::MotionVerb) verb = true;
        if (m.role == TokenRole::EndMarker) markers.push_back(m.first_token);
      }
      const bool wants_start = family == Family::Motion || family == Family::MotionFrom || family == Family::Static;
      const bool wants_end = family == Family::Motion || family == Family::MotionTo;
      if (has("{start}") != wants_start) throw std::invalid_argument(where + " has the wrong {start} usage");
      if (has("{end}") != wants_end) throw std::invalid_argument(where + " has the wrong {end} usage");
      if ((family == Family::Static) == verb) {
        throw std::invalid_argument(where + (verb ? " must not contain a motion verb" : " needs a motion verb"));
      }
      if (family == Family::Static) continue;

      const std::size_t first_marker = markers.empty() ? tokens.size() : markers.front();
      if (wants_start && first_marker < placeholder_at["{start}"]) {
        throw std::invalid_argument(where + " has an end marker before {start}");
      }
      if (wants_end && !(first_marker < placeholder_at["{end}"])) {
        throw std::invalid_argument(where + " needs an end marker before {end}");
      }
      if (family == Family::MotionFrom && !markers.empty()) {
        throw std::invalid_argument(where + " must not contain an end marker");
      }
    }
  }
}

CaptionLexicon CaptionLexicon::from_json_text(std::string_view text) {
  const json doc = json::parse(text);
  CaptionLexicon lex;

  const auto& cats = doc.at("categories");
  for (auto kind : kAllKinds) {
    const std::string kind_name(to_string(kind));
    if (!cats.contains(kind_name)) throw std::invalid_argument("lexicon lacks the '" + kind_name + "' section");
    for (const auto& [name, list] : cats.at(kind_name).items()) {
      const auto id = find_category(kind, name);
      if (!id) throw std::invalid_argument("lexicon names unknown " + kind_name + " category '" + name + "'");
      for (const auto& syn : list) lex.category_synonyms_[static_cast<std::size_t>(*id)].push_back(syn.get<std::string>());
    }
  }
  for (const auto& c : category_table()) {
    const auto& syns = lex.synonyms(c.id);
    if (syns.empty()) throw std::invalid_argument("category '" + std::string(c.name) + "' has no synonyms");
    const auto canonical = tokenize(c.caption);
    if (std::none_of(syns.begin(), syns.end(), [&](const auto& s) { return tokenize(s) == canonical; })) {
      throw std::invalid_argument("category '" + std::string(c.name) + "' is missing its canonical caption '" +
                                  std::string(c.caption) + "'");
    }
    for (const auto& s : syns) lex.add_entry(s, TokenRole::Category, c.id, "category " + std::string(c.name));
  }
  for (const auto& v : doc.at("motion_verbs")) {
    lex.add_entry(v.get<std::string>(), TokenRole::MotionVerb, CategoryId::Front, "motion verbs");
  }
  for (const auto& v : doc.at("end_markers")) {
    lex.add_entry(v.get<std::string>(), TokenRole::EndMarker, CategoryId::Front, "end markers");
  }

  for (const auto& [label, list] : doc.at("events").items()) {
    auto& phrases = lex.events_[label];
    for (const auto& p : list) {
      phrases.push_back(p.get<std::string>());
      lex.validate_free_text(phrases.back(), "event phrase");
    }
    if (phrases.empty()) throw std::invalid_argument("event '" + label + "' has no phrases");
  }

  const auto& tmpl = doc.at("templates");
  for (const auto& [family, name] : kFamilies) {
    if (!tmpl.contains(name)) throw std::invalid_argument(std::string("lexicon lacks template family '") + name + "'");
    for (const auto& t : tmpl.at(name)) lex.templates_[static_cast<std::size_t>(family)].push_back(t.get<std::string>());
  }
  lex.validate_templates();
  return lex;
}

const std::vector<std::string>* CaptionLexicon::event_phrases(std::string_view label) const {
  const auto it = events_.find(label);
  return it == events_.end() ? nullptr : &it->second;
}

std::vector<std::string> CaptionLexicon::event_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, _] : events_) out.push_back(label);
  return out;
}

GeneratedCaption generate_caption(std::string_view label, const MotionSpec& spec, const EventWindow& w,
                                  const CaptionLexicon& lex, Rng& rng, double omission_prob) {
  validate(spec.start);
  validate(spec.end);
  if (!(omission_prob >= 0.0 && omission_prob <= 1.0)) {
    throw std::invalid_argument("omission probability must lie in [0, 1]");
  }
  const auto* phrases = lex.event_phrases(label);
  if (!phrases) throw std::invalid_argument("no lexicon entry for event label '" + std::string(label) + "'");

  GeneratedCaption out{{}, {spec.start, spec.end, {}}};
  std::string event = pick(*phrases, rng);
  std::bernoulli_distribution drop(omission_prob);

  const bool is_static = spec.start == spec.end;
  for (auto kind : kAllKinds) {
    for (auto side : {Side::Start, Side::End}) {
      if (is_static && side == Side::End) {
        if (out.spec.omitted.contains(Side::Start, kind)) out.spec.omitted.insert(Side::End, kind);
        continue;
      }
      if (category(spec.side(side).get(kind)).omittable && drop(rng)) out.spec.omitted.insert(side, kind);
    }
  }

  const auto describe = [&](Side side) {
    std::string phrase;
    for (auto kind : kAllKinds) {
      if (out.spec.omitted.contains(side, kind)) continue;
      if (!phrase.empty()) phrase += ", ";
      phrase += pick(lex.synonyms(spec.side(side).get(kind)), rng);
    }
    return phrase;
  };
  const std::string start_phrase = describe(Side::Start);
  const std::string end_phrase = is_static ? std::string() : describe(Side::End);

  Family family;
  if (is_static) {
    family = start_phrase.empty() ? Family::Bare : Family::Static;
  } else if (!start_phrase.empty() && !end_phrase.empty()) {
    family = Family::Motion;
  } else if (start_phrase.empty()) {
    family = end_phrase.empty() ? Family::Bare : Family::MotionTo;
  } else {
    family = Family::MotionFrom;
  }

  const std::map<std::string, std::string> values = {
      {"event", event},
      {"start", start_phrase},
      {"end", end_phrase},
      {"t0", format_seconds(w.t0_s)},
      {"t1", format_seconds(w.t1_s)},
  };
  out.text = render_template(pick(lex.templates(family), rng), values);
  if (!out.text.empty()) {
    out.text.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(out.text.front())));
  }
  return out;
}

MotionSpec parse_caption(std::string_view caption, const CaptionLexicon& lex) {
  using Role = CaptionLexicon::TokenRole;
  const auto matches = lex.scan(tokenize(caption));
  const bool moving =
      std::any_of(matches.begin(), matches.end(), [](const auto& m) { return m.role == Role::MotionVerb; });

  MotionSpec spec;
  std::array<std::array<bool, 3>, 2> assigned{};
  const auto assign = [&](Side side, AttributeKind kind, CategoryId id) {
    spec.side(side).set(kind, id);
    assigned[static_cast<std::size_t>(side)][static_cast<std::size_t>(kind)] = true;
  };
  const auto is_assigned = [&](Side side, AttributeKind kind) {
    return assigned[static_cast<std::size_t>(side)][static_cast<std::size_t>(kind)];
  };

  bool after_marker = false;
  for (const auto& m : matches) {
    if (m.role == Role::MotionVerb) continue;
    if (m.role == Role::EndMarker) {
      if (moving) after_marker = true;
      continue;
    }
    const auto kind = category(m.category).kind;
    if (after_marker) {
      if (!is_assigned(Side::End, kind)) assign(Side::End, kind, m.category);
    } else if (!is_assigned(Side::Start, kind)) {
      assign(Side::Start, kind, m.category);
    } else if (!is_assigned(Side::End, kind)) {
      assign(Side::End, kind, m.category);
    }
  }

  for (auto kind : kAllKinds) {
    if (!moving && is_assigned(Side::Start, kind) && !is_assigned(Side::End, kind)) {
      assign(Side::End, kind, spec.start.get(kind));
    }
    for (auto side : {Side::Start, Side::End}) {
      if (!is_assigned(side, kind)) {
        spec.side(side).set(kind, default_category(kind));
        spec.omitted.insert(side, kind);
      }
    }
  }
  return spec;
}

SphericalPos midpoint_position(const CategoryTriple& triple) {
  validate(triple);
  return {wrap_angle(category_midpoint(triple.azimuth)), category_midpoint(triple.elevation),
          category_midpoint(triple.distance)};
}

Trajectory predict_trajectory_from_caption(std::string_view caption, const EventWindow& w, double clip_duration_s,
                                           const CaptionLexicon& lex) {
  const MotionSpec spec = parse_caption(caption, lex);
  return linear_trajectory({midpoint_position(spec.start), midpoint_position(spec.end)}, w, clip_duration_s);
}

}  // namespace spatialforge
