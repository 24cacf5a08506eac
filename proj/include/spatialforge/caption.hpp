#pragma once

#include <array>
#include <bitset>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "spatialforge/spatial.hpp"

namespace spatialforge {

enum class Side : std::uint8_t { Start, End };

std::string_view to_string(Side side);

/// Which (side, attribute) slots a caption leaves unstated.
class OmissionSet {
 public:
  bool contains(Side side, AttributeKind kind) const { return bits_.test(index(side, kind)); }
  void insert(Side side, AttributeKind kind) { bits_.set(index(side, kind)); }
  bool empty() const { return bits_.none(); }
  std::size_t size() const { return bits_.count(); }

  friend bool operator==(const OmissionSet&, const OmissionSet&) = default;

 private:
  static std::size_t index(Side side, AttributeKind kind) {
    return static_cast<std::size_t>(side) * 3 + static_cast<std::size_t>(kind);
  }
  std::bitset<6> bits_;
};

struct MotionSpec {
  CategoryTriple start;
  CategoryTriple end;
  OmissionSet omitted;

  const CategoryTriple& side(Side s) const { return s == Side::Start ? start : end; }
  CategoryTriple& side(Side s) { return s == Side::Start ? start : end; }

  friend bool operator==(const MotionSpec&, const MotionSpec&) = default;
};

/// Throws std::invalid_argument if a triple is malformed or a non-omittable
/// category is flagged as omitted.
void validate(const MotionSpec& spec);

/// Lower-cased alphanumeric tokens; every other character separates tokens.
std::vector<std::string> tokenize(std::string_view text);

/// Synonym tables and caption templates, loaded from a JSON document.
///
/// Templates use the placeholders {event}, {start}, {end}, {t0} and {t1}
/// and come in five families:
///   motion       - both sides described ("from {start} to {end}")
///   motion_to    - only the end side described
///   motion_from  - only the start side described
///   static       - start and end coincide, described once
///   bare         - nothing spatial left to say
/// Loading validates that the lexicon is unambiguous: no two categories share
/// a synonym, every category lists its canonical caption, event phrases and
/// template text contain no spatial keywords, and templates place their
/// motion verbs and end markers so that parse_caption can recover the sides.
class CaptionLexicon {
 public:
  enum class TemplateFamily : std::uint8_t { Motion, MotionTo, MotionFrom, Static, Bare };

  static CaptionLexicon load(const std::filesystem::path& path);
  static CaptionLexicon from_json_text(std::string_view text);

  const std::vector<std::string>& synonyms(CategoryId id) const {
    return category_synonyms_[static_cast<std::size_t>(id)];
  }
  /// nullptr when the label is unknown.
  const std::vector<std::string>* event_phrases(std::string_view label) const;
  std::vector<std::string> event_labels() const;
  const std::vector<std::string>& templates(TemplateFamily family) const {
    return templates_[static_cast<std::size_t>(family)];
  }

  enum class TokenRole : std::uint8_t { Category, MotionVerb, EndMarker };

  struct Match {
    TokenRole role;
    CategoryId category;  // valid when role == Category
    std::size_t first_token;
    std::size_t token_count;
  };

  /// Greedy left-to-right longest-match scan over a token sequence.
  std::vector<Match> scan(const std::vector<std::string>& tokens) const;

 private:
  struct Entry {
    std::vector<std::string> tokens;
    TokenRole role;
    CategoryId category;
  };

  void add_entry(std::string_view phrase, TokenRole role, CategoryId id, std::string_view owner);
  void validate_free_text(std::string_view text, std::string_view what) const;
  void validate_templates() const;

  std::array<std::vector<std::string>, kCategoryCount> category_synonyms_;
  std::map<std::string, std::vector<std::string>, std::less<>> events_;
  std::array<std::vector<std::string>, 5> templates_;
  // First token -> entries beginning with it, longest first.
  std::map<std::string, std::vector<Entry>, std::less<>> index_;
  std::map<std::vector<std::string>, std::string> owners_;
};

struct GeneratedCaption {
  std::string text;
  MotionSpec spec;  // the input categories with the omissions actually made
};

/// Writes a caption for one event. Every omittable attribute is dropped
/// independently with `omission_prob`; when start and end triples coincide
/// the caption describes a single static position. Throws
/// std::invalid_argument for an unknown label or an invalid spec.
GeneratedCaption generate_caption(std::string_view label, const MotionSpec& spec, const EventWindow& w,
                                  const CaptionLexicon& lex, Rng& rng, double omission_prob = 0.5);

/// Recovers the start/end categories a caption describes. Attributes that are
/// never mentioned default to front / middle / moderate and are recorded as
/// omitted.
MotionSpec parse_caption(std::string_view caption, const CaptionLexicon& lex);

/// Endpoint baseline: parse the caption, place each endpoint at its
/// categories' midpoints and synthesize straight-line motion over the window.
Trajectory predict_trajectory_from_caption(std::string_view caption, const EventWindow& w,
                                           double clip_duration_s, const CaptionLexicon& lex);

SphericalPos midpoint_position(const CategoryTriple& triple);

}  // namespace spatialforge
