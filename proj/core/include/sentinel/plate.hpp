#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentinel/geometry.hpp"
#include "sentinel/tracker.hpp"

namespace sentinel {

struct PlateObservation {
  BBox bbox;
  std::string text;
  double text_score = 0.0;
  std::int64_t frame = 0;
};

enum class CharClass { Letter, Digit };

// Positional plate format, e.g. "LLLDDDL".
class PlateGrammar {
 public:
  // Throws ConfigError for an empty pattern, characters other than L/D, or
  // an empty alphabet.
  explicit PlateGrammar(std::string_view pattern = "LLLDDDL",
                        std::string alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZ");

  std::size_t length() const { return classes_.size(); }
  CharClass at(std::size_t i) const { return classes_[i]; }
  const std::string& alphabet() const { return alphabet_; }
  std::string pattern() const;

  bool matches(std::string_view text) const;

 private:
  std::vector<CharClass> classes_;
  std::string alphabet_;
};

struct PlateCheck {
  std::optional<std::string> text;  // set when valid
  std::string reason;               // set when invalid

  bool valid() const { return text.has_value(); }
};

// Uppercases, drops spaces and hyphens, then applies the positional
// confusion map (O->0, I->1, Z->2, S->5, B->8 in digit slots; 0->O, 1->I,
// 5->S, 8->B in letter slots).
PlateCheck normalize_plate(std::string_view raw, const PlateGrammar& g);

struct PlateIdentity {
  std::string text;
  double confidence = 0.0;
  std::size_t votes = 0;
};

// Score-weighted majority vote over the observations that normalize.
// Equal weights resolve to the lexicographically smaller plate.
std::optional<PlateIdentity> aggregate_identity(std::span<const PlateObservation> observations,
                                                const PlateGrammar& g);

inline constexpr double kPlateContainmentThreshold = 0.9;

// area(plate ∩ vehicle) / area(plate).
double containment(const BBox& plate, const BBox& vehicle);

// Track whose box best contains the plate (containment >= 0.9); ties go to
// the smaller vehicle box, then the lower id.
std::optional<TrackId> match_plate_to_vehicle(
    const BBox& plate, std::span<const std::pair<TrackId, BBox>> vehicles);

// Unit-cost Levenshtein distance.
std::size_t edit_distance(std::string_view a, std::string_view b);

// edit_distance / |truth|. Throws EmptyTruth.
double cer(std::string_view predicted, std::string_view truth);

}  // namespace sentinel
