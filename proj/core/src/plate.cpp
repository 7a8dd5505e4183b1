#include "sentinel/plate.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>

#include "sentinel/errors.hpp"

namespace sentinel {

namespace {

char to_digit_slot(char c) {
  switch (c) {
    case 'O': return '0';
    case 'I': return '1';
    case 'Z': return '2';
    case 'S': return '5';
    case 'B': return '8';
    default: return c;
  }
}

char to_letter_slot(char c) {
  switch (c) {
    case '0': return 'O';
    case '1': return 'I';
    case '5': return 'S';
    case '8': return 'B';
    default: return c;
  }
}

}  // namespace

PlateGrammar::PlateGrammar(std::string_view pattern, std::string alphabet)
    : alphabet_(std::move(alphabet)) {
  if (pattern.empty()) throw ConfigError("plate grammar pattern is empty");
  if (alphabet_.empty()) throw ConfigError("plate grammar alphabet is empty");
  for (char c : pattern) {
    switch (std::toupper(static_cast<unsigned char>(c))) {
      case 'L': classes_.push_back(CharClass::Letter); break;
      case 'D': classes_.push_back(CharClass::Digit); break;
      default:
        throw ConfigError("plate grammar pattern may only contain L and D, got '" +
                          std::string(pattern) + "'");
    }
  }
  for (char& c : alphabet_) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
}

std::string PlateGrammar::pattern() const {
  std::string s;
  for (auto c : classes_) s.push_back(c == CharClass::Letter ? 'L' : 'D');
  return s;
}

bool PlateGrammar::matches(std::string_view text) const {
  if (text.size() != classes_.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (classes_[i] == CharClass::Digit) {
      if (c < '0' || c > '9') return false;
    } else if (alphabet_.find(c) == std::string::npos) {
      return false;
    }
  }
  return true;
}

PlateCheck normalize_plate(std::string_view raw, const PlateGrammar& g) {
  std::string s;
  s.reserve(raw.size());
  for (char c : raw) {
    if (c == ' ' || c == '-' || c == '\t') continue;
    s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (s.size() != g.length()) {
    return {std::nullopt, "expected " + std::to_string(g.length()) + " characters, got " +
                              std::to_string(s.size())};
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (g.at(i) == CharClass::Digit) {
      s[i] = to_digit_slot(s[i]);
      if (s[i] < '0' || s[i] > '9') {
        return {std::nullopt, "position " + std::to_string(i + 1) + " needs a digit"};
      }
    } else {
      s[i] = to_letter_slot(s[i]);
      if (g.alphabet().find(s[i]) == std::string::npos) {
        return {std::nullopt, "position " + std::to_string(i + 1) + " needs a letter"};
      }
    }
  }
  return {std::move(s), {}};
}

std::optional<PlateIdentity> aggregate_identity(std::span<const PlateObservation> observations,
                                                const PlateGrammar& g) {
  struct Tally {
    double weight = 0.0;
    std::size_t votes = 0;
  };
  std::map<std::string, Tally> tallies;
  double total = 0.0;
  for (const auto& obs : observations) {
    auto check = normalize_plate(obs.text, g);
    if (!check.valid()) continue;
    auto& t = tallies[*check.text];
    t.weight += obs.text_score;
    ++t.votes;
    total += obs.text_score;
  }
  if (tallies.empty()) return std::nullopt;

  auto best = tallies.begin();
  for (auto it = std::next(tallies.begin()); it != tallies.end(); ++it) {
    if (it->second.weight > best->second.weight) best = it;
  }
  PlateIdentity id;
  id.text = best->first;
  id.votes = best->second.votes;
  // All-zero scores degrade to a plain vote count.
  if (total > 0.0) {
    id.confidence = best->second.weight / total;
  } else {
    std::size_t all = 0;
    for (const auto& [_, t] : tallies) all += t.votes;
    id.confidence = static_cast<double>(id.votes) / static_cast<double>(all);
  }
  return id;
}

double containment(const BBox& plate, const BBox& vehicle) {
  const double a = plate.area();
  if (a <= 0.0) return 0.0;
  return intersection_area(plate, vehicle) / a;
}

std::optional<TrackId> match_plate_to_vehicle(
    const BBox& plate, std::span<const std::pair<TrackId, BBox>> vehicles) {
  std::optional<TrackId> best;
  double best_containment = 0.0;
  double best_area = 0.0;
  for (const auto& [id, box] : vehicles) {
    const double c = containment(plate, box);
    if (c < kPlateContainmentThreshold) continue;
    const double area = box.area();
    const bool better =
        !best || c > best_containment ||
        (c == best_containment && (area < best_area || (area == best_area && id < *best)));
    if (better) {
      best = id;
      best_containment = c;
      best_area = area;
    }
  }
  return best;
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

double cer(std::string_view predicted, std::string_view truth) {
  if (truth.empty()) throw EmptyTruth();
  return static_cast<double>(edit_distance(predicted, truth)) /
         static_cast<double>(truth.size());
}

}  // namespace sentinel
