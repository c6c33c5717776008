#pragma once

#include <string>
#include <vector>

#include "citeverify/index.hpp"
#include "citeverify/refparse.hpp"

namespace citeverify {

// Weighted metadata similarity: s = 0.60*t + 0.20*a + 0.15*y + 0.05*v.
// Title dominates because it is the most discriminative field.
inline constexpr double kTitleWeight = 0.60;
inline constexpr double kAuthorWeight = 0.20;
inline constexpr double kYearWeight = 0.15;
inline constexpr double kVenueWeight = 0.05;

struct MatchScore {
    double s = 0.0; // weighted total, in [0,1]
    double t = 0.0; // title similarity (token-set ratio)
    double a = 0.0; // author last-name overlap
    double y = 0.0; // year agreement: 1.0 exact, 0.5 off by one, else 0
    double v = 0.0; // venue similarity (partial ratio)
    CandidateRecord candidate;
};

// Lowercases, folds Latin diacritics to ASCII (covering composed and
// decomposed forms alike), turns punctuation into spaces, and splits on
// whitespace. Empty tokens are dropped.
std::vector<std::string> normalize_text(const std::string& s);

// normalize_text joined back with single spaces.
std::string normalize_join(const std::string& s);

// Plain Levenshtein distance over bytes.
std::size_t levenshtein(const std::string& a, const std::string& b);

// 1 - lev/max(len); 1.0 for two empty strings.
double levenshtein_ratio(const std::string& a, const std::string& b);

// Token-set ratio: over the sorted token sets, build the intersection string
// and the two intersection+difference strings, and return the best pairwise
// Levenshtein ratio among them. Equal token sets give 1.0; an empty side
// against a non-empty one gives 0.0.
double token_set_ratio(const std::string& x, const std::string& z);

// Partial ratio: best Levenshtein ratio of the shorter normalized string
// against every window of its length in the longer one. Substrings score 1.0;
// two empty strings score 1.0 by convention.
double partial_ratio(const std::string& x, const std::string& z);

// Last-name set overlap, recall against the parsed citation's authors:
// |parsed ∩ candidate| / |parsed|. Empty parsed set gives 0.0.
double author_overlap(const std::vector<std::string>& parsed_authors,
                      const std::vector<std::string>& candidate_authors);

// Normalized last-name key for one author name ("Doe, J." and "Jane Doe"
// both map to "doe"). Empty when no usable token exists.
std::string last_name_key(const std::string& name);

double year_agreement(const std::optional<int>& parsed_year,
                      const std::optional<int>& candidate_year);

// Scores one candidate against a parsed citation. Requires a parsed title.
// A venue missing on either side contributes v = 0 rather than re-weighting.
MatchScore score_candidate(const ParsedCitation& parsed, const CandidateRecord& candidate);

} // namespace citeverify
