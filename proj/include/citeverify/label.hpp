#pragma once

#include <optional>
#include <string>

#include "citeverify/claims.hpp"
#include "citeverify/index.hpp"
#include "citeverify/match.hpp"
#include "citeverify/refparse.hpp"

namespace citeverify {

enum class Label { Existing, Unresolved, Fabricated };

std::string label_name(Label l);
std::optional<Label> label_from_string(const std::string& s);

struct LabelerConfig {
    double exist_threshold = 0.85;
    double unresolved_threshold = 0.60;

    void validate() const; // 0 < unresolved < exist <= 1
};

// Per-citation outcome. best is absent for parse failures and for citations
// with no candidates at all.
struct Verdict {
    int citation_index = 0;
    Label label = Label::Unresolved;
    std::optional<MatchScore> best;
    bool temporal_violation = false;
    bool doi_present = false;
};

// Three-way labeling from the best candidate score. Parse failures are
// Unresolved without retrieval; an empty candidate set is Fabricated; ties at
// the best score keep the earliest candidate in retrieval order.
Verdict label_citation(const ParsedCitation& parsed, const CandidateSet& candidates,
                       const LabelerConfig& cfg);

// True iff a window was stated and the year falls outside it (bounds
// inclusive). No stated window, or no year, never violates.
bool flag_temporal(const std::optional<int>& year, const std::optional<YearWindow>& window);

// Syntactic DOI validity: "10.<registrant>/<suffix>".
bool doi_valid(const std::string& doi);
bool doi_presence(const ParsedCitation& parsed);

// Full per-citation judgment: label, then the temporal flag using the matched
// record's year for Existing verdicts and the parsed year otherwise, then DOI
// presence. `stated_window` must be the claim window only when the condition
// actually stated one.
Verdict judge_citation(const ParsedCitation& parsed, const CandidateSet& candidates,
                       const std::optional<YearWindow>& stated_window, const LabelerConfig& cfg);

// One line of the verdicts file.
struct VerdictRow {
    std::string claim_id;
    std::string model_id;
    Condition condition = Condition::Baseline;
    Verdict verdict;
};

json verdict_row_to_json(const VerdictRow& row);
VerdictRow verdict_row_from_json(const json& obj);

} // namespace citeverify
