#include "citeverify/label.hpp"

#include <cctype>
#include <regex>

namespace citeverify {

std::string label_name(Label l) {
    switch (l) {
        case Label::Existing: return "existing";
        case Label::Unresolved: return "unresolved";
        case Label::Fabricated: return "fabricated";
    }
    return "unresolved";
}

std::optional<Label> label_from_string(const std::string& s) {
    std::string key;
    for (unsigned char c : s) key += static_cast<char>(std::tolower(c));
    if (key == "existing") return Label::Existing;
    if (key == "unresolved") return Label::Unresolved;
    if (key == "fabricated") return Label::Fabricated;
    return std::nullopt;
}

void LabelerConfig::validate() const {
    if (!(0.0 < unresolved_threshold && unresolved_threshold < exist_threshold &&
          exist_threshold <= 1.0))
        throw InputError("labeler thresholds must satisfy 0 < unresolved < exist <= 1");
}

Verdict label_citation(const ParsedCitation& parsed, const CandidateSet& candidates,
                       const LabelerConfig& cfg) {
    cfg.validate();
    Verdict verdict;
    verdict.citation_index = parsed.citation_index;

    if (!parsed.parse_ok) {
        verdict.label = Label::Unresolved;
        return verdict;
    }
    if (candidates.candidates.empty()) {
        verdict.label = Label::Fabricated;
        return verdict;
    }

    std::optional<MatchScore> best;
    for (const auto& candidate : candidates.candidates) {
        MatchScore score = score_candidate(parsed, candidate);
        if (!best || score.s > best->s) best = std::move(score);
    }

    verdict.best = best;
    if (best->s >= cfg.exist_threshold)
        verdict.label = Label::Existing;
    else if (best->s >= cfg.unresolved_threshold)
        verdict.label = Label::Unresolved;
    else
        verdict.label = Label::Fabricated;
    return verdict;
}

bool flag_temporal(const std::optional<int>& year, const std::optional<YearWindow>& window) {
    if (!window || !year) return false;
    return !window->contains(*year);
}

bool doi_valid(const std::string& doi) {
    static const std::regex kDoi(R"(10\.\d{4,9}/\S+)");
    return std::regex_match(doi, kDoi);
}

bool doi_presence(const ParsedCitation& parsed) {
    return parsed.doi.has_value() && doi_valid(*parsed.doi);
}

Verdict judge_citation(const ParsedCitation& parsed, const CandidateSet& candidates,
                       const std::optional<YearWindow>& stated_window, const LabelerConfig& cfg) {
    Verdict verdict = label_citation(parsed, candidates, cfg);

    std::optional<int> year = parsed.year;
    if (verdict.label == Label::Existing && verdict.best && verdict.best->candidate.year)
        year = verdict.best->candidate.year;
    verdict.temporal_violation = flag_temporal(year, stated_window);
    verdict.doi_present = doi_presence(parsed);
    return verdict;
}

json verdict_row_to_json(const VerdictRow& row) {
    json obj;
    obj["claim_id"] = row.claim_id;
    obj["model_id"] = row.model_id;
    obj["condition"] = condition_name(row.condition);
    obj["citation_index"] = row.verdict.citation_index;
    obj["label"] = label_name(row.verdict.label);
    if (row.verdict.best) {
        const MatchScore& b = *row.verdict.best;
        obj["best_score"] = json{{"s", b.s}, {"t", b.t}, {"a", b.a}, {"y", b.y}, {"v", b.v},
                                 {"matched_title", b.candidate.title},
                                 {"matched_source", source_name(b.candidate.source)}};
        if (b.candidate.doi) obj["best_score"]["matched_doi"] = *b.candidate.doi;
    } else {
        obj["best_score"] = nullptr;
    }
    obj["temporal_violation"] = row.verdict.temporal_violation;
    obj["doi_present"] = row.verdict.doi_present;
    return obj;
}

VerdictRow verdict_row_from_json(const json& obj) {
    VerdictRow row;
    try {
        row.claim_id = obj.at("claim_id").get<std::string>();
        row.model_id = obj.at("model_id").get<std::string>();
        const std::string cond = obj.at("condition").get<std::string>();
        const auto parsed_cond = condition_from_string(cond);
        if (!parsed_cond) throw InputError("unknown condition \"" + cond + "\"");
        row.condition = *parsed_cond;
        row.verdict.citation_index = obj.at("citation_index").get<int>();
        const std::string label = obj.at("label").get<std::string>();
        const auto parsed_label = label_from_string(label);
        if (!parsed_label) throw InputError("unknown label \"" + label + "\"");
        row.verdict.label = *parsed_label;
        if (obj.contains("best_score") && !obj["best_score"].is_null()) {
            const auto& b = obj["best_score"];
            MatchScore score;
            score.s = b.at("s").get<double>();
            score.t = b.at("t").get<double>();
            score.a = b.at("a").get<double>();
            score.y = b.at("y").get<double>();
            score.v = b.at("v").get<double>();
            score.candidate.title = b.value("matched_title", std::string());
            if (b.contains("matched_doi")) score.candidate.doi = b["matched_doi"].get<std::string>();
            row.verdict.best = std::move(score);
        }
        row.verdict.temporal_violation = obj.at("temporal_violation").get<bool>();
        row.verdict.doi_present = obj.at("doi_present").get<bool>();
    } catch (const json::exception& e) {
        throw InputError(std::string("bad verdict record: ") + e.what());
    }
    return row;
}

} // namespace citeverify
