#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "citeverify/jsonl.hpp"

namespace citeverify {

// The six claim domain groups.
enum class Domain {
    SeCs,
    NaturalSciences,
    MedicineHealth,
    SocialSciences,
    Humanities,
    Interdisciplinary,
};

inline constexpr int kDomainCount = 6;

std::string domain_name(Domain d);
std::optional<Domain> domain_from_string(const std::string& s);
std::array<Domain, kDomainCount> all_domains();

// Inclusive publication-year window.
struct YearWindow {
    int start_year = 0;
    int end_year = 0;

    bool contains(int year) const { return year >= start_year && year <= end_year; }
    void validate() const; // start <= end, both in [1000, 3000]
};

struct ClaimRecord {
    std::string claim_id;
    Domain domain = Domain::SeCs;
    std::string text;
    std::optional<YearWindow> window;
    std::vector<std::string> anchors; // keyword hints, identical across conditions
};

class ClaimSet {
public:
    void add(ClaimRecord record); // duplicate claim_id -> InputError
    const ClaimRecord* find(const std::string& claim_id) const;
    const ClaimRecord& at(const std::string& claim_id) const;

    std::size_t size() const { return claims_.size(); }
    bool empty() const { return claims_.empty(); }
    auto begin() const { return claims_.begin(); }
    auto end() const { return claims_.end(); }

    std::array<std::size_t, kDomainCount> domain_counts() const;

private:
    std::vector<ClaimRecord> claims_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

// Loads the JSONL claims file. Malformed records and duplicate ids raise
// InputError naming the offending claim/line.
ClaimSet load_claims(const std::filesystem::path& path);

enum class Condition { Baseline, Temporal, Survey, NonDisclosure, Combo };

inline constexpr int kConditionCount = 5;

std::string condition_name(Condition c);
std::optional<Condition> condition_from_string(const std::string& s);
std::array<Condition, kConditionCount> all_condition_names();

struct ConditionSpec {
    Condition name = Condition::Baseline;
    int requested_citations = 5; // k: 5, or 8 for Survey/Combo
    bool uses_window = false;
    bool survey_structure = false;     // organize into 3-4 approach categories
    bool nondisclosure_clause = false; // forbid claiming training-data access

    static ConditionSpec standard(Condition c);
};

// The five standard conditions in canonical order.
std::vector<ConditionSpec> standard_conditions();

struct RunSpec {
    std::string claim_id;
    Condition condition = Condition::Baseline;
    std::string model_id;
};

// Cartesian product in claim-major, then condition, then model order.
// Empty inputs raise InputError.
std::vector<RunSpec> expand_runs(const ClaimSet& claims,
                                 const std::vector<ConditionSpec>& conditions,
                                 const std::vector<std::string>& models);

// Editable prompt templates, one per condition, with placeholders {claim},
// {k}, {start}, {end}, {anchors}.
class TemplateSet {
public:
    static TemplateSet builtin();
    // Reads <condition>.txt per condition from a directory; missing files
    // fall back to the builtin text.
    static TemplateSet load(const std::filesystem::path& dir);

    const std::string& for_condition(Condition c) const;
    void set(Condition c, std::string text);

private:
    std::map<Condition, std::string> templates_;
};

class MissingWindowError : public std::runtime_error {
public:
    explicit MissingWindowError(const std::string& what) : std::runtime_error(what) {}
};

// Deterministic template instantiation. A window-using condition on a
// windowless claim raises MissingWindowError.
std::string render_prompt(const ClaimRecord& claim, const ConditionSpec& condition,
                          const TemplateSet& templates);

} // namespace citeverify
