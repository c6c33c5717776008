#include "citeverify/claims.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

namespace citeverify {

namespace {

// Collapse a user-supplied group name to a key: lowercase alnum runs joined
// by '_' ("SE & CS" and "se_cs" hash identically).
std::string canonical_key(const std::string& s) {
    std::string key;
    bool gap = false;
    for (unsigned char c : s) {
        if (std::isalnum(c)) {
            if (gap && !key.empty()) key += '_';
            gap = false;
            key += static_cast<char>(std::tolower(c));
        } else {
            gap = true;
        }
    }
    return key;
}

void replace_all(std::string& text, const std::string& needle, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
}

const char* kBaselineTemplate =
    "You are helping to gather scholarly evidence.\n"
    "\n"
    "Claim under study: {claim}\n"
    "Seed keywords: {anchors}\n"
    "\n"
    "List exactly {k} published works that bear on this claim. Write one full\n"
    "bibliographic entry per work (authors; year; title; venue; DOI when known)\n"
    "in a numbered list under a line reading \"References:\".\n";

const char* kTemporalExtra =
    "Only cite works published between {start} and {end}, inclusive. Entries\n"
    "outside that publication window are not acceptable.\n";

const char* kSurveyExtra =
    "Before the reference list, organize the works into three or four short\n"
    "approach categories with a one-line header each, survey style.\n";

const char* kNonDisclosureExtra =
    "Policy: do not assert access to private, proprietary, or memorized\n"
    "training material. Cite only works you can describe from the public\n"
    "scholarly record.\n";

std::string builtin_template(Condition c) {
    std::string text = kBaselineTemplate;
    const ConditionSpec spec = ConditionSpec::standard(c);
    if (spec.uses_window) text += "\n" + std::string(kTemporalExtra);
    if (spec.survey_structure) text += "\n" + std::string(kSurveyExtra);
    if (spec.nondisclosure_clause) text += "\n" + std::string(kNonDisclosureExtra);
    return text;
}

} // namespace

std::string domain_name(Domain d) {
    switch (d) {
        case Domain::SeCs: return "se_cs";
        case Domain::NaturalSciences: return "natural_sciences";
        case Domain::MedicineHealth: return "medicine_health";
        case Domain::SocialSciences: return "social_sciences";
        case Domain::Humanities: return "humanities";
        case Domain::Interdisciplinary: return "interdisciplinary";
    }
    return "se_cs";
}

std::optional<Domain> domain_from_string(const std::string& s) {
    const std::string key = canonical_key(s);
    if (key == "se_cs" || key == "secs" || key == "se_and_cs") return Domain::SeCs;
    if (key == "natural_sciences") return Domain::NaturalSciences;
    if (key == "medicine_health" || key == "medicine_and_health") return Domain::MedicineHealth;
    if (key == "social_sciences") return Domain::SocialSciences;
    if (key == "humanities") return Domain::Humanities;
    if (key == "interdisciplinary") return Domain::Interdisciplinary;
    return std::nullopt;
}

std::array<Domain, kDomainCount> all_domains() {
    return {Domain::SeCs,          Domain::NaturalSciences, Domain::MedicineHealth,
            Domain::SocialSciences, Domain::Humanities,      Domain::Interdisciplinary};
}

void YearWindow::validate() const {
    if (start_year < 1000 || end_year > 3000 || start_year > end_year)
        throw InputError("invalid year window [" + std::to_string(start_year) + ", " +
                         std::to_string(end_year) + "]");
}

void ClaimSet::add(ClaimRecord record) {
    if (by_id_.count(record.claim_id))
        throw InputError("duplicate claim_id: " + record.claim_id);
    by_id_.emplace(record.claim_id, claims_.size());
    claims_.push_back(std::move(record));
}

const ClaimRecord* ClaimSet::find(const std::string& claim_id) const {
    const auto it = by_id_.find(claim_id);
    return it == by_id_.end() ? nullptr : &claims_[it->second];
}

const ClaimRecord& ClaimSet::at(const std::string& claim_id) const {
    const ClaimRecord* rec = find(claim_id);
    if (!rec) throw InputError("unknown claim_id: " + claim_id);
    return *rec;
}

std::array<std::size_t, kDomainCount> ClaimSet::domain_counts() const {
    std::array<std::size_t, kDomainCount> counts{};
    for (const auto& claim : claims_) counts[static_cast<int>(claim.domain)]++;
    return counts;
}

ClaimSet load_claims(const std::filesystem::path& path) {
    ClaimSet set;
    for_each_jsonl(path, [&](std::size_t lineno, const json& obj) {
        const std::string where = path.string() + ":" + std::to_string(lineno);
        ClaimRecord rec;
        try {
            rec.claim_id = obj.at("claim_id").get<std::string>();
            const std::string domain = obj.at("domain").get<std::string>();
            const auto parsed = domain_from_string(domain);
            if (!parsed) throw InputError(where + ": unknown domain \"" + domain + "\"");
            rec.domain = *parsed;
            rec.text = obj.at("text").get<std::string>();
            if (obj.contains("window") && !obj["window"].is_null()) {
                const auto& w = obj["window"];
                if (!w.is_array() || w.size() != 2)
                    throw InputError(where + ": window must be a [start, end] pair");
                rec.window = YearWindow{w[0].get<int>(), w[1].get<int>()};
                rec.window->validate();
            }
            if (obj.contains("anchors") && !obj["anchors"].is_null())
                rec.anchors = obj["anchors"].get<std::vector<std::string>>();
        } catch (const json::exception& e) {
            throw InputError(where + ": " + e.what());
        }
        try {
            set.add(std::move(rec));
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
    });
    return set;
}

std::string condition_name(Condition c) {
    switch (c) {
        case Condition::Baseline: return "baseline";
        case Condition::Temporal: return "temporal";
        case Condition::Survey: return "survey";
        case Condition::NonDisclosure: return "nondisclosure";
        case Condition::Combo: return "combo";
    }
    return "baseline";
}

std::optional<Condition> condition_from_string(const std::string& s) {
    const std::string key = canonical_key(s);
    if (key == "baseline") return Condition::Baseline;
    if (key == "temporal") return Condition::Temporal;
    if (key == "survey") return Condition::Survey;
    if (key == "nondisclosure" || key == "non_disclosure") return Condition::NonDisclosure;
    if (key == "combo" || key == "combined") return Condition::Combo;
    return std::nullopt;
}

std::array<Condition, kConditionCount> all_condition_names() {
    return {Condition::Baseline, Condition::Temporal, Condition::Survey,
            Condition::NonDisclosure, Condition::Combo};
}

ConditionSpec ConditionSpec::standard(Condition c) {
    ConditionSpec spec;
    spec.name = c;
    switch (c) {
        case Condition::Baseline:
            break;
        case Condition::Temporal:
            spec.uses_window = true;
            break;
        case Condition::Survey:
            spec.requested_citations = 8;
            spec.survey_structure = true;
            break;
        case Condition::NonDisclosure:
            spec.nondisclosure_clause = true;
            break;
        case Condition::Combo:
            spec.requested_citations = 8;
            spec.uses_window = true;
            spec.survey_structure = true;
            spec.nondisclosure_clause = true;
            break;
    }
    return spec;
}

std::vector<ConditionSpec> standard_conditions() {
    std::vector<ConditionSpec> out;
    for (Condition c : all_condition_names()) out.push_back(ConditionSpec::standard(c));
    return out;
}

std::vector<RunSpec> expand_runs(const ClaimSet& claims,
                                 const std::vector<ConditionSpec>& conditions,
                                 const std::vector<std::string>& models) {
    if (claims.empty()) throw InputError("expand_runs: empty claim set");
    if (conditions.empty()) throw InputError("expand_runs: no conditions");
    if (models.empty()) throw InputError("expand_runs: no models");
    std::vector<RunSpec> runs;
    runs.reserve(claims.size() * conditions.size() * models.size());
    for (const auto& claim : claims)
        for (const auto& cond : conditions)
            for (const auto& model : models)
                runs.push_back(RunSpec{claim.claim_id, cond.name, model});
    return runs;
}

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    for (Condition c : all_condition_names()) set.templates_[c] = builtin_template(c);
    return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    TemplateSet set = builtin();
    for (Condition c : all_condition_names()) {
        const auto file = dir / (condition_name(c) + ".txt");
        std::ifstream in(file, std::ios::binary);
        if (!in) continue;
        std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        set.templates_[c] = std::move(text);
    }
    return set;
}

const std::string& TemplateSet::for_condition(Condition c) const {
    return templates_.at(c);
}

void TemplateSet::set(Condition c, std::string text) { templates_[c] = std::move(text); }

std::string render_prompt(const ClaimRecord& claim, const ConditionSpec& condition,
                          const TemplateSet& templates) {
    if (condition.uses_window && !claim.window)
        throw MissingWindowError("claim " + claim.claim_id + " has no year window but condition " +
                                 condition_name(condition.name) + " requires one");

    std::string text = templates.for_condition(condition.name);
    replace_all(text, "{claim}", claim.text);
    replace_all(text, "{k}", std::to_string(condition.requested_citations));

    std::string anchors;
    for (std::size_t i = 0; i < claim.anchors.size(); ++i) {
        if (i) anchors += ", ";
        anchors += claim.anchors[i];
    }
    replace_all(text, "{anchors}", anchors);
    replace_all(text, "{start}", claim.window ? std::to_string(claim.window->start_year) : "");
    replace_all(text, "{end}", claim.window ? std::to_string(claim.window->end_year) : "");
    return text;
}

} // namespace citeverify
