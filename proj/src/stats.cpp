#include "citeverify/stats.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "citeverify/rng.hpp"

namespace citeverify {

namespace {

std::vector<ClaimCounts> sorted_by_claim(std::span<const ClaimCounts> clusters) {
    std::vector<ClaimCounts> out(clusters.begin(), clusters.end());
    std::sort(out.begin(), out.end(),
              [](const ClaimCounts& a, const ClaimCounts& b) { return a.claim_id < b.claim_id; });
    return out;
}

// Runs body(b) for every resample index, split across threads. Each index
// seeds its own RNG substream, so the partitioning cannot affect results.
void for_each_resample(int B, int threads, const std::function<void(int)>& body) {
    if (threads <= 1) {
        for (int b = 0; b < B; ++b) body(b);
        return;
    }
    std::vector<std::thread> pool;
    const int per = (B + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int lo = t * per;
        const int hi = std::min(B, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&body, lo, hi] {
            for (int b = lo; b < hi; ++b) body(b);
        });
    }
    for (auto& th : pool) th.join();
}

Totals resample_totals(const std::vector<ClaimCounts>& clusters, SplitMix64& rng) {
    Totals totals;
    const std::uint64_t n = clusters.size();
    for (std::uint64_t i = 0; i < n; ++i) totals.add(clusters[rng.bounded(n)]);
    return totals;
}

Ci percentile_ci(std::vector<double>& values) {
    std::sort(values.begin(), values.end());
    return Ci{quantile_type7(values, 0.025), quantile_type7(values, 0.975)};
}

constexpr int kExisting = static_cast<int>(Label::Existing);
constexpr int kUnresolved = static_cast<int>(Label::Unresolved);
constexpr int kFabricated = static_cast<int>(Label::Fabricated);

} // namespace

void Totals::add(const ClaimCounts& c) {
    existing += c.existing;
    unresolved += c.unresolved;
    fabricated += c.fabricated;
    temporal_violations += c.temporal_violations;
    doi_present += c.doi_present;
    citations += c.citations;
    claims += 1;
}

Totals sum_counts(std::span<const ClaimCounts> clusters) {
    Totals totals;
    for (const auto& c : clusters) totals.add(c);
    return totals;
}

double existing_rate(const Totals& t) {
    return t.citations == 0 ? 0.0 : static_cast<double>(t.existing) / t.citations;
}
double unresolved_rate(const Totals& t) {
    return t.citations == 0 ? 0.0 : static_cast<double>(t.unresolved) / t.citations;
}
double fabricated_rate(const Totals& t) {
    return t.citations == 0 ? 0.0 : static_cast<double>(t.fabricated) / t.citations;
}
double temporal_violation_rate(const Totals& t) {
    return t.citations == 0 ? 0.0 : static_cast<double>(t.temporal_violations) / t.citations;
}
double doi_completeness_rate(const Totals& t) {
    return t.citations == 0 ? 0.0 : static_cast<double>(t.doi_present) / t.citations;
}
double avg_citations(const Totals& t) {
    return t.claims == 0 ? 0.0 : static_cast<double>(t.citations) / t.claims;
}

Ci cluster_bootstrap_ci(std::span<const ClaimCounts> clusters, const Statistic& stat, int B,
                        std::uint64_t seed, int threads) {
    if (clusters.size() < 2) throw InputError("cluster bootstrap needs at least 2 claims");
    if (B < 1) throw InputError("bootstrap resample count must be >= 1");

    const auto sorted = sorted_by_claim(clusters);
    std::vector<double> values(B);
    for_each_resample(B, threads, [&](int b) {
        SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(b));
        values[b] = stat(resample_totals(sorted, rng));
    });
    return percentile_ci(values);
}

bool CellKey::operator<(const CellKey& other) const {
    if (model_id != other.model_id) return model_id < other.model_id;
    return static_cast<int>(condition) < static_cast<int>(other.condition);
}

bool CellKey::operator==(const CellKey& other) const {
    return model_id == other.model_id && condition == other.condition;
}

CellMetrics cell_metrics(const std::string& model_id, Condition condition,
                         std::span<const ClaimCounts> clusters) {
    const Totals totals = sum_counts(clusters);
    if (totals.citations == 0)
        throw InputError("empty cell: " + model_id + "/" + condition_name(condition));

    CellMetrics cm;
    cm.model_id = model_id;
    cm.condition = condition;
    cm.n_claims = static_cast<int>(clusters.size());
    cm.existing = existing_rate(totals);
    cm.fabricated = fabricated_rate(totals);
    cm.unresolved = unresolved_rate(totals);
    cm.temporal_violations = temporal_violation_rate(totals);
    cm.avg_citations = avg_citations(totals);
    return cm;
}

CellMetrics cell_metrics_with_ci(const std::string& model_id, Condition condition,
                                 std::span<const ClaimCounts> clusters, int B,
                                 std::uint64_t seed, int threads) {
    CellMetrics cm = cell_metrics(model_id, condition, clusters);
    if (clusters.size() < 2) throw InputError("cluster bootstrap needs at least 2 claims");
    if (B < 1) throw InputError("bootstrap resample count must be >= 1");

    const auto sorted = sorted_by_claim(clusters);
    std::vector<double> ex(B), fa(B), un(B);
    for_each_resample(B, threads, [&](int b) {
        SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(b));
        const Totals totals = resample_totals(sorted, rng);
        ex[b] = existing_rate(totals);
        fa[b] = fabricated_rate(totals);
        un[b] = unresolved_rate(totals);
    });
    cm.existing_ci = percentile_ci(ex);
    cm.fabricated_ci = percentile_ci(fa);
    cm.unresolved_ci = percentile_ci(un);
    return cm;
}

ClaimFraction per_claim_fraction(const ClaimCounts& claim) {
    if (claim.citations == 0)
        throw InputError("claim " + claim.claim_id + " has zero citations");
    return ClaimFraction{claim.claim_id,
                         static_cast<double>(claim.existing) / claim.citations};
}

RateDifference rate_difference_ci(std::span<const ClaimCounts> group_a,
                                  std::span<const ClaimCounts> group_b, int B,
                                  std::uint64_t seed, bool paired, int threads) {
    if (group_a.size() < 2 || group_b.size() < 2)
        throw InputError("difference CI needs at least 2 claims per group");
    if (B < 1) throw InputError("bootstrap resample count must be >= 1");

    const auto a = sorted_by_claim(group_a);
    const auto b = sorted_by_claim(group_b);

    if (paired) {
        if (a.size() != b.size())
            throw InputError("paired difference CI requires matching claim sets");
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].claim_id != b[i].claim_id)
                throw InputError("paired difference CI requires matching claim sets (mismatch at " +
                                 a[i].claim_id + " vs " + b[i].claim_id + ")");
    }

    RateDifference out;
    out.delta = existing_rate(sum_counts(a)) - existing_rate(sum_counts(b));

    std::vector<double> deltas(B);
    if (paired) {
        const std::uint64_t n = a.size();
        for_each_resample(B, threads, [&](int idx) {
            SplitMix64 rng = SplitMix64::substream(seed, static_cast<std::uint64_t>(idx));
            Totals ta, tb;
            for (std::uint64_t i = 0; i < n; ++i) {
                const std::uint64_t draw = rng.bounded(n);
                ta.add(a[draw]);
                tb.add(b[draw]);
            }
            deltas[idx] = existing_rate(ta) - existing_rate(tb);
        });
    } else {
        for_each_resample(B, threads, [&](int idx) {
            SplitMix64 rng_a = SplitMix64::substream(seed, 2 * static_cast<std::uint64_t>(idx));
            SplitMix64 rng_b = SplitMix64::substream(seed, 2 * static_cast<std::uint64_t>(idx) + 1);
            deltas[idx] = existing_rate(resample_totals(a, rng_a)) -
                          existing_rate(resample_totals(b, rng_b));
        });
    }
    out.ci = percentile_ci(deltas);
    out.excludes_zero = out.ci.low > 0.0 || out.ci.high < 0.0;
    return out;
}

long ConfusionMatrix3::total() const {
    long sum = 0;
    for (const auto& row : counts)
        for (long v : row) sum += v;
    return sum;
}

long& ConfusionMatrix3::at(Label pipeline, Label human) {
    return counts[static_cast<int>(pipeline)][static_cast<int>(human)];
}

long ConfusionMatrix3::at(Label pipeline, Label human) const {
    return counts[static_cast<int>(pipeline)][static_cast<int>(human)];
}

KappaResult cohens_kappa(const ConfusionMatrix3& m) {
    const double total = static_cast<double>(m.total());
    if (total <= 0) throw InputError("confusion matrix is empty");

    double trace = 0.0;
    std::array<double, 3> row{}, col{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double v = static_cast<double>(m.counts[i][j]);
            if (i == j) trace += v;
            row[i] += v;
            col[j] += v;
        }
    }

    KappaResult result;
    result.agreement = trace / total;
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) expected += (row[i] / total) * (col[i] / total);

    if (std::abs(1.0 - expected) < 1e-12) {
        if (std::abs(1.0 - result.agreement) < 1e-12)
            result.kappa = 1.0;
        else
            throw InputError("kappa undefined: expected agreement is 1 but observed is not");
    } else {
        result.kappa = (result.agreement - expected) / (1.0 - expected);
    }

    for (int i = 0; i < 3; ++i)
        result.precision[i] = row[i] == 0.0 ? 0.0 : static_cast<double>(m.counts[i][i]) / row[i];
    return result;
}

void AuditRates::validate() const {
    if (existing < 0 || unresolved < 0 || fabricated < 0)
        throw InputError("audit rates must be non-negative");
    if (std::abs(existing + unresolved + fabricated - 1.0) > 1e-9)
        throw InputError("audit rates must sum to 1");
}

AuditRates audit_rates_from_confusion(const ConfusionMatrix3& m) {
    const auto& row = m.counts[kUnresolved];
    const double total = static_cast<double>(row[0] + row[1] + row[2]);
    if (total <= 0) throw InputError("no audited pipeline-Unresolved citations");
    AuditRates rates;
    rates.existing = row[kExisting] / total;
    rates.unresolved = row[kUnresolved] / total;
    rates.fabricated = row[kFabricated] / total;
    return rates;
}

CellMetrics sensitivity_reassign(const CellMetrics& cm, const AuditRates& audit) {
    audit.validate();
    CellMetrics out = cm;
    const double u = cm.unresolved;
    out.existing = cm.existing + u * audit.existing;
    out.fabricated = cm.fabricated + u * audit.fabricated;
    out.unresolved = u * audit.unresolved;
    out.existing_ci.reset();
    out.fabricated_ci.reset();
    out.unresolved_ci.reset();
    return out;
}

std::vector<GroupRate> group_rates(std::span<const VerdictRow> rows,
                                   const std::function<std::string(const VerdictRow&)>& key) {
    std::map<std::string, std::pair<long, long>> acc; // key -> (existing, total)
    for (const auto& row : rows) {
        auto& slot = acc[key(row)];
        slot.second += 1;
        if (row.verdict.label == Label::Existing) slot.first += 1;
    }
    std::vector<GroupRate> out;
    for (const auto& [k, counts] : acc)
        out.push_back(GroupRate{k, static_cast<double>(counts.first) / counts.second,
                                counts.second});
    return out;
}

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw InputError("quantile of empty sample");
    if (p <= 0.0) return sorted.front();
    if (p >= 1.0) return sorted.back();
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const double frac = h - static_cast<double>(lo);
    if (lo + 1 >= sorted.size()) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty()) throw InputError("box stats of empty sample");
    std::sort(values.begin(), values.end());

    BoxStats box;
    box.median = quantile_type7(values, 0.5);
    box.q1 = quantile_type7(values, 0.25);
    box.q3 = quantile_type7(values, 0.75);
    const double iqr = box.q3 - box.q1;
    const double lower_fence = box.q1 - 1.5 * iqr;
    const double upper_fence = box.q3 + 1.5 * iqr;

    box.whisker_low = values.back();
    for (double v : values)
        if (v >= lower_fence) {
            box.whisker_low = v;
            break;
        }
    box.whisker_high = values.front();
    for (auto it = values.rbegin(); it != values.rend(); ++it)
        if (*it <= upper_fence) {
            box.whisker_high = *it;
            break;
        }
    return box;
}

std::map<CellKey, std::vector<ClaimCounts>> group_cells(std::span<const VerdictRow> rows) {
    std::map<CellKey, std::map<std::string, ClaimCounts>> acc;
    for (const auto& row : rows) {
        auto& claim = acc[CellKey{row.model_id, row.condition}][row.claim_id];
        claim.claim_id = row.claim_id;
        claim.citations += 1;
        switch (row.verdict.label) {
            case Label::Existing: claim.existing += 1; break;
            case Label::Unresolved: claim.unresolved += 1; break;
            case Label::Fabricated: claim.fabricated += 1; break;
        }
        if (row.verdict.temporal_violation) claim.temporal_violations += 1;
        if (row.verdict.doi_present) claim.doi_present += 1;
    }

    std::map<CellKey, std::vector<ClaimCounts>> out;
    for (auto& [key, by_claim] : acc) {
        auto& clusters = out[key];
        for (auto& [claim_id, counts] : by_claim) clusters.push_back(std::move(counts));
    }
    return out;
}

std::vector<ClaimCounts> pooled_clusters(std::span<const VerdictRow> rows,
                                         const std::vector<std::string>& models,
                                         Condition condition) {
    std::map<std::string, ClaimCounts> by_claim;
    for (const auto& row : rows) {
        if (row.condition != condition) continue;
        if (std::find(models.begin(), models.end(), row.model_id) == models.end()) continue;
        auto& claim = by_claim[row.claim_id];
        claim.claim_id = row.claim_id;
        claim.citations += 1;
        switch (row.verdict.label) {
            case Label::Existing: claim.existing += 1; break;
            case Label::Unresolved: claim.unresolved += 1; break;
            case Label::Fabricated: claim.fabricated += 1; break;
        }
        if (row.verdict.temporal_violation) claim.temporal_violations += 1;
        if (row.verdict.doi_present) claim.doi_present += 1;
    }
    std::vector<ClaimCounts> out;
    for (auto& [claim_id, counts] : by_claim) out.push_back(std::move(counts));
    return out;
}

} // namespace citeverify
