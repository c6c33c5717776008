#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "citeverify/label.hpp"

namespace citeverify {

// Per-claim citation tallies within one model-condition cell; the resampling
// unit of the cluster bootstrap.
struct ClaimCounts {
    std::string claim_id;
    long existing = 0;
    long unresolved = 0;
    long fabricated = 0;
    long temporal_violations = 0;
    long doi_present = 0;
    long citations = 0;
};

// Tallies summed over a (re)sampled set of clusters.
struct Totals {
    long existing = 0;
    long unresolved = 0;
    long fabricated = 0;
    long temporal_violations = 0;
    long doi_present = 0;
    long citations = 0;
    long claims = 0;

    void add(const ClaimCounts& c);
};

Totals sum_counts(std::span<const ClaimCounts> clusters);

// Citation-weighted statistics over aggregated tallies.
double existing_rate(const Totals& t);
double unresolved_rate(const Totals& t);
double fabricated_rate(const Totals& t);
double temporal_violation_rate(const Totals& t);
double doi_completeness_rate(const Totals& t);
double avg_citations(const Totals& t);

using Statistic = std::function<double(const Totals&)>;

struct Ci {
    double low = 0.0;
    double high = 0.0;
};

// Percentile cluster bootstrap: claims are resampled whole, with replacement,
// B times; the 2.5/97.5 percentiles of the recomputed statistic form the 95%
// interval. Resample b draws from substream(seed, b), so results are
// identical across runs, cluster orderings, and serial/parallel execution.
// Requires at least two clusters.
Ci cluster_bootstrap_ci(std::span<const ClaimCounts> clusters, const Statistic& stat, int B,
                        std::uint64_t seed, int threads = 1);

struct CellKey {
    std::string model_id;
    Condition condition = Condition::Baseline;

    bool operator<(const CellKey& other) const;
    bool operator==(const CellKey& other) const;
};

struct CellMetrics {
    std::string model_id;
    Condition condition = Condition::Baseline;
    int n_claims = 0;
    double existing = 0.0;
    double fabricated = 0.0;
    double unresolved = 0.0;
    double temporal_violations = 0.0;
    double avg_citations = 0.0;
    std::optional<Ci> existing_ci;
    std::optional<Ci> fabricated_ci;
    std::optional<Ci> unresolved_ci;
};

// Point estimates for one cell. Empty cells are an error.
CellMetrics cell_metrics(const std::string& model_id, Condition condition,
                         std::span<const ClaimCounts> clusters);

// Point estimates plus bootstrap CIs for the three rates, computed from one
// shared set of resamples.
CellMetrics cell_metrics_with_ci(const std::string& model_id, Condition condition,
                                 std::span<const ClaimCounts> clusters, int B,
                                 std::uint64_t seed, int threads = 1);

struct ClaimFraction {
    std::string claim_id;
    double f = 0.0; // Existing count / total parsed count, parse failures included
};

ClaimFraction per_claim_fraction(const ClaimCounts& claim);

struct RateDifference {
    double delta = 0.0; // existing_rate(A) - existing_rate(B); positive favors A
    Ci ci;
    bool excludes_zero = false;
};

// Bootstrap CI of the difference in existence rate. In paired mode both
// groups must cover the same claim set and each resample reuses one set of
// claim draws for both; in unpaired mode the groups are resampled
// independently.
RateDifference rate_difference_ci(std::span<const ClaimCounts> group_a,
                                  std::span<const ClaimCounts> group_b, int B,
                                  std::uint64_t seed, bool paired = true, int threads = 1);

// counts[pipeline label][human label], indexed by Label enum order.
struct ConfusionMatrix3 {
    std::array<std::array<long, 3>, 3> counts{};

    long total() const;
    long& at(Label pipeline, Label human);
    long at(Label pipeline, Label human) const;
};

struct KappaResult {
    double agreement = 0.0;
    double kappa = 0.0;
    std::array<double, 3> precision{}; // per pipeline label: diagonal / row total
};

// Observed agreement, chance-corrected kappa from row/column marginals, and
// per-pipeline-label precision. Degenerate marginals (expected agreement 1)
// define kappa = 1 for perfect agreement and are an error otherwise.
KappaResult cohens_kappa(const ConfusionMatrix3& m);

// Human-label composition of audited pipeline-Unresolved citations.
struct AuditRates {
    double existing = 0.0;
    double unresolved = 0.0;
    double fabricated = 0.0;

    void validate() const; // fractions sum to 1
};

// Unresolved row of a confusion matrix as reassignment fractions.
AuditRates audit_rates_from_confusion(const ConfusionMatrix3& m);

// Proportionally reassigns a cell's Unresolved mass using audited rates.
// Rates still sum to one; CIs do not carry over.
CellMetrics sensitivity_reassign(const CellMetrics& cm, const AuditRates& audit);

struct GroupRate {
    std::string key;
    double existing = 0.0;
    long citations = 0;
};

// Citation-weighted existing rate per group, sorted by key. The key function
// may throw for rows it cannot classify.
std::vector<GroupRate> group_rates(std::span<const VerdictRow> rows,
                                   const std::function<std::string(const VerdictRow&)>& key);

// Linear-interpolation quantile (R type 7) over a sorted sample.
double quantile_type7(std::span<const double> sorted, double p);

struct BoxStats {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_low = 0.0;  // smallest value within 1.5*IQR below q1
    double whisker_high = 0.0; // largest value within 1.5*IQR above q3
};

BoxStats box_stats(std::vector<double> values);

// Groups verdict rows into per-cell clusters, clusters sorted by claim_id.
std::map<CellKey, std::vector<ClaimCounts>> group_cells(std::span<const VerdictRow> rows);

// Collapses several models' rows into pooled per-claim clusters for one
// condition (used for proprietary-vs-open-weight contrasts).
std::vector<ClaimCounts> pooled_clusters(std::span<const VerdictRow> rows,
                                         const std::vector<std::string>& models,
                                         Condition condition);

} // namespace citeverify
