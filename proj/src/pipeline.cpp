#include "citeverify/pipeline.hpp"

#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "citeverify/claims.hpp"
#include "citeverify/stats.hpp"

namespace citeverify {

namespace {

int guard(const std::function<int()>& body) {
    try {
        return body();
    } catch (const RetrievalBudgetError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRetrievalBudget;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::shared_ptr<IndexBackend> make_backend(const PipelineConfig& cfg) {
    std::shared_ptr<IndexBackend> inner;
    if (cfg.backend == "fixture") {
        if (cfg.fixture_dir.empty())
            throw InputError("fixture backend selected but no fixture directory given");
        inner = std::make_shared<FixtureBackend>(cfg.fixture_dir);
    } else if (cfg.backend == "live") {
        inner = std::make_shared<LiveBackend>(make_httplib_transport(cfg.retrieval),
                                              cfg.retrieval);
    } else {
        throw InputError("unknown backend \"" + cfg.backend + "\" (expected fixture or live)");
    }
    if (!cfg.retrieval.cache_dir.empty())
        return std::make_shared<CachedBackend>(inner, cfg.retrieval.cache_dir);
    return inner;
}

std::vector<VerdictRow> load_verdict_rows(const std::filesystem::path& path) {
    std::vector<VerdictRow> rows;
    for_each_jsonl(path, [&](std::size_t lineno, const json& obj) {
        try {
            rows.push_back(verdict_row_from_json(obj));
        } catch (const InputError& e) {
            throw InputError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return rows;
}

struct AuditRow {
    std::string claim_id;
    std::string model_id;
    Condition condition = Condition::Baseline;
    int citation_index = 0;
    Label human = Label::Unresolved;
    std::optional<Label> pipeline; // cross-checked against the verdicts when present
};

std::vector<AuditRow> load_audit_rows(const std::filesystem::path& path) {
    std::vector<AuditRow> rows;
    for_each_jsonl(path, [&](std::size_t lineno, const json& obj) {
        const std::string where = path.string() + ":" + std::to_string(lineno);
        try {
            AuditRow row;
            row.claim_id = obj.at("claim_id").get<std::string>();
            row.model_id = obj.at("model_id").get<std::string>();
            const auto cond = condition_from_string(obj.at("condition").get<std::string>());
            if (!cond) throw InputError(where + ": unknown condition");
            row.condition = *cond;
            row.citation_index = obj.at("citation_index").get<int>();
            const auto human = label_from_string(obj.at("human_label").get<std::string>());
            if (!human) throw InputError(where + ": unknown human_label");
            row.human = *human;
            if (obj.contains("pipeline_label")) {
                const auto pl = label_from_string(obj["pipeline_label"].get<std::string>());
                if (!pl) throw InputError(where + ": unknown pipeline_label");
                row.pipeline = *pl;
            }
            rows.push_back(std::move(row));
        } catch (const json::exception& e) {
            throw InputError(where + ": " + e.what());
        }
    });
    return rows;
}

std::string verdict_key(const std::string& claim_id, const std::string& model_id,
                        Condition condition, int citation_index) {
    return claim_id + "|" + model_id + "|" + condition_name(condition) + "|" +
           std::to_string(citation_index);
}

// Resolves every audit row against the verdicts and tallies
// counts[pipeline][human].
ConfusionMatrix3 build_confusion(const std::vector<VerdictRow>& verdicts,
                                 const std::vector<AuditRow>& audit) {
    std::map<std::string, Label> by_key;
    for (const auto& row : verdicts)
        by_key[verdict_key(row.claim_id, row.model_id, row.condition,
                           row.verdict.citation_index)] = row.verdict.label;

    ConfusionMatrix3 m;
    for (const auto& row : audit) {
        const std::string key =
            verdict_key(row.claim_id, row.model_id, row.condition, row.citation_index);
        const auto it = by_key.find(key);
        if (it == by_key.end())
            throw InputError("audit row does not resolve to any verdict: " + key);
        if (row.pipeline && *row.pipeline != it->second)
            throw InputError("audit row pipeline_label disagrees with verdicts file: " + key);
        m.at(it->second, row.human) += 1;
    }
    return m;
}

std::vector<std::string> distinct_models(const std::vector<VerdictRow>& rows) {
    std::set<std::string> seen;
    for (const auto& row : rows) seen.insert(row.model_id);
    return {seen.begin(), seen.end()};
}

json cell_to_json(const CellMetrics& cm) {
    json obj;
    obj["model"] = cm.model_id;
    obj["condition"] = condition_name(cm.condition);
    obj["n_claims"] = cm.n_claims;
    obj["existing"] = cm.existing;
    obj["fabricated"] = cm.fabricated;
    obj["unresolved"] = cm.unresolved;
    obj["t_viol"] = cm.temporal_violations;
    obj["avg_cit"] = cm.avg_citations;
    auto ci = [](const std::optional<Ci>& c) {
        return c ? json{c->low, c->high} : json(nullptr);
    };
    obj["existing_ci"] = ci(cm.existing_ci);
    obj["fabricated_ci"] = ci(cm.fabricated_ci);
    obj["unresolved_ci"] = ci(cm.unresolved_ci);
    return obj;
}

} // namespace

std::filesystem::path PipelineConfig::resolved_verdicts_path() const {
    return verdicts_path.empty() ? report_dir / "verdicts.jsonl" : verdicts_path;
}

int cmd_render_prompts(const PipelineConfig& cfg) {
    return guard([&] {
        const ClaimSet claims = load_claims(cfg.claims_path);
        const TemplateSet templates =
            cfg.templates_dir.empty() ? TemplateSet::builtin() : TemplateSet::load(cfg.templates_dir);

        const auto dir = cfg.report_dir / "prompts";
        std::filesystem::create_directories(dir);

        std::size_t written = 0, skipped = 0;
        for (const auto& claim : claims) {
            for (const ConditionSpec& cond : standard_conditions()) {
                try {
                    const std::string text = render_prompt(claim, cond, templates);
                    write_file_atomic(
                        dir / (claim.claim_id + "__" + condition_name(cond.name) + ".txt"), text);
                    ++written;
                } catch (const MissingWindowError& e) {
                    std::cerr << "skipped " << claim.claim_id << "/" << condition_name(cond.name)
                              << ": " << e.what() << "\n";
                    ++skipped;
                }
            }
        }
        std::cout << "wrote " << written << " prompt files to " << dir.string();
        if (skipped) std::cout << " (" << skipped << " skipped: missing year window)";
        std::cout << "\n";
        return kExitOk;
    });
}

int cmd_verify(const PipelineConfig& cfg) {
    return guard([&] {
        const ClaimSet claims = load_claims(cfg.claims_path);
        auto backend = make_backend(cfg);

        std::vector<ModelOutput> outputs;
        for_each_jsonl(cfg.outputs_path, [&](std::size_t lineno, const json& obj) {
            try {
                outputs.push_back(model_output_from_json(obj));
            } catch (const InputError& e) {
                throw InputError(cfg.outputs_path.string() + ":" + std::to_string(lineno) + ": " +
                                 e.what());
            }
        });

        std::vector<json> verdict_lines;
        std::vector<json> parsed_lines;
        std::vector<json> retrieval_errors;
        std::size_t total_citations = 0, parse_failures = 0, failed_retrievals = 0;
        long label_counts[3] = {0, 0, 0};

        for (std::size_t i = 0; i < outputs.size(); ++i) {
            const ModelOutput& out = outputs[i];
            const auto cond = condition_from_string(out.condition);
            if (!cond)
                throw InputError("output for claim " + out.claim_id + ": unknown condition \"" +
                                 out.condition + "\"");
            const ClaimRecord& claim = claims.at(out.claim_id);
            const ConditionSpec spec = ConditionSpec::standard(*cond);
            const std::optional<YearWindow> stated_window =
                spec.uses_window ? claim.window : std::nullopt;

            const auto raw_refs = extract_reference_block(out.output_text);
            for (std::size_t r = 0; r < raw_refs.size(); ++r) {
                const ParsedCitation parsed =
                    parse_reference(raw_refs[r], static_cast<int>(r + 1));
                ++total_citations;
                if (!parsed.parse_ok) ++parse_failures;

                json parsed_line = parsed_citation_to_json(parsed);
                parsed_line["claim_id"] = out.claim_id;
                parsed_line["model_id"] = out.model_id;
                parsed_line["condition"] = condition_name(*cond);
                parsed_lines.push_back(std::move(parsed_line));

                CandidateSet candidates;
                candidates.citation_index = parsed.citation_index;
                bool retrieval_failed = false;
                if (parsed.parse_ok) {
                    try {
                        candidates = retrieve_candidates(parsed, cfg.retrieval, *backend);
                    } catch (const RetrievalError& e) {
                        retrieval_failed = true;
                        ++failed_retrievals;
                        retrieval_errors.push_back(json{{"claim_id", out.claim_id},
                                                        {"model_id", out.model_id},
                                                        {"condition", condition_name(*cond)},
                                                        {"citation_index", parsed.citation_index},
                                                        {"error", e.what()}});
                    }
                }

                VerdictRow row;
                row.claim_id = out.claim_id;
                row.model_id = out.model_id;
                row.condition = *cond;
                if (retrieval_failed) {
                    // Unlabelable without candidates; kept Unresolved and marked.
                    row.verdict.citation_index = parsed.citation_index;
                    row.verdict.label = Label::Unresolved;
                    row.verdict.doi_present = doi_presence(parsed);
                    row.verdict.temporal_violation = flag_temporal(parsed.year, stated_window);
                } else {
                    row.verdict = judge_citation(parsed, candidates, stated_window, cfg.labeler);
                }
                label_counts[static_cast<int>(row.verdict.label)] += 1;

                json line = verdict_row_to_json(row);
                if (retrieval_failed) line["retrieval_failed"] = true;
                verdict_lines.push_back(std::move(line));
            }

            if ((i + 1) % 50 == 0)
                std::cerr << "processed " << (i + 1) << "/" << outputs.size() << " outputs\n";
        }

        std::filesystem::create_directories(cfg.report_dir);
        if (!retrieval_errors.empty())
            write_jsonl(cfg.report_dir / "retrieval_errors.jsonl", retrieval_errors);

        if (total_citations > 0 &&
            static_cast<double>(failed_retrievals) >
                cfg.failure_budget * static_cast<double>(total_citations)) {
            std::ostringstream msg;
            msg << failed_retrievals << "/" << total_citations
                << " citations hit hard retrieval errors (budget "
                << static_cast<int>(cfg.failure_budget * 100) << "%); see "
                << (cfg.report_dir / "retrieval_errors.jsonl").string();
            throw RetrievalBudgetError(msg.str());
        }

        write_jsonl(cfg.resolved_verdicts_path(), verdict_lines);
        write_jsonl(cfg.report_dir / "parsed.jsonl", parsed_lines);

        std::cout << "outputs: " << outputs.size() << "\n"
                  << "citations: " << total_citations << " (parse failures: " << parse_failures
                  << ", retrieval failures: " << failed_retrievals << ")\n"
                  << "labels: existing " << label_counts[static_cast<int>(Label::Existing)]
                  << ", unresolved " << label_counts[static_cast<int>(Label::Unresolved)]
                  << ", fabricated " << label_counts[static_cast<int>(Label::Fabricated)] << "\n"
                  << "verdicts: " << cfg.resolved_verdicts_path().string() << "\n";
        return kExitOk;
    });
}

int cmd_stats(const PipelineConfig& cfg) {
    return guard([&] {
        if (cfg.bootstrap_n < 1) throw InputError("bootstrap resample count must be >= 1");
        const auto rows = load_verdict_rows(cfg.resolved_verdicts_path());
        if (rows.empty()) throw InputError("no verdict rows to aggregate");
        const auto cells = group_cells(rows);

        std::filesystem::create_directories(cfg.report_dir);

        // Per-cell metrics with bootstrap CIs (single-claim cells get none).
        std::vector<CellMetrics> metrics;
        for (const auto& [key, clusters] : cells) {
            if (clusters.size() >= 2)
                metrics.push_back(cell_metrics_with_ci(key.model_id, key.condition, clusters,
                                                       cfg.bootstrap_n, cfg.seed, cfg.threads));
            else
                metrics.push_back(cell_metrics(key.model_id, key.condition, clusters));
        }

        std::ostringstream csv;
        csv << "model,condition,n_claims,existing,existing_ci_low,existing_ci_high,"
               "fabricated,fabricated_ci_low,fabricated_ci_high,"
               "unresolved,unresolved_ci_low,unresolved_ci_high,t_viol,avg_cit\n";
        json mirror = json::array();
        for (const auto& cm : metrics) {
            auto ci_cols = [&](const std::optional<Ci>& ci) {
                return ci ? fmt(ci->low) + "," + fmt(ci->high) : std::string(",");
            };
            csv << cm.model_id << ',' << condition_name(cm.condition) << ',' << cm.n_claims << ','
                << fmt(cm.existing) << ',' << ci_cols(cm.existing_ci) << ','
                << fmt(cm.fabricated) << ',' << ci_cols(cm.fabricated_ci) << ','
                << fmt(cm.unresolved) << ',' << ci_cols(cm.unresolved_ci) << ','
                << fmt(cm.temporal_violations) << ',' << fmt(cm.avg_citations) << '\n';
            mirror.push_back(cell_to_json(cm));
        }
        write_file_atomic(cfg.report_dir / "metrics.csv", csv.str());
        write_file_atomic(cfg.report_dir / "metrics.json", mirror.dump(2) + "\n");

        // Per-claim fraction spread per cell.
        std::ostringstream frac;
        frac << "model,condition,n_claims,median,q1,q3\n";
        for (const auto& [key, clusters] : cells) {
            std::vector<double> fractions;
            for (const auto& claim : clusters) fractions.push_back(per_claim_fraction(claim).f);
            const BoxStats box = box_stats(fractions);
            frac << key.model_id << ',' << condition_name(key.condition) << ',' << clusters.size()
                 << ',' << fmt(box.median) << ',' << fmt(box.q1) << ',' << fmt(box.q3) << '\n';
        }
        write_file_atomic(cfg.report_dir / "claim_fractions.csv", frac.str());

        // Difference CIs: per-model condition-vs-baseline, and pooled
        // proprietary-vs-open-weight per condition when groups are configured.
        std::ostringstream deltas;
        deltas << "comparison,delta,ci_low,ci_high,excludes_zero\n";
        auto emit_delta = [&](const std::string& name, std::span<const ClaimCounts> a,
                              std::span<const ClaimCounts> b) {
            const RateDifference d =
                rate_difference_ci(a, b, cfg.bootstrap_n, cfg.seed, cfg.paired, cfg.threads);
            deltas << name << ',' << fmt(d.delta) << ',' << fmt(d.ci.low) << ',' << fmt(d.ci.high)
                   << ',' << (d.excludes_zero ? "true" : "false") << '\n';
        };

        for (const std::string& model : distinct_models(rows)) {
            const auto base = cells.find(CellKey{model, Condition::Baseline});
            if (base == cells.end() || base->second.size() < 2) continue;
            for (Condition c : {Condition::Temporal, Condition::Survey, Condition::NonDisclosure,
                                Condition::Combo}) {
                const auto cell = cells.find(CellKey{model, c});
                if (cell == cells.end() || cell->second.size() < 2) continue;
                emit_delta(model + ":" + condition_name(c) + "-baseline", cell->second,
                           base->second);
            }
        }

        if (!cfg.proprietary_models.empty()) {
            std::vector<std::string> open_models;
            for (const auto& model : distinct_models(rows))
                if (std::find(cfg.proprietary_models.begin(), cfg.proprietary_models.end(),
                              model) == cfg.proprietary_models.end())
                    open_models.push_back(model);
            if (!open_models.empty()) {
                for (Condition c : all_condition_names()) {
                    const auto prop = pooled_clusters(rows, cfg.proprietary_models, c);
                    const auto open = pooled_clusters(rows, open_models, c);
                    if (prop.size() < 2 || open.size() < 2) continue;
                    emit_delta("proprietary-open:" + condition_name(c), prop, open);
                }
            }
        }
        write_file_atomic(cfg.report_dir / "deltas.csv", deltas.str());

        // Sensitivity reassignment of Unresolved mass, when an audit is given.
        if (!cfg.audit_path.empty()) {
            const auto audit_rows = load_audit_rows(cfg.audit_path);
            const ConfusionMatrix3 m = build_confusion(rows, audit_rows);
            const AuditRates rates = audit_rates_from_confusion(m);
            std::ostringstream sens;
            sens << "model,condition,existing_adj,fabricated_adj,unresolved_adj\n";
            for (const auto& cm : metrics) {
                const CellMetrics adj = sensitivity_reassign(cm, rates);
                sens << adj.model_id << ',' << condition_name(adj.condition) << ','
                     << fmt(adj.existing) << ',' << fmt(adj.fabricated) << ','
                     << fmt(adj.unresolved) << '\n';
            }
            write_file_atomic(cfg.report_dir / "sensitivity.csv", sens.str());
        }

        std::cout << "cells: " << metrics.size() << "\n"
                  << "metrics: " << (cfg.report_dir / "metrics.csv").string() << "\n";
        return kExitOk;
    });
}

int cmd_validate(const PipelineConfig& cfg) {
    return guard([&] {
        if (cfg.audit_path.empty()) throw InputError("validate requires --audit");
        const auto rows = load_verdict_rows(cfg.resolved_verdicts_path());
        const auto audit_rows = load_audit_rows(cfg.audit_path);
        if (audit_rows.empty()) throw InputError("audit file has no rows");

        const ConfusionMatrix3 m = build_confusion(rows, audit_rows);
        const KappaResult kappa = cohens_kappa(m);

        json report;
        report["n_audited"] = m.total();
        report["matrix"] = json::array();
        for (int i = 0; i < 3; ++i)
            report["matrix"].push_back(json{m.counts[i][0], m.counts[i][1], m.counts[i][2]});
        report["agreement"] = kappa.agreement;
        report["kappa"] = kappa.kappa;
        report["precision"] = {
            {"existing", kappa.precision[static_cast<int>(Label::Existing)]},
            {"unresolved", kappa.precision[static_cast<int>(Label::Unresolved)]},
            {"fabricated", kappa.precision[static_cast<int>(Label::Fabricated)]},
        };

        std::filesystem::create_directories(cfg.report_dir);
        write_file_atomic(cfg.report_dir / "validation.json", report.dump(2) + "\n");

        std::cout << "audited: " << m.total() << "\n"
                  << "agreement: " << fmt(kappa.agreement) << "\n"
                  << "kappa: " << fmt(kappa.kappa) << "\n"
                  << "precision existing/unresolved/fabricated: "
                  << fmt(kappa.precision[static_cast<int>(Label::Existing)]) << "/"
                  << fmt(kappa.precision[static_cast<int>(Label::Unresolved)]) << "/"
                  << fmt(kappa.precision[static_cast<int>(Label::Fabricated)]) << "\n";
        return kExitOk;
    });
}

int cmd_plotdata(const PipelineConfig& cfg) {
    return guard([&] {
        const auto rows = load_verdict_rows(cfg.resolved_verdicts_path());
        if (rows.empty()) throw InputError("no verdict rows to plot");
        const auto cells = group_cells(rows);

        std::filesystem::create_directories(cfg.report_dir);

        std::ostringstream stacked;
        stacked << "model,condition,existing,unresolved,fabricated\n";
        for (const auto& [key, clusters] : cells) {
            const Totals t = sum_counts(clusters);
            stacked << key.model_id << ',' << condition_name(key.condition) << ','
                    << fmt(existing_rate(t)) << ',' << fmt(unresolved_rate(t)) << ','
                    << fmt(fabricated_rate(t)) << '\n';
        }
        write_file_atomic(cfg.report_dir / "plot_stacked.csv", stacked.str());

        std::ostringstream boxes;
        boxes << "model,condition,median,q1,q3,whisker_low,whisker_high\n";
        for (const auto& [key, clusters] : cells) {
            std::vector<double> fractions;
            for (const auto& claim : clusters) fractions.push_back(per_claim_fraction(claim).f);
            const BoxStats box = box_stats(fractions);
            boxes << key.model_id << ',' << condition_name(key.condition) << ','
                  << fmt(box.median) << ',' << fmt(box.q1) << ',' << fmt(box.q3) << ','
                  << fmt(box.whisker_low) << ',' << fmt(box.whisker_high) << '\n';
        }
        write_file_atomic(cfg.report_dir / "plot_fractions.csv", boxes.str());

        // Existence rate per claim domain; needs the claims file for the map.
        if (!cfg.claims_path.empty()) {
            const ClaimSet claims = load_claims(cfg.claims_path);
            const auto by_domain = group_rates(rows, [&](const VerdictRow& row) {
                return domain_name(claims.at(row.claim_id).domain);
            });
            std::ostringstream domains;
            domains << "domain,existing,citations\n";
            for (const auto& g : by_domain)
                domains << g.key << ',' << fmt(g.existing) << ',' << g.citations << '\n';
            write_file_atomic(cfg.report_dir / "plot_domain.csv", domains.str());
        } else {
            std::cerr << "no claims file given; skipping the per-domain breakdown\n";
        }

        std::cout << "plot data written to " << cfg.report_dir.string() << "\n";
        return kExitOk;
    });
}

} // namespace citeverify
