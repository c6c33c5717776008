#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "citeverify/pipeline.hpp"

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value ? std::string(value) : fallback;
}

} // namespace

int main(int argc, char** argv) {
    using namespace citeverify;

    CLI::App app{"citeverify - verify model-generated bibliographic citations against "
                 "scholarly indexes and aggregate the results"};
    app.require_subcommand(1);

    PipelineConfig cfg;
    cfg.retrieval.contact = env_or("CROSSREF_MAILTO", "");
    cfg.retrieval.s2_api_key = env_or("S2_API_KEY", "");
    cfg.retrieval.cache_dir = env_or("CITEVERIFY_CACHE", "");

    std::string claims, outputs, verdicts, audit, report_dir = "report";
    std::string cache_dir, templates_dir, fixture_dir;
    std::vector<std::string> proprietary;
    bool unpaired = false;

    // Shared options; CLI11 option groups per subcommand would be noisier
    // than the pipeline config actually warrants.
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--claims", claims, "claims JSONL file");
        sub->add_option("--outputs", outputs, "model outputs JSONL file");
        sub->add_option("--verdicts", verdicts, "verdicts JSONL file (default <report-dir>/verdicts.jsonl)");
        sub->add_option("--audit", audit, "audit labels JSONL file");
        sub->add_option("--report-dir", report_dir, "directory for generated artifacts")
            ->capture_default_str();
        sub->add_option("--cache-dir", cache_dir, "response cache directory (env CITEVERIFY_CACHE)");
        sub->add_option("--backend", cfg.backend, "index backend")
            ->check(CLI::IsMember({"live", "fixture"}))
            ->capture_default_str();
        sub->add_option("--fixture-dir", fixture_dir, "fixture index directory (records.json)");
        sub->add_option("--templates", templates_dir, "prompt template directory");
        sub->add_option("--seed", cfg.seed, "bootstrap RNG seed")->capture_default_str();
        sub->add_option("--bootstrap-n", cfg.bootstrap_n, "bootstrap resample count")
            ->capture_default_str();
        sub->add_option("--threads", cfg.threads, "worker threads for the bootstrap")
            ->capture_default_str();
        sub->add_option("--k", cfg.retrieval.k, "max candidates per title search")
            ->capture_default_str();
        sub->add_option("--rate-limit", cfg.retrieval.rate_limit_per_sec,
                        "outbound requests/second per service")
            ->capture_default_str();
        sub->add_option("--failure-budget", cfg.failure_budget,
                        "abort when this fraction of citations hits hard retrieval errors")
            ->capture_default_str();
        sub->add_option("--proprietary", proprietary,
                        "model ids forming the proprietary group for contrasts");
        sub->add_flag("--unpaired", unpaired, "resample contrast groups independently");
    };

    auto* render = app.add_subcommand("render-prompts", "render per-claim condition prompts");
    auto* verify = app.add_subcommand("verify", "parse outputs, retrieve candidates, label citations");
    auto* stats = app.add_subcommand("stats", "aggregate verdicts into metrics, CIs, and contrasts");
    auto* validate = app.add_subcommand("validate", "compare pipeline labels against a human audit");
    auto* plotdata = app.add_subcommand("plot-data", "emit per-figure data files");
    for (CLI::App* sub : {render, verify, stats, validate, plotdata}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e); // prints the message
        return kExitUsage;
    }

    cfg.claims_path = claims;
    cfg.outputs_path = outputs;
    cfg.verdicts_path = verdicts;
    cfg.audit_path = audit;
    cfg.report_dir = report_dir;
    cfg.templates_dir = templates_dir;
    cfg.fixture_dir = fixture_dir;
    if (!cache_dir.empty()) cfg.retrieval.cache_dir = cache_dir;
    cfg.proprietary_models = proprietary;
    cfg.paired = !unpaired;

    if (render->parsed()) return cmd_render_prompts(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (stats->parsed()) return cmd_stats(cfg);
    if (validate->parsed()) return cmd_validate(cfg);
    if (plotdata->parsed()) return cmd_plotdata(cfg);
    return kExitUsage;
}
