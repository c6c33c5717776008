#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "citeverify/jsonl.hpp"
#include "citeverify/pipeline.hpp"

namespace fs = std::filesystem;
using namespace citeverify;

namespace {

fs::path fixture_dir() { return fs::path(CITEVERIFY_FIXTURE_DIR); }

fs::path fresh_dir(const std::string& tag) {
    const fs::path dir =
        fs::temp_directory_path() / ("citeverify_pl_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            out.push_back(field);
            field.clear();
        } else {
            field += c;
        }
    }
    out.push_back(field);
    return out;
}

PipelineConfig fixture_cfg(const fs::path& report_dir) {
    PipelineConfig cfg;
    cfg.claims_path = fixture_dir() / "claims.jsonl";
    cfg.outputs_path = fixture_dir() / "outputs.jsonl";
    cfg.fixture_dir = fixture_dir() / "index";
    cfg.backend = "fixture";
    cfg.report_dir = report_dir;
    return cfg;
}

std::string row_key(const json& row) {
    return row.at("claim_id").get<std::string>() + "|" + row.at("model_id").get<std::string>() +
           "|" + row.at("condition").get<std::string>() + "|" +
           std::to_string(row.at("citation_index").get<int>());
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CITEVERIFY_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    return WEXITSTATUS(rc);
}

} // namespace

TEST_CASE("verify labels the fixture corpus exactly as recorded") {
    const fs::path dir = fresh_dir("verify");
    REQUIRE(cmd_verify(fixture_cfg(dir)) == kExitOk);

    const auto produced = read_jsonl(dir / "verdicts.jsonl");
    const auto expected = read_jsonl(fixture_dir() / "expected_verdicts.jsonl");
    REQUIRE(produced.size() == 108);
    REQUIRE(expected.size() == produced.size());

    std::map<std::string, json> by_key;
    for (const auto& row : expected) by_key[row_key(row)] = row;
    REQUIRE(by_key.size() == expected.size());

    std::map<std::string, int> label_tally;
    for (const auto& row : produced) {
        const auto it = by_key.find(row_key(row));
        REQUIRE_MESSAGE(it != by_key.end(), row.dump());
        const json& want = it->second;
        INFO(row.dump());

        CHECK(row.at("label") == want.at("label"));
        CHECK(row.at("temporal_violation") == want.at("temporal_violation"));
        CHECK(row.at("doi_present") == want.at("doi_present"));
        CHECK(!row.contains("retrieval_failed"));
        label_tally[row.at("label").get<std::string>()] += 1;

        const json& got_best = row.at("best_score");
        const json& want_best = want.at("best_score");
        REQUIRE(got_best.is_null() == want_best.is_null());
        if (!want_best.is_null()) {
            CHECK(got_best.at("matched_title") == want_best.at("matched_title"));
            CHECK(got_best.at("matched_doi") == want_best.at("matched_doi"));
            CHECK(got_best.at("matched_source") == want_best.at("matched_source"));
            for (const char* part : {"s", "t", "a", "y", "v"})
                CHECK(std::abs(got_best.at(part).get<double>() -
                               want_best.at(part).get<double>()) <= 1e-9);
        }
    }
    CHECK(label_tally["existing"] == 26);
    CHECK(label_tally["unresolved"] == 54);
    CHECK(label_tally["fabricated"] == 28);

    CHECK(read_jsonl(dir / "parsed.jsonl").size() == 108);
    CHECK(!fs::exists(dir / "retrieval_errors.jsonl"));

    // a second run reproduces the artifact byte for byte
    const fs::path again = fresh_dir("verify_again");
    REQUIRE(cmd_verify(fixture_cfg(again)) == kExitOk);
    CHECK(read_file(dir / "verdicts.jsonl") == read_file(again / "verdicts.jsonl"));
}

TEST_CASE("render-prompts writes one file per applicable pair") {
    const fs::path dir = fresh_dir("prompts");
    PipelineConfig cfg = fixture_cfg(dir);
    REQUIRE(cmd_render_prompts(cfg) == kExitOk);

    const char* conditions[] = {"baseline", "temporal", "survey", "nondisclosure", "combo"};
    for (const char* claim : {"c01", "c02"})
        for (const char* cond : conditions)
            CHECK(fs::exists(dir / "prompts" / (std::string(claim) + "__" + cond + ".txt")));

    const std::string temporal = read_file(dir / "prompts" / "c01__temporal.txt");
    CHECK(temporal.find("between 2019 and 2023, inclusive") != std::string::npos);
    CHECK(temporal.find("exactly 5") != std::string::npos);
    CHECK(temporal.find("retrieval, grounding") != std::string::npos);
    CHECK(temporal.find('{') == std::string::npos);
    const std::string survey = read_file(dir / "prompts" / "c02__survey.txt");
    CHECK(survey.find("exactly 8") != std::string::npos);
    CHECK(survey.find("reef corals") != std::string::npos);

    // claims without a year window skip the window-dependent conditions
    const fs::path dir2 = fresh_dir("prompts_nowin");
    const fs::path claims = dir2 / "claims.jsonl";
    write_file_atomic(claims,
                      R"({"claim_id":"w01","domain":"se_cs","text":"a claim without a window"})"
                      "\n");
    PipelineConfig cfg2;
    cfg2.claims_path = claims;
    cfg2.report_dir = dir2;
    REQUIRE(cmd_render_prompts(cfg2) == kExitOk);
    CHECK(fs::exists(dir2 / "prompts" / "w01__baseline.txt"));
    CHECK(fs::exists(dir2 / "prompts" / "w01__survey.txt"));
    CHECK(fs::exists(dir2 / "prompts" / "w01__nondisclosure.txt"));
    CHECK(!fs::exists(dir2 / "prompts" / "w01__temporal.txt"));
    CHECK(!fs::exists(dir2 / "prompts" / "w01__combo.txt"));
}

TEST_CASE("stats aggregates verdicts into metrics, spreads, and contrasts") {
    const fs::path dir = fresh_dir("stats");
    PipelineConfig cfg = fixture_cfg(dir);
    REQUIRE(cmd_verify(cfg) == kExitOk);
    cfg.bootstrap_n = 200;
    cfg.seed = 7;
    cfg.threads = 2;
    REQUIRE(cmd_stats(cfg) == kExitOk);

    const auto metric_lines = split_lines(read_file(dir / "metrics.csv"));
    REQUIRE(metric_lines.size() == 11); // header + 2 models x 5 conditions
    CHECK(metric_lines[0] ==
          "model,condition,n_claims,existing,existing_ci_low,existing_ci_high,"
          "fabricated,fabricated_ci_low,fabricated_ci_high,"
          "unresolved,unresolved_ci_low,unresolved_ci_high,t_viol,avg_cit");
    for (std::size_t i = 1; i < metric_lines.size(); ++i) {
        const auto cols = split_csv(metric_lines[i]);
        REQUIRE(cols.size() == 14);
        CHECK(cols[2] == "2");
        const double existing = std::stod(cols[3]);
        const double fabricated = std::stod(cols[6]);
        const double unresolved = std::stod(cols[9]);
        CHECK(std::abs(existing + fabricated + unresolved - 1.0) <= 2e-6); // printed at 1e-6
        for (int ci_col : {4, 5, 7, 8, 10, 11}) CHECK(!cols[ci_col].empty());
        CHECK(std::stod(cols[4]) <= std::stod(cols[5]));
    }

    const json mirror = json::parse(read_file(dir / "metrics.json"));
    REQUIRE(mirror.is_array());
    REQUIRE(mirror.size() == 10);
    for (const auto& cell : mirror) {
        const double sum = cell.at("existing").get<double>() +
                           cell.at("fabricated").get<double>() +
                           cell.at("unresolved").get<double>();
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        CHECK(cell.at("existing_ci").is_array());
        CHECK(cell.at("avg_cit").get<double>() > 0.0);
    }

    const auto frac_lines = split_lines(read_file(dir / "claim_fractions.csv"));
    REQUIRE(frac_lines.size() == 11);
    CHECK(frac_lines[0] == "model,condition,n_claims,median,q1,q3");
    for (std::size_t i = 1; i < frac_lines.size(); ++i) {
        const auto cols = split_csv(frac_lines[i]);
        REQUIRE(cols.size() == 6);
        const double median = std::stod(cols[3]);
        const double q1 = std::stod(cols[4]);
        const double q3 = std::stod(cols[5]);
        CHECK(q1 <= median);
        CHECK(median <= q3);
        CHECK(q1 >= 0.0);
        CHECK(q3 <= 1.0);
    }

    // per-model condition-vs-baseline contrasts only, absent a group split
    const auto delta_lines = split_lines(read_file(dir / "deltas.csv"));
    REQUIRE(delta_lines.size() == 9);
    CHECK(delta_lines[0] == "comparison,delta,ci_low,ci_high,excludes_zero");
    std::set<std::string> names;
    for (std::size_t i = 1; i < delta_lines.size(); ++i) {
        const auto cols = split_csv(delta_lines[i]);
        REQUIRE(cols.size() == 5);
        names.insert(cols[0]);
        CHECK(std::stod(cols[2]) <= std::stod(cols[3]));
        CHECK((cols[4] == "true" || cols[4] == "false"));
    }
    for (const char* model : {"model-x", "model-y"})
        for (const char* cond : {"temporal", "survey", "nondisclosure", "combo"})
            CHECK(names.count(std::string(model) + ":" + cond + "-baseline") == 1);

    CHECK(!fs::exists(dir / "sensitivity.csv")); // no audit given

    // pooled group contrast rows appear once a proprietary set is named
    cfg.proprietary_models = {"model-x"};
    REQUIRE(cmd_stats(cfg) == kExitOk);
    const auto with_groups = split_lines(read_file(dir / "deltas.csv"));
    REQUIRE(with_groups.size() == 14);
    std::set<std::string> group_names;
    for (std::size_t i = 1; i < with_groups.size(); ++i)
        group_names.insert(split_csv(with_groups[i])[0]);
    for (const char* cond : {"baseline", "temporal", "survey", "nondisclosure", "combo"})
        CHECK(group_names.count(std::string("proprietary-open:") + cond) == 1);

    // stats is deterministic for a fixed seed and thread count choice
    const fs::path dir2 = fresh_dir("stats_again");
    PipelineConfig cfg2 = fixture_cfg(dir2);
    REQUIRE(cmd_verify(cfg2) == kExitOk);
    cfg2.bootstrap_n = 200;
    cfg2.seed = 7;
    cfg2.threads = 1; // partitioning must not matter
    REQUIRE(cmd_stats(cfg2) == kExitOk);
    CHECK(read_file(dir / "metrics.csv") == read_file(dir2 / "metrics.csv"));
}

TEST_CASE("stats with an audit writes the reassigned table") {
    const fs::path dir = fresh_dir("sens");
    PipelineConfig cfg = fixture_cfg(dir);
    REQUIRE(cmd_verify(cfg) == kExitOk);

    // audit ten pipeline-Unresolved citations: 2 really exist, 3 are fabricated
    const auto rows = read_jsonl(dir / "verdicts.jsonl");
    std::vector<json> audit;
    for (const auto& row : rows) {
        if (row.at("label") != "unresolved") continue;
        const std::size_t n = audit.size();
        if (n >= 10) break;
        std::string human = "unresolved";
        if (n < 2) human = "existing";
        else if (n < 5) human = "fabricated";
        audit.push_back(json{{"claim_id", row.at("claim_id")},
                             {"model_id", row.at("model_id")},
                             {"condition", row.at("condition")},
                             {"citation_index", row.at("citation_index")},
                             {"human_label", human},
                             {"pipeline_label", "unresolved"}});
    }
    REQUIRE(audit.size() == 10);
    write_jsonl(dir / "audit.jsonl", audit);

    cfg.audit_path = dir / "audit.jsonl";
    cfg.bootstrap_n = 50;
    REQUIRE(cmd_stats(cfg) == kExitOk);

    const auto sens_lines = split_lines(read_file(dir / "sensitivity.csv"));
    REQUIRE(sens_lines.size() == 11);
    CHECK(sens_lines[0] == "model,condition,existing_adj,fabricated_adj,unresolved_adj");

    const json mirror = json::parse(read_file(dir / "metrics.json"));
    std::map<std::string, const json*> cells;
    for (const auto& cell : mirror)
        cells[cell.at("model").get<std::string>() + "|" +
              cell.at("condition").get<std::string>()] = &cell;
    for (std::size_t i = 1; i < sens_lines.size(); ++i) {
        const auto cols = split_csv(sens_lines[i]);
        REQUIRE(cols.size() == 5);
        const json& cell = *cells.at(cols[0] + "|" + cols[1]);
        const double u = cell.at("unresolved").get<double>();
        CHECK(std::abs(std::stod(cols[2]) -
                       (cell.at("existing").get<double>() + u * 0.2)) <= 1e-5);
        CHECK(std::abs(std::stod(cols[3]) -
                       (cell.at("fabricated").get<double>() + u * 0.3)) <= 1e-5);
        CHECK(std::abs(std::stod(cols[4]) - u * 0.5) <= 1e-5);
    }
}

TEST_CASE("validate scores an audit sample against the verdicts") {
    const fs::path dir = fresh_dir("validate");
    PipelineConfig cfg = fixture_cfg(dir);
    REQUIRE(cmd_verify(cfg) == kExitOk);

    const auto rows = read_jsonl(dir / "verdicts.jsonl");
    std::vector<json> audit;
    for (std::size_t i = 0; i < 20; ++i)
        audit.push_back(json{{"claim_id", rows[i].at("claim_id")},
                             {"model_id", rows[i].at("model_id")},
                             {"condition", rows[i].at("condition")},
                             {"citation_index", rows[i].at("citation_index")},
                             {"human_label", rows[i].at("label")},
                             {"pipeline_label", rows[i].at("label")}});
    write_jsonl(dir / "audit.jsonl", audit);
    cfg.audit_path = dir / "audit.jsonl";
    REQUIRE(cmd_validate(cfg) == kExitOk);

    const json report = json::parse(read_file(dir / "validation.json"));
    CHECK(report.at("n_audited") == 20);
    CHECK(report.at("agreement").get<double>() == 1.0);
    CHECK(report.at("kappa").get<double>() == 1.0);
    REQUIRE(report.at("matrix").is_array());
    long total = 0;
    for (const auto& row : report.at("matrix"))
        for (const auto& v : row) total += v.get<long>();
    CHECK(total == 20);
    CHECK(report.at("precision").at("existing").get<double>() == 1.0);
    CHECK(report.at("precision").at("fabricated").get<double>() == 1.0);

    // disagreements land off the diagonal and drag kappa below one
    std::vector<json> noisy = audit;
    int flipped = 0;
    for (auto& row : noisy) {
        if (row.at("human_label") == "unresolved" && flipped < 2) {
            row["human_label"] = "fabricated";
            ++flipped;
        }
    }
    REQUIRE(flipped == 2);
    write_jsonl(dir / "audit_noisy.jsonl", noisy);
    cfg.audit_path = dir / "audit_noisy.jsonl";
    REQUIRE(cmd_validate(cfg) == kExitOk);
    const json noisy_report = json::parse(read_file(dir / "validation.json"));
    CHECK(noisy_report.at("agreement").get<double>() == doctest::Approx(18.0 / 20.0));
    CHECK(noisy_report.at("kappa").get<double>() < 1.0);

    // failure modes: no audit, unresolvable rows, contradicting pipeline label
    cfg.audit_path.clear();
    CHECK(cmd_validate(cfg) == kExitInput);

    write_file_atomic(dir / "audit_empty.jsonl", "");
    cfg.audit_path = dir / "audit_empty.jsonl";
    CHECK(cmd_validate(cfg) == kExitInput);

    std::vector<json> bogus = {json{{"claim_id", "zz"}, {"model_id", "model-x"},
                                    {"condition", "baseline"}, {"citation_index", 1},
                                    {"human_label", "existing"}}};
    write_jsonl(dir / "audit_bogus.jsonl", bogus);
    cfg.audit_path = dir / "audit_bogus.jsonl";
    CHECK(cmd_validate(cfg) == kExitInput);

    std::vector<json> contradicting = {audit[0]};
    contradicting[0]["pipeline_label"] =
        contradicting[0]["pipeline_label"] == "existing" ? "fabricated" : "existing";
    write_jsonl(dir / "audit_contra.jsonl", contradicting);
    cfg.audit_path = dir / "audit_contra.jsonl";
    CHECK(cmd_validate(cfg) == kExitInput);
}

TEST_CASE("plot-data emits the per-figure tables") {
    const fs::path dir = fresh_dir("plots");
    PipelineConfig cfg = fixture_cfg(dir);
    REQUIRE(cmd_verify(cfg) == kExitOk);
    REQUIRE(cmd_plotdata(cfg) == kExitOk);

    const auto stacked = split_lines(read_file(dir / "plot_stacked.csv"));
    REQUIRE(stacked.size() == 11);
    CHECK(stacked[0] == "model,condition,existing,unresolved,fabricated");
    for (std::size_t i = 1; i < stacked.size(); ++i) {
        const auto cols = split_csv(stacked[i]);
        REQUIRE(cols.size() == 5);
        const double sum = std::stod(cols[2]) + std::stod(cols[3]) + std::stod(cols[4]);
        CHECK(std::abs(sum - 1.0) <= 2e-6);
    }

    const auto boxes = split_lines(read_file(dir / "plot_fractions.csv"));
    REQUIRE(boxes.size() == 11);
    CHECK(boxes[0] == "model,condition,median,q1,q3,whisker_low,whisker_high");
    for (std::size_t i = 1; i < boxes.size(); ++i) {
        const auto cols = split_csv(boxes[i]);
        REQUIRE(cols.size() == 7);
        CHECK(std::stod(cols[5]) <= std::stod(cols[3]));
        CHECK(std::stod(cols[3]) <= std::stod(cols[2]));
        CHECK(std::stod(cols[2]) <= std::stod(cols[4]));
        CHECK(std::stod(cols[4]) <= std::stod(cols[6]));
    }

    const auto domains = split_lines(read_file(dir / "plot_domain.csv"));
    REQUIRE(domains.size() == 3);
    CHECK(domains[0] == "domain,existing,citations");
    CHECK(split_csv(domains[1])[0] == "natural_sciences");
    CHECK(split_csv(domains[2])[0] == "se_cs");
    CHECK(std::stol(split_csv(domains[1])[2]) + std::stol(split_csv(domains[2])[2]) == 108);

    // the domain table needs the claims file; the rest do not
    const fs::path dir2 = fresh_dir("plots_noclaims");
    PipelineConfig cfg2 = fixture_cfg(dir2);
    REQUIRE(cmd_verify(cfg2) == kExitOk);
    cfg2.claims_path.clear();
    REQUIRE(cmd_plotdata(cfg2) == kExitOk);
    CHECK(fs::exists(dir2 / "plot_stacked.csv"));
    CHECK(!fs::exists(dir2 / "plot_domain.csv"));
}

TEST_CASE("hard retrieval failures are marked and budgeted") {
    // the live backend cannot resolve any host in this environment, which is
    // exactly what this test wants: every lookup fails fast
    const fs::path dir = fresh_dir("budget");
    const fs::path outputs = dir / "outputs.jsonl";
    write_jsonl(outputs,
                {json{{"claim_id", "c01"},
                      {"model_id", "probe"},
                      {"condition", "baseline"},
                      {"output_text", "Intro.\n\nReferences:\n[1] Doe, J. (2020). A Thoroughly "
                                      "Unfindable Manuscript. Journal of Nowhere.\n"}}});

    PipelineConfig cfg;
    cfg.claims_path = fixture_dir() / "claims.jsonl";
    cfg.outputs_path = outputs;
    cfg.backend = "live";
    cfg.report_dir = dir / "report";
    cfg.retrieval.max_attempts = 1;
    cfg.retrieval.rate_limit_per_sec = 1e6;

    // 1/1 citations failing blows the default 10% budget
    CHECK(cmd_verify(cfg) == kExitRetrievalBudget);
    const auto errors = read_jsonl(cfg.report_dir / "retrieval_errors.jsonl");
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].at("claim_id") == "c01");
    CHECK(errors[0].at("citation_index") == 1);
    CHECK(!errors[0].at("error").get<std::string>().empty());
    CHECK(!fs::exists(cfg.report_dir / "verdicts.jsonl")); // aborted before writing

    // with the budget opened up, the row survives as marked Unresolved
    cfg.failure_budget = 1.0;
    cfg.report_dir = dir / "report_tolerant";
    REQUIRE(cmd_verify(cfg) == kExitOk);
    const auto rows = read_jsonl(cfg.report_dir / "verdicts.jsonl");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].at("label") == "unresolved");
    CHECK(rows[0].at("retrieval_failed") == true);
    CHECK(rows[0].at("best_score").is_null());
    CHECK(rows[0].at("doi_present") == false);
    CHECK(rows[0].at("temporal_violation") == false);

    // single-claim cells still aggregate, just without intervals
    PipelineConfig stats_cfg = cfg;
    stats_cfg.bootstrap_n = 50;
    REQUIRE(cmd_stats(stats_cfg) == kExitOk);
    const auto metric_lines = split_lines(read_file(cfg.report_dir / "metrics.csv"));
    REQUIRE(metric_lines.size() == 2);
    const auto cols = split_csv(metric_lines[1]);
    CHECK(cols[0] == "probe");
    CHECK(cols[2] == "1");
    CHECK(cols[4].empty()); // no CI from one claim
    CHECK(cols[5].empty());
}

TEST_CASE("input problems exit with the input-error code") {
    const fs::path dir = fresh_dir("inputs");

    PipelineConfig missing = fixture_cfg(dir / "a");
    missing.outputs_path = dir / "does_not_exist.jsonl";
    CHECK(cmd_verify(missing) == kExitInput);

    const fs::path garbled = dir / "garbled.jsonl";
    write_file_atomic(garbled, "this is not json\n");
    PipelineConfig bad_json = fixture_cfg(dir / "b");
    bad_json.outputs_path = garbled;
    CHECK(cmd_verify(bad_json) == kExitInput);

    const fs::path odd = dir / "odd_condition.jsonl";
    write_jsonl(odd, {json{{"claim_id", "c01"},
                           {"model_id", "m"},
                           {"condition", "weird"},
                           {"output_text", "References:\n[1] X (2020). Y.\n"}}});
    PipelineConfig bad_cond = fixture_cfg(dir / "c");
    bad_cond.outputs_path = odd;
    CHECK(cmd_verify(bad_cond) == kExitInput);

    PipelineConfig bad_backend = fixture_cfg(dir / "d");
    bad_backend.backend = "imaginary";
    CHECK(cmd_verify(bad_backend) == kExitInput);

    PipelineConfig no_fixture = fixture_cfg(dir / "e");
    no_fixture.fixture_dir.clear();
    CHECK(cmd_verify(no_fixture) == kExitInput);

    PipelineConfig no_verdicts = fixture_cfg(dir / "f");
    CHECK(cmd_stats(no_verdicts) == kExitInput);
    CHECK(cmd_plotdata(no_verdicts) == kExitInput);

    PipelineConfig zero_b = fixture_cfg(dir / "g");
    zero_b.bootstrap_n = 0;
    CHECK(cmd_stats(zero_b) == kExitInput);
}

TEST_CASE("the command line front end maps failures to exit codes") {
    CHECK(run_cli("") == kExitUsage);
    CHECK(run_cli("--definitely-not-a-flag") == kExitUsage);
    CHECK(run_cli("verify --no-such-option x") == kExitUsage);
    CHECK(run_cli("frobnicate") == kExitUsage);
    CHECK(run_cli("verify --claims /nonexistent/claims.jsonl --outputs /nonexistent/out.jsonl "
                  "--backend fixture --fixture-dir /nonexistent") == kExitInput);

    const fs::path dir = fresh_dir("cli");
    const std::string fix = fixture_dir().string();
    const int rc = run_cli("verify --claims " + fix + "/claims.jsonl --outputs " + fix +
                           "/outputs.jsonl --backend fixture --fixture-dir " + fix +
                           "/index --report-dir " + dir.string());
    CHECK(rc == kExitOk);
    CHECK(read_jsonl(dir / "verdicts.jsonl").size() == 108);

    const int stats_rc = run_cli("stats --report-dir " + dir.string() +
                                 " --bootstrap-n 50 --seed 9 --proprietary model-x");
    CHECK(stats_rc == kExitOk);
    CHECK(fs::exists(dir / "metrics.csv"));
    CHECK(fs::exists(dir / "deltas.csv"));

    const int plot_rc = run_cli("plot-data --report-dir " + dir.string() + " --claims " + fix +
                                "/claims.jsonl");
    CHECK(plot_rc == kExitOk);
    CHECK(fs::exists(dir / "plot_domain.csv"));
}
