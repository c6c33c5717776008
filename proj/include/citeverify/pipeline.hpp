#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "citeverify/index.hpp"
#include "citeverify/label.hpp"

namespace citeverify {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRetrievalBudget = 3;

class RetrievalBudgetError : public std::runtime_error {
public:
    explicit RetrievalBudgetError(const std::string& what) : std::runtime_error(what) {}
};

struct PipelineConfig {
    std::filesystem::path claims_path;
    std::filesystem::path outputs_path;
    std::filesystem::path verdicts_path; // defaults to <report_dir>/verdicts.jsonl
    std::filesystem::path audit_path;
    std::filesystem::path report_dir = "report";
    std::filesystem::path templates_dir;
    std::filesystem::path fixture_dir;
    std::string backend = "fixture"; // fixture | live
    RetrievalConfig retrieval;
    LabelerConfig labeler;
    int bootstrap_n = 1000;
    std::uint64_t seed = 42;
    int threads = 1;
    std::vector<std::string> proprietary_models; // enables group contrasts when set
    bool paired = true;                          // cluster resampling mode for contrasts
    double failure_budget = 0.10; // abort when more citations than this hit hard retrieval errors

    std::filesystem::path resolved_verdicts_path() const;
};

// Pipeline stages, each mapped to a subcommand. All return an exit code and
// report problems on stderr.
int cmd_render_prompts(const PipelineConfig& cfg);
int cmd_verify(const PipelineConfig& cfg);
int cmd_stats(const PipelineConfig& cfg);
int cmd_validate(const PipelineConfig& cfg);
int cmd_plotdata(const PipelineConfig& cfg);

} // namespace citeverify
