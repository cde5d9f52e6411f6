#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "fairtree/fairhc.hpp"
#include "fairtree/fairness.hpp"
#include "fairtree/graph.hpp"
#include "fairtree/ops.hpp"
#include "fairtree/rational.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

/// Where the colored points come from.
struct InputSpec {
    // Synthetic data (used when csv_path is empty).
    std::size_t n = 256;
    std::vector<double> proportions{0.25, 0.75};
    SyntheticOptions synthetic;

    // Delimited text with a header row.
    std::string csv_path;
    std::string color_column;
    std::string id_column;
    char delimiter = ',';
    std::size_t sample_size = 0;  // 0 keeps every row; otherwise a stratified sample

    bool normalize = false;  // min-max scale features before distances
};

struct LoadedInput {
    PointDataset points;
    WeightedGraph graph;
    ColorAssignment colors;
};

/// Loads or generates points (sampling with `seed`) and builds the similarity graph.
LoadedInput load_input(const InputSpec& spec, std::uint64_t seed);

/// Stratified sample of m rows keeping the color balance (largest remainder).
std::vector<std::size_t> stratified_sample(const PointDataset& data, std::size_t m, std::uint64_t seed);

struct StageConfig {
    enum class Kind { rebalance, refine, stochastic, fairhc };
    Kind kind = Kind::rebalance;

    Fraction eps{1, 8};  // refine, stochastic

    // stochastic
    double alpha = 0.2;
    double beta = 0.8;
    double delta_ch = 0.5;
    ThresholdMode mode = ThresholdMode::depth;
    std::vector<double> probs;  // per-color p; empty: the data's proportions

    // fairhc
    FairHCConfig fairhc;
    std::optional<double> delta_exp;  // when set, h is derived from n

    // stochastic and fairhc: rebalance/refine first when the input does not
    // pass the balance audit the stage requires.
    bool prepare = true;
};

std::string_view to_string(StageConfig::Kind k);

struct ExperimentConfig {
    InputSpec input;
    std::vector<StageConfig> stages;
    std::size_t replications = 10;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// JSON configuration (see README for the schema). Throws std::invalid_argument.
ExperimentConfig parse_experiment_config(std::istream& in);

inline constexpr std::size_t kHistogramBuckets = 10;
using Histogram = std::array<std::size_t, kHistogramBuckets>;

/// Color-0 fraction of every non-singleton cluster, bucketed by tenths; a
/// fraction of exactly 1 goes to the last bucket.
Histogram balance_histogram(const HierarchyTree& t, const ColorAssignment& col);

/// Non-singleton clusters made of a single color.
std::size_t monochromatic_clusters(const HierarchyTree& t, const ColorAssignment& col);

enum class AuditState { not_run, passed, failed };
std::string_view to_string(AuditState s);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ReplicationResult {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    std::size_t n = 0;
    bool aborted = false;
    std::string reason;

    double ratio_cost = 1.0;
    double ceiling = 1.0;
    AuditState balance = AuditState::not_run;
    AuditState fairness = AuditState::not_run;
    Histogram baseline_hist{};
    Histogram output_hist{};
    std::size_t baseline_monochromatic = 0;
    std::size_t output_monochromatic = 0;
    std::vector<StageTiming> timings;
    std::string ledger_text;
    std::string notes;  // derived parameters worth recording (thresholds, rounded h)
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<ReplicationResult> replications;

    /// No aborted replication, every audit that ran passed, and every ratio
    /// within its certified ceiling.
    bool all_passed() const;
};

ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Writes report, ratios.csv, balance_hist.csv and ledger.txt (byte-stable)
/// plus timing.csv (wall-clock, not reproducible).
void emit_reports(const ExperimentReport& rep, const std::filesystem::path& dir);

/// Outcome of running the configured stages on one tree.
struct PipelineRun {
    HierarchyTree tree;
    OperationLedger ledger;
    ColorAssignment colors;  // replaced by sampled colors after a stochastic stage
    AuditState balance = AuditState::not_run;
    AuditState fairness = AuditState::not_run;
    std::vector<StageTiming> timings;
    std::string notes;
};

/// Applies the stages in order; throws on any stage precondition failure.
PipelineRun run_pipeline(const HierarchyTree& baseline, const ColorAssignment& colors,
                         const std::vector<StageConfig>& stages, std::uint64_t seed);

/// Rebalances and refines until the tree passes the ε audit (no-op when it
/// already does). Requires a binary tree when work is needed.
HierarchyTree prepare_balance(const HierarchyTree& t, Fraction eps, OperationLedger& ledger);

}  // namespace fairtree
