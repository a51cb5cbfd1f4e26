#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vinetrunc/vine.hpp"

namespace vinetrunc {

enum class Study { ThreeD, FourD_G1_vs_G2, FourD_G2_vs_F };

std::string_view to_string(Study study) noexcept;
Study study_from_string(std::string_view name);

inline constexpr std::uint64_t kDefaultMasterSeed = 20240521;

/// Kendall's tau grid 0.04, 0.08, ..., 0.28.
std::vector<double> tau_grid();

struct ScenarioConfig {
    Study study = Study::ThreeD;
    std::vector<double> taus;  ///< one per tree of the true model
    int n = 500;
    int reps = 300;
    double alpha = 0.05;
    std::uint64_t master_seed = kDefaultMasterSeed;
};

/// Throws DomainError or BadDimension for an invalid configuration.
void check_config(const ScenarioConfig& config);

int study_dimension(Study study) noexcept;
/// Truncation levels of the smaller and larger candidate.
std::pair<int, int> study_levels(Study study) noexcept;

/// D-vine with Gaussian pair copulas, rho = sin(pi tau / 2) per tree.
VineModel true_model(const ScenarioConfig& config);

/// 49 (tau_T1, tau_T2) patterns per sample size.
std::vector<ScenarioConfig> grid_3d(std::span<const int> sizes, int reps = 300, double alpha = 0.05,
                                    std::uint64_t master_seed = kDefaultMasterSeed);
/// 343 (tau_T1, tau_T2, tau_T3) patterns per sample size for one comparison.
std::vector<ScenarioConfig> grid_4d(Study study, std::span<const int> sizes, int reps = 300, double alpha = 0.05,
                                    std::uint64_t master_seed = kDefaultMasterSeed);

/// Identity of a cell: study, taus scaled to integers, n.
struct ScenarioKey {
    Study study = Study::ThreeD;
    std::vector<std::int64_t> taus;
    int n = 0;

    auto operator<=>(const ScenarioKey&) const = default;
};

ScenarioKey key_of(const ScenarioConfig& config);
std::uint64_t repetition_seed(const ScenarioConfig& config, int rep);

struct RepetitionRecord {
    Study study = Study::ThreeD;
    std::vector<double> taus;
    int n = 0;
    int rep = 0;
    std::uint64_t seed = 0;
    double ll_small = std::numeric_limits<double>::quiet_NaN();
    double ll_large = std::numeric_limits<double>::quiet_NaN();
    double lr = std::numeric_limits<double>::quiet_NaN();
    double stat_nested = std::numeric_limits<double>::quiet_NaN();
    double pval_nested = std::numeric_limits<double>::quiet_NaN();
    int eigen_count = 0;
    double stat_snn = std::numeric_limits<double>::quiet_NaN();
    double pval_snn = std::numeric_limits<double>::quiet_NaN();
    std::string decision_nested;
    std::string decision_snn;
    double klic_nested_rule = std::numeric_limits<double>::quiet_NaN();
    double klic_snn_rule = std::numeric_limits<double>::quiet_NaN();
    std::string error;

    // In-memory diagnostics, not written to the records file.
    double klic_small = std::numeric_limits<double>::quiet_NaN();
    double klic_large = std::numeric_limits<double>::quiet_NaN();

    bool failed() const noexcept { return !error.empty(); }
    ScenarioKey key() const;
};

/// Pure function of (config, rep). Fit and test errors land in `error`.
RepetitionRecord run_repetition(const ScenarioConfig& config, int rep);

/// Runs every (config, rep) not already in `existing` on up to `threads`
/// workers and returns the union sorted by (scenario, rep).
std::vector<RepetitionRecord> run_batch(std::span<const ScenarioConfig> configs, int threads,
                                        std::span<const RepetitionRecord> existing = {});

/// Resumes from `path` if it exists and rewrites it after each scenario.
std::vector<RepetitionRecord> run_batch_to_file(std::span<const ScenarioConfig> configs, int threads,
                                                const std::filesystem::path& path);

std::string records_to_csv(std::span<const RepetitionRecord> records);
std::vector<RepetitionRecord> parse_records_csv(std::istream& in);
std::vector<RepetitionRecord> read_records(const std::filesystem::path& path);

struct SummaryRow {
    Study study = Study::ThreeD;
    std::vector<double> taus;
    int n = 0;
    int r_effective = 0;
    double med_pval_nested = 0.0;
    double med_pval_snn = 0.0;
    int rejections_nested = 0;
    int rejections_snn = 0;
    double mean_klic_nested = 0.0;
    double mean_klic_snn = 0.0;
    int failures = 0;

    /// More than 2% failed repetitions.
    bool failed_cell() const noexcept;
};

/// One row per scenario in key order; failed repetitions are excluded from
/// medians, counts and means. Throws EmptyCell if a scenario has no
/// successful repetition.
std::vector<SummaryRow> aggregate(std::span<const RepetitionRecord> records, double alpha = 0.05);

std::string summary_to_csv(std::span<const SummaryRow> rows);

/// {"master_seed", "alpha", "scenarios": [{"study", "taus", "n", "R"}],
///  "full_grid": bool, "sizes": [n...], "R": reps}
std::vector<ScenarioConfig> configs_from_json(const nlohmann::json& doc, bool full_grid = false);
nlohmann::json configs_to_json(std::span<const ScenarioConfig> configs);

/// Headline 3-d cells, the null-calibration cell and one 4-d cell per
/// comparison.
std::vector<ScenarioConfig> desk_configs(std::uint64_t master_seed = kDefaultMasterSeed);

}  // namespace vinetrunc
