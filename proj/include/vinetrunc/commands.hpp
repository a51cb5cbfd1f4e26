#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vinetrunc/error.hpp"
#include "vinetrunc/fit.hpp"
#include "vinetrunc/vuong.hpp"

namespace vinetrunc {

/// 0 success, 2 usage or input, 3 numerical, 4 IO.
int exit_code(ErrorKind kind) noexcept;

/// Parses `args` (without the program name) and runs one subcommand.
/// Never throws library errors; they are reported on `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Thread budget from VINETRUNC_THREADS, else the hardware concurrency.
int default_threads();

RowMatrixXd simulate_values(const VineModel& model, Eigen::Index n, std::uint64_t seed);

/// Column-wise rank / (n + 1); needs at least two rows.
RowMatrixXd pseudo_obs_values(const RowMatrixXd& raw);

/// "dvine", "cvine", or a JSON structure/model file.
RVineStructure structure_by_name(const std::string& name, int d, const std::string& file);

FitResult fit_truncated(const RVineStructure& structure, int level, const Dataset& data,
                        const std::optional<Eigen::VectorXd>& start = std::nullopt);

nlohmann::json report_to_json(const VuongReport& report, double alpha);

}  // namespace vinetrunc
