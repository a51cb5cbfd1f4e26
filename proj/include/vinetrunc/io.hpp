#pragma once

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "vinetrunc/vine.hpp"

namespace vinetrunc {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Strict parse of a whole field; throws NonNumericInput.
double parse_double(std::string_view text);

/// {d, truncation_level, trees: [[{conditioned, conditioning, family, parameter}]]}
nlohmann::json model_to_json(const VineModel& model);
/// Throws ParseError for malformed documents and the structure or copula
/// errors for invalid contents.
VineModel model_from_json(const nlohmann::json& doc);

/// Accepts a model document or a bare {d, trees} structure document.
RVineStructure structure_from_json(const nlohmann::json& doc);

nlohmann::json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

VineModel load_model(const std::filesystem::path& path);
void save_model(const std::filesystem::path& path, const VineModel& model);

/// Header row then one row per observation, all fields numeric.
struct NumericTable {
    std::vector<std::string> header;
    RowMatrixXd values;
};

NumericTable parse_numeric_csv(std::istream& in);
NumericTable read_numeric_csv(const std::filesystem::path& path);

/// Header u1,...,ud.
std::string dataset_to_csv(const RowMatrixXd& values);
Dataset read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, const RowMatrixXd& values);

}  // namespace vinetrunc
