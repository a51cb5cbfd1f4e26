#include "vinetrunc/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "vinetrunc/error.hpp"

namespace vinetrunc {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

template <typename T>
T field(const json& obj, const char* key) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("field '") + key + "': " + e.what());
    }
}

std::vector<std::vector<EdgeSpec>> labels_from_json(const json& doc) {
    const json& trees = doc.contains("trees") ? doc.at("trees") : json();
    if (!trees.is_array()) throw Error(ErrorKind::ParseError, "'trees' must be an array of trees");
    std::vector<std::vector<EdgeSpec>> labels;
    for (const json& tree : trees) {
        if (!tree.is_array()) throw Error(ErrorKind::ParseError, "each tree must be an array of edges");
        auto& level = labels.emplace_back();
        for (const json& edge : tree) {
            const auto conditioned = field<std::vector<int>>(edge, "conditioned");
            if (conditioned.size() != 2) throw Error(ErrorKind::ParseError, "'conditioned' needs two variables");
            EdgeSpec spec{conditioned[0], conditioned[1],
                          edge.contains("conditioning") ? field<std::vector<int>>(edge, "conditioning")
                                                        : std::vector<int>{}};
            if (spec.first > spec.second) std::swap(spec.first, spec.second);
            std::sort(spec.conditioning.begin(), spec.conditioning.end());
            level.push_back(std::move(spec));
        }
    }
    return labels;
}

}  // namespace

std::string format_double(double value) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    text = trim(text);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw Error(ErrorKind::NonNumericInput, "not a number: '" + std::string(text) + "'");
    }
    return value;
}

json model_to_json(const VineModel& model) {
    const RVineStructure& s = model.structure();
    json trees = json::array();
    for (int t = 0; t < s.tree_count(); ++t) {
        json level = json::array();
        const auto& edges = s.tree(t);
        for (std::size_t e = 0; e < edges.size(); ++e) {
            const PairCopula& c = model.pair(t, static_cast<int>(e));
            json edge = {{"conditioned", {edges[e].label.first, edges[e].label.second}},
                         {"conditioning", edges[e].label.conditioning},
                         {"family", std::string(to_string(c.family()))}};
            edge["parameter"] = c.family() == Family::Gaussian ? json(c.rho()) : json(nullptr);
            level.push_back(std::move(edge));
        }
        trees.push_back(std::move(level));
    }
    return {{"d", s.dimension()}, {"truncation_level", model.truncation_level()}, {"trees", std::move(trees)}};
}

RVineStructure structure_from_json(const json& doc) {
    return from_labels(field<int>(doc, "d"), labels_from_json(doc));
}

VineModel model_from_json(const json& doc) {
    const int d = field<int>(doc, "d");
    const RVineStructure structure = from_labels(d, labels_from_json(doc));

    // Copulas are matched to the canonical edge order by label.
    EdgeTable<PairCopula> pairs;
    const auto& trees = doc.at("trees");
    for (int t = 0; t < structure.tree_count(); ++t) {
        auto& level = pairs.emplace_back();
        for (const VineEdge& edge : structure.tree(t)) {
            const json* match = nullptr;
            for (const json& candidate : trees.at(t)) {
                auto cond = field<std::vector<int>>(candidate, "conditioned");
                if (cond.size() == 2 && std::min(cond[0], cond[1]) == edge.label.first &&
                    std::max(cond[0], cond[1]) == edge.label.second) {
                    match = &candidate;
                }
            }
            if (match == nullptr) throw Error(ErrorKind::ParseError, "edge without a copula entry");
            const Family family = family_from_string(field<std::string>(*match, "family"));
            if (family == Family::Gaussian) {
                level.push_back(PairCopula::gaussian(field<double>(*match, "parameter")));
            } else {
                level.push_back(PairCopula::independence());
            }
        }
    }
    int level = structure.tree_count();
    if (doc.contains("truncation_level")) level = field<int>(doc, "truncation_level");
    return VineModel(structure, std::move(pairs), level);
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::ParseError, path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

VineModel load_model(const std::filesystem::path& path) { return model_from_json(read_json(path)); }

void save_model(const std::filesystem::path& path, const VineModel& model) {
    write_text(path, model_to_json(model).dump(2) + "\n");
}

NumericTable parse_numeric_csv(std::istream& in) {
    NumericTable table;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "missing header row");
    for (auto name : split_fields(line)) table.header.emplace_back(name);
    const std::size_t cols = table.header.size();

    std::vector<double> flat;
    Eigen::Index rows = 0;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != cols) {
            throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + " has " +
                                                   std::to_string(fields.size()) + " fields, expected " +
                                                   std::to_string(cols));
        }
        for (auto f : fields) flat.push_back(parse_double(f));
        ++rows;
    }
    table.values = Eigen::Map<RowMatrixXd>(flat.data(), rows, static_cast<Eigen::Index>(cols));
    return table;
}

NumericTable read_numeric_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return parse_numeric_csv(in);
}

std::string dataset_to_csv(const RowMatrixXd& values) {
    std::string out;
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
        if (j > 0) out += ',';
        out += "u" + std::to_string(j + 1);
    }
    out += '\n';
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) {
            if (j > 0) out += ',';
            out += format_double(values(i, j));
        }
        out += '\n';
    }
    return out;
}

Dataset read_dataset(const std::filesystem::path& path) { return Dataset(read_numeric_csv(path).values); }

void write_dataset(const std::filesystem::path& path, const RowMatrixXd& values) {
    write_text(path, dataset_to_csv(values));
}

}  // namespace vinetrunc
