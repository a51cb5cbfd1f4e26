#include "vinetrunc/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include "vinetrunc/harness.hpp"
#include "vinetrunc/io.hpp"
#include "vinetrunc/stats.hpp"

namespace vinetrunc {

using nlohmann::json;

namespace {

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.begin(), v.end()); }

void print_model_table(std::ostream& out, const VineModel& model) {
    out << "tree  edge              family        parameter\n";
    const RVineStructure& s = model.structure();
    for (int t = 0; t < s.tree_count(); ++t) {
        for (std::size_t e = 0; e < s.tree(t).size(); ++e) {
            const EdgeSpec& l = s.tree(t)[e].label;
            std::string label = std::to_string(l.first) + "," + std::to_string(l.second);
            if (!l.conditioning.empty()) {
                label += "|";
                for (std::size_t i = 0; i < l.conditioning.size(); ++i) {
                    label += (i ? "," : "") + std::to_string(l.conditioning[i]);
                }
            }
            const PairCopula& c = model.pair(t, static_cast<int>(e));
            out << std::left << std::setw(6) << t + 1 << std::setw(18) << label << std::setw(14)
                << to_string(c.family());
            if (c.family() == Family::Gaussian) out << format_double(c.rho());
            out << "\n";
        }
    }
}

// Refits each model's Gaussian edges on `data`, starting from its own
// parameters; the larger model also tries the smaller fit padded with zeros.
std::pair<VineModel, VineModel> refit_pair(const VineModel& small, const VineModel& large, const Dataset& data) {
    const FitResult g = fit_mle(small.structure(), small.families(), data, small.parameters());
    FitResult f = fit_mle(large.structure(), large.families(), data, large.parameters());
    if (f.loglik < g.loglik && is_nested(small, large)) {
        Eigen::VectorXd warm = Eigen::VectorXd::Zero(large.parameter_count());
        std::size_t gi = 0, fi = 0;
        const auto& sp = small.pair_copulas();
        const auto& lp = large.pair_copulas();
        const Eigen::VectorXd gamma = g.model.parameters();
        for (std::size_t t = 0; t < lp.size(); ++t) {
            for (std::size_t e = 0; e < lp[t].size(); ++e) {
                if (lp[t][e].family() != Family::Gaussian) continue;
                if (sp[t][e].family() == Family::Gaussian) warm(fi) = gamma(gi++);
                ++fi;
            }
        }
        FitResult again = fit_mle(large.structure(), large.families(), data, warm);
        if (again.loglik > f.loglik) f = std::move(again);
    }
    return {g.model, f.model};
}

}  // namespace

int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::NonConvergence:
        case ErrorKind::NumericalFailure:
        case ErrorKind::SingularInformation:
        case ErrorKind::ZeroVariance:
            return 3;
        case ErrorKind::IoError:
            return 4;
        default:
            return 2;
    }
}

int default_threads() {
    if (const char* env = std::getenv("VINETRUNC_THREADS")) {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RowMatrixXd simulate_values(const VineModel& model, Eigen::Index n, std::uint64_t seed) {
    if (n < 0) throw Error(ErrorKind::DomainError, "sample size must be nonnegative");
    CounterRng rng(seed);
    return sample(model, n, rng).values();
}

RowMatrixXd pseudo_obs_values(const RowMatrixXd& raw) {
    if (raw.rows() < 2) throw Error(ErrorKind::EmptyInput, "pseudo-observations need at least two rows");
    if (!raw.allFinite()) throw Error(ErrorKind::NonNumericInput, "raw data must be finite");
    RowMatrixXd u(raw.rows(), raw.cols());
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        const Eigen::VectorXd col = raw.col(j);
        const auto ranks = pseudo_observations(std::span<const double>(col.data(), col.size()));
        for (Eigen::Index i = 0; i < raw.rows(); ++i) u(i, j) = ranks[i];
    }
    return u;
}

RVineStructure structure_by_name(const std::string& name, int d, const std::string& file) {
    if (name == "dvine") return dvine(d);
    if (name == "cvine") return cvine(d);
    if (name == "file") {
        if (file.empty()) throw Error(ErrorKind::ParseError, "--structure file needs --structure-file PATH");
        RVineStructure s = structure_from_json(read_json(file));
        if (s.dimension() != d) {
            throw Error(ErrorKind::DimensionMismatch, "structure has d=" + std::to_string(s.dimension()) +
                                                          " but the data has " + std::to_string(d) + " columns");
        }
        return s;
    }
    throw Error(ErrorKind::ParseError, "unknown structure '" + name + "' (dvine, cvine or file)");
}

FitResult fit_truncated(const RVineStructure& structure, int level, const Dataset& data,
                        const std::optional<Eigen::VectorXd>& start) {
    return fit_mle(structure, truncated_families(structure, level), data, start);
}

json report_to_json(const VuongReport& report, double alpha) {
    json j = {{"kind", std::string(to_string(report.kind))},
              {"n", report.n},
              {"lr", report.lr},
              {"statistic", report.statistic},
              {"p_value", report.p_value},
              {"decision", std::string(to_string(decide(report, alpha)))}};
    if (report.kind == TestKind::Nested) {
        j["eigenvalues"] = vector_json(report.eigenvalues);
        j["degenerate"] = report.degenerate;
    } else {
        j["omega_hat"] = report.omega_hat;
    }
    return j;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Truncated regular-vine copulas and Vuong model-selection tests", "vinetrunc"};
    app.require_subcommand(1);

    std::string model_path, data_path, out_path, small_path, large_path, structure = "dvine", structure_file,
                                                                           test = "both", config_path, records_path;
    std::int64_t n = 0;
    std::uint64_t seed = 1;
    int trunc = 1, threads = 0;
    double alpha = 0.05;
    bool refit = false, full_grid = false;

    auto* simulate = app.add_subcommand("simulate", "Sample from a model file");
    simulate->add_option("--model", model_path, "Model JSON")->required();
    simulate->add_option("--n", n, "Number of observations")->required()->check(CLI::NonNegativeNumber);
    simulate->add_option("--seed", seed, "Random seed");
    simulate->add_option("--out", out_path, "Output CSV")->required();

    auto* pseudo = app.add_subcommand("pseudo-obs", "Rank-transform raw columns to (0,1)");
    pseudo->add_option("--data", data_path, "Raw CSV with a header row")->required();
    pseudo->add_option("--out", out_path, "Output CSV")->required();

    auto* fit = app.add_subcommand("fit", "Fit a truncated Gaussian vine");
    fit->add_option("--data", data_path, "Dataset CSV")->required();
    fit->add_option("--structure", structure, "dvine, cvine or file")->capture_default_str();
    fit->add_option("--structure-file", structure_file, "Structure or model JSON for --structure file");
    fit->add_option("--trunc", trunc, "Truncation level")->capture_default_str();
    fit->add_option("--out", out_path, "Output model JSON");

    auto* vuong = app.add_subcommand("vuong", "Compare two models with Vuong tests");
    vuong->add_option("--data", data_path, "Dataset CSV")->required();
    vuong->add_option("--small", small_path, "Smaller model JSON")->required();
    vuong->add_option("--large", large_path, "Larger model JSON")->required();
    vuong->add_option("--test", test, "nested, snn or both")
        ->check(CLI::IsMember({"nested", "snn", "both"}))
        ->capture_default_str();
    vuong->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    vuong->add_flag("--refit", refit, "Refit both models on the data first");
    vuong->add_option("--out", out_path, "Also write the report JSON here");

    auto* experiment = app.add_subcommand("experiment", "Run a simulation batch");
    experiment->add_option("--config", config_path, "Scenario JSON (default: desk-scale cells)");
    experiment->add_option("--out", out_path, "Output directory")->required();
    experiment->add_option("--threads", threads, "Worker threads (default VINETRUNC_THREADS or all cores)");
    experiment->add_flag("--full-grid", full_grid, "Run the complete 3-d and 4-d grids");

    auto* report = app.add_subcommand("report", "Summarize a records file");
    report->add_option("--records", records_path, "Directory holding records.csv, or the file")->required();
    report->add_option("--alpha", alpha, "Significance level")->capture_default_str();
    report->add_option("--out", out_path, "Summary CSV (default: next to the records)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*simulate) {
            write_dataset(out_path, simulate_values(load_model(model_path), n, seed));
        } else if (*pseudo) {
            write_dataset(out_path, pseudo_obs_values(read_numeric_csv(data_path).values));
        } else if (*fit) {
            const Dataset data = read_dataset(data_path);
            const RVineStructure s = structure_by_name(structure, data.dimension(), structure_file);
            const FitResult r = fit_truncated(s, trunc, data);
            print_model_table(out, r.model);
            out << "loglik " << format_double(r.loglik) << "\n";
            if (!out_path.empty()) save_model(out_path, r.model);
        } else if (*vuong) {
            if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::DomainError, "--alpha must lie in (0,1)");
            const Dataset data = read_dataset(data_path);
            VineModel small = load_model(small_path);
            VineModel large = load_model(large_path);
            if (refit) std::tie(small, large) = refit_pair(small, large, data);
            json doc = {{"n", data.size()},
                        {"alpha", alpha},
                        {"loglik_small", log_likelihood(small, data)},
                        {"loglik_large", log_likelihood(large, data)}};
            if (test != "snn") doc["nested"] = report_to_json(vuong_nested(small, large, data), alpha);
            if (test != "nested") doc["snn"] = report_to_json(vuong_snn(large, small, data), alpha);
            out << doc.dump(2) << "\n";
            if (!out_path.empty()) write_text(out_path, doc.dump(2) + "\n");
        } else if (*experiment) {
            std::vector<ScenarioConfig> configs;
            if (config_path.empty()) {
                configs = desk_configs();
                if (full_grid) configs = configs_from_json(json::object(), true);
            } else {
                configs = configs_from_json(read_json(config_path), full_grid);
            }
            if (full_grid) {
                err << "warning: the full grid runs " << configs.size()
                    << " scenarios and may take many hours on a desktop\n";
            }
            std::error_code ec;
            std::filesystem::create_directories(out_path, ec);
            if (ec) throw Error(ErrorKind::IoError, "cannot create " + out_path + ": " + ec.message());
            const std::filesystem::path dir(out_path);
            write_text(dir / "config.json", configs_to_json(configs).dump(2) + "\n");
            const auto records = run_batch_to_file(configs, threads > 0 ? threads : default_threads(),
                                                   dir / "records.csv");
            const auto rows = aggregate(records, configs.empty() ? 0.05 : configs.front().alpha);
            write_text(dir / "summary.csv", summary_to_csv(rows));
            out << summary_to_csv(rows);
        } else if (*report) {
            if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::DomainError, "--alpha must lie in (0,1)");
            std::filesystem::path path(records_path);
            if (std::filesystem::is_directory(path)) path /= "records.csv";
            const auto rows = aggregate(read_records(path), alpha);
            const std::string csv = summary_to_csv(rows);
            write_text(out_path.empty() ? path.parent_path() / "summary.csv" : std::filesystem::path(out_path), csv);
            out << csv;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace vinetrunc
