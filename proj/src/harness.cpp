#include "vinetrunc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "vinetrunc/error.hpp"
#include "vinetrunc/fit.hpp"
#include "vinetrunc/io.hpp"
#include "vinetrunc/klic.hpp"
#include "vinetrunc/stats.hpp"
#include "vinetrunc/vuong.hpp"

namespace vinetrunc {

using nlohmann::json;

namespace {

constexpr const char* kRecordColumns =
    "study,tau_t1,tau_t2,tau_t3,n,rep,seed,ll_small,ll_large,lr,stat_nested,pval_nested,eigen_count,"
    "stat_snn,pval_snn,decision_nested,decision_snn,klic_nested_rule,klic_snn_rule,error";

constexpr const char* kSummaryColumns =
    "study,tau_t1,tau_t2,tau_t3,n,R_effective,med_pval_nested,med_pval_snn,rejections_nested,"
    "rejections_snn,mean_klic_nested,mean_klic_snn,failures";

std::int64_t scaled_tau(double tau) { return std::llround(tau * 1e4); }

std::uint64_t study_tag(Study study) { return static_cast<std::uint64_t>(study) + 1; }

std::string number_field(double v) { return std::isnan(v) ? std::string() : format_double(v); }

double number_from_field(std::string_view s) {
    return s.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(s);
}

void append_taus(std::string& out, const std::vector<double>& taus) {
    for (std::size_t t = 0; t < 3; ++t) {
        out += ',';
        if (t < taus.size()) out += format_double(taus[t]);
    }
}

std::string sanitize(std::string text) {
    for (char& c : text) {
        if (c == ',' || c == '"') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return text;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

Eigen::VectorXd start_values(const VineModel& truth, int level) { return truncate(truth, level).parameters(); }

// Larger-model fit: from the true parameters, and from the smaller fit padded
// with zeros whenever the first attempt fails or lands below it.
FitResult fit_larger(const RVineStructure& s, int level, const Dataset& data, const VineModel& truth,
                     const FitResult& small) {
    const auto families = truncated_families(s, level);
    std::optional<FitResult> best;
    std::exception_ptr first_error;
    try {
        best = fit_mle(s, families, data, start_values(truth, level));
    } catch (const Error&) {
        first_error = std::current_exception();
    }
    if (!best || best->loglik < small.loglik) {
        Eigen::VectorXd warm = Eigen::VectorXd::Zero(pair_count(s.dimension(), level));
        warm.head(small.model.parameter_count()) = small.model.parameters();
        try {
            FitResult again = fit_mle(s, families, data, warm);
            if (!best || again.loglik > best->loglik) best = std::move(again);
        } catch (const Error&) {
            if (!best) std::rethrow_exception(first_error);
        }
    }
    return std::move(*best);
}

}  // namespace

std::string_view to_string(Study study) noexcept {
    switch (study) {
        case Study::ThreeD: return "3d";
        case Study::FourD_G1_vs_G2: return "4d_g1_vs_g2";
        case Study::FourD_G2_vs_F: return "4d_g2_vs_f";
    }
    return "unknown";
}

Study study_from_string(std::string_view name) {
    for (Study s : {Study::ThreeD, Study::FourD_G1_vs_G2, Study::FourD_G2_vs_F}) {
        if (to_string(s) == name) return s;
    }
    throw Error(ErrorKind::ParseError, "unknown study '" + std::string(name) + "'");
}

std::vector<double> tau_grid() {
    std::vector<double> out;
    for (int k = 1; k <= 7; ++k) out.push_back(4.0 * k / 100.0);
    return out;
}

int study_dimension(Study study) noexcept { return study == Study::ThreeD ? 3 : 4; }

std::pair<int, int> study_levels(Study study) noexcept {
    switch (study) {
        case Study::ThreeD: return {1, 2};
        case Study::FourD_G1_vs_G2: return {1, 2};
        case Study::FourD_G2_vs_F: return {2, 3};
    }
    return {1, 2};
}

void check_config(const ScenarioConfig& config) {
    const int d = study_dimension(config.study);
    if (static_cast<int>(config.taus.size()) != d - 1) {
        throw Error(ErrorKind::BadDimension, "study " + std::string(to_string(config.study)) + " needs " +
                                                 std::to_string(d - 1) + " tau values");
    }
    for (double t : config.taus) {
        if (!(t >= 0.0 && t < 1.0)) throw Error(ErrorKind::DomainError, "tau values must lie in [0,1)");
    }
    if (config.n < 1) throw Error(ErrorKind::DomainError, "sample size must be positive");
    if (config.reps < 1) throw Error(ErrorKind::DomainError, "repetition count must be positive");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw Error(ErrorKind::DomainError, "alpha must lie in (0,1)");
}

VineModel true_model(const ScenarioConfig& config) {
    check_config(config);
    std::vector<double> rho;
    for (double t : config.taus) rho.push_back(tau_to_rho(t));
    const int d = study_dimension(config.study);
    return VineModel::gaussian_by_tree(dvine(d), rho, d - 1);
}

std::vector<ScenarioConfig> grid_3d(std::span<const int> sizes, int reps, double alpha, std::uint64_t master_seed) {
    std::vector<ScenarioConfig> out;
    const auto grid = tau_grid();
    for (int n : sizes) {
        for (double t1 : grid) {
            for (double t2 : grid) out.push_back({Study::ThreeD, {t1, t2}, n, reps, alpha, master_seed});
        }
    }
    return out;
}

std::vector<ScenarioConfig> grid_4d(Study study, std::span<const int> sizes, int reps, double alpha,
                                    std::uint64_t master_seed) {
    if (study == Study::ThreeD) throw Error(ErrorKind::DomainError, "grid_4d needs a four-dimensional study");
    std::vector<ScenarioConfig> out;
    const auto grid = tau_grid();
    for (int n : sizes) {
        for (double t1 : grid) {
            for (double t2 : grid) {
                for (double t3 : grid) out.push_back({study, {t1, t2, t3}, n, reps, alpha, master_seed});
            }
        }
    }
    return out;
}

ScenarioKey key_of(const ScenarioConfig& config) {
    ScenarioKey key{config.study, {}, config.n};
    for (double t : config.taus) key.taus.push_back(scaled_tau(t));
    return key;
}

ScenarioKey RepetitionRecord::key() const {
    ScenarioKey k{study, {}, n};
    for (double t : taus) k.taus.push_back(scaled_tau(t));
    return k;
}

std::uint64_t repetition_seed(const ScenarioConfig& config, int rep) {
    std::int64_t t[3] = {0, 0, 0};
    for (std::size_t i = 0; i < config.taus.size() && i < 3; ++i) t[i] = scaled_tau(config.taus[i]);
    return hash_words({config.master_seed, study_tag(config.study), static_cast<std::uint64_t>(t[0]),
                       static_cast<std::uint64_t>(t[1]), static_cast<std::uint64_t>(t[2]),
                       static_cast<std::uint64_t>(config.n), static_cast<std::uint64_t>(rep)});
}

RepetitionRecord run_repetition(const ScenarioConfig& config, int rep) {
    RepetitionRecord rec;
    rec.study = config.study;
    rec.taus = config.taus;
    rec.n = config.n;
    rec.rep = rep;
    rec.seed = repetition_seed(config, rep);
    try {
        const VineModel truth = true_model(config);
        const RVineStructure& s = truth.structure();
        CounterRng rng(rec.seed);
        const Dataset data = sample(truth, config.n, rng);

        const auto [small_level, large_level] = study_levels(config.study);
        const FitResult small =
            fit_mle(s, truncated_families(s, small_level), data, start_values(truth, small_level));
        const FitResult large = fit_larger(s, large_level, data, truth, small);
        rec.ll_small = small.loglik;
        rec.ll_large = large.loglik;

        const VuongReport nested = vuong_nested(small.model, large.model, data);
        const VuongReport snn = vuong_snn(large.model, small.model, data);
        rec.lr = nested.lr;
        rec.stat_nested = nested.statistic;
        rec.pval_nested = nested.p_value;
        rec.eigen_count = static_cast<int>(nested.eigenvalues.size());
        rec.stat_snn = snn.statistic;
        rec.pval_snn = snn.p_value;
        const Decision dn = decide(nested, config.alpha);
        const Decision ds = decide(snn, config.alpha);
        rec.decision_nested = to_string(dn);
        rec.decision_snn = to_string(ds);

        rec.klic_small = empirical_klic(truth, small.model, data);
        rec.klic_large = empirical_klic(truth, large.model, data);
        rec.klic_nested_rule = dn == Decision::PreferLarger ? rec.klic_large : rec.klic_small;
        rec.klic_snn_rule = ds == Decision::PreferLarger ? rec.klic_large : rec.klic_small;
    } catch (const std::bad_alloc&) {
        throw;
    } catch (const std::exception& e) {
        RepetitionRecord failed;
        failed.study = rec.study;
        failed.taus = rec.taus;
        failed.n = rec.n;
        failed.rep = rec.rep;
        failed.seed = rec.seed;
        failed.error = sanitize(e.what());
        return failed;
    }
    return rec;
}

std::vector<RepetitionRecord> run_batch(std::span<const ScenarioConfig> configs, int threads,
                                        std::span<const RepetitionRecord> existing) {
    std::set<std::pair<ScenarioKey, int>> done;
    for (const auto& r : existing) done.emplace(r.key(), r.rep);

    std::vector<std::pair<std::size_t, int>> tasks;
    std::set<std::pair<ScenarioKey, int>> queued;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        check_config(configs[c]);
        const ScenarioKey key = key_of(configs[c]);
        for (int rep = 0; rep < configs[c].reps; ++rep) {
            if (done.contains({key, rep}) || !queued.emplace(key, rep).second) continue;
            tasks.emplace_back(c, rep);
        }
    }

    std::vector<RepetitionRecord> fresh(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr fatal;
    std::mutex fatal_mutex;
    const auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                fresh[i] = run_repetition(configs[tasks[i].first], tasks[i].second);
            } catch (...) {
                std::lock_guard lock(fatal_mutex);
                if (!fatal) fatal = std::current_exception();
                next = tasks.size();
            }
        }
    };
    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), 1,
                                                        std::max<std::size_t>(tasks.size(), 1));
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (fatal) std::rethrow_exception(fatal);

    std::vector<RepetitionRecord> all(existing.begin(), existing.end());
    all.insert(all.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
    std::stable_sort(all.begin(), all.end(), [](const RepetitionRecord& a, const RepetitionRecord& b) {
        return std::pair(a.key(), a.rep) < std::pair(b.key(), b.rep);
    });
    all.erase(std::unique(all.begin(), all.end(),
                          [](const RepetitionRecord& a, const RepetitionRecord& b) {
                              return a.rep == b.rep && a.key() == b.key();
                          }),
              all.end());
    return all;
}

std::vector<RepetitionRecord> run_batch_to_file(std::span<const ScenarioConfig> configs, int threads,
                                                const std::filesystem::path& path) {
    std::vector<RepetitionRecord> records;
    if (std::filesystem::exists(path)) records = read_records(path);
    const auto save = [&] {
        const auto tmp = std::filesystem::path(path.string() + ".tmp");
        write_text(tmp, records_to_csv(records));
        std::error_code ec;
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw Error(ErrorKind::IoError, "cannot replace " + path.string() + ": " + ec.message());
    };
    for (const auto& config : configs) {
        records = run_batch(std::span(&config, 1), threads, records);
        save();
    }
    if (configs.empty()) save();
    return records;
}

std::string records_to_csv(std::span<const RepetitionRecord> records) {
    std::string out = kRecordColumns;
    out += '\n';
    for (const auto& r : records) {
        out += to_string(r.study);
        append_taus(out, r.taus);
        out += ',' + std::to_string(r.n) + ',' + std::to_string(r.rep) + ',' + std::to_string(r.seed);
        for (double v : {r.ll_small, r.ll_large, r.lr, r.stat_nested, r.pval_nested}) out += ',' + number_field(v);
        out += ',' + (r.failed() ? std::string() : std::to_string(r.eigen_count));
        for (double v : {r.stat_snn, r.pval_snn}) out += ',' + number_field(v);
        out += ',' + r.decision_nested + ',' + r.decision_snn;
        for (double v : {r.klic_nested_rule, r.klic_snn_rule}) out += ',' + number_field(v);
        out += ',' + sanitize(r.error) + '\n';
    }
    return out;
}

std::vector<RepetitionRecord> parse_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kRecordColumns) {
        throw Error(ErrorKind::ParseError, "records file does not start with the expected header");
    }
    std::vector<RepetitionRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split(line);
        if (f.size() != 20) {
            throw Error(ErrorKind::ParseError, "records line " + std::to_string(line_no) + " has " +
                                                   std::to_string(f.size()) + " fields");
        }
        try {
            RepetitionRecord r;
            r.study = study_from_string(f[0]);
            for (std::size_t t = 1; t <= 3; ++t) {
                if (!f[t].empty()) r.taus.push_back(parse_double(f[t]));
            }
            r.n = std::stoi(std::string(f[4]));
            r.rep = std::stoi(std::string(f[5]));
            r.seed = std::stoull(std::string(f[6]));
            r.ll_small = number_from_field(f[7]);
            r.ll_large = number_from_field(f[8]);
            r.lr = number_from_field(f[9]);
            r.stat_nested = number_from_field(f[10]);
            r.pval_nested = number_from_field(f[11]);
            r.eigen_count = f[12].empty() ? 0 : std::stoi(std::string(f[12]));
            r.stat_snn = number_from_field(f[13]);
            r.pval_snn = number_from_field(f[14]);
            r.decision_nested = f[15];
            r.decision_snn = f[16];
            r.klic_nested_rule = number_from_field(f[17]);
            r.klic_snn_rule = number_from_field(f[18]);
            r.error = f[19];
            out.push_back(std::move(r));
        } catch (const std::logic_error& e) {
            throw Error(ErrorKind::ParseError, "records line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorKind::ParseError, "records line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RepetitionRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
    return parse_records_csv(in);
}

bool SummaryRow::failed_cell() const noexcept {
    const int total = r_effective + failures;
    return total == 0 || failures * 50 > total;
}

std::vector<SummaryRow> aggregate(std::span<const RepetitionRecord> records, double alpha) {
    std::map<ScenarioKey, std::vector<const RepetitionRecord*>> cells;
    for (const auto& r : records) cells[r.key()].push_back(&r);

    std::vector<SummaryRow> rows;
    for (const auto& [key, cell] : cells) {
        SummaryRow row;
        row.study = key.study;
        row.taus = cell.front()->taus;
        row.n = key.n;
        std::vector<double> pn, ps;
        std::vector<KlicRecord> kn, ks;
        for (const RepetitionRecord* r : cell) {
            if (r->failed()) {
                ++row.failures;
                continue;
            }
            pn.push_back(r->pval_nested);
            ps.push_back(r->pval_snn);
            row.rejections_nested += r->pval_nested < alpha;
            row.rejections_snn += r->pval_snn < alpha;
            kn.push_back({r->rep, r->decision_nested, r->klic_nested_rule});
            ks.push_back({r->rep, r->decision_snn, r->klic_snn_rule});
        }
        row.r_effective = static_cast<int>(pn.size());
        if (row.r_effective == 0) {
            throw Error(ErrorKind::EmptyCell, "scenario " + std::string(to_string(key.study)) + " n=" +
                                                  std::to_string(key.n) + " has no successful repetition");
        }
        row.med_pval_nested = median(std::move(pn));
        row.med_pval_snn = median(std::move(ps));
        row.mean_klic_nested = mean_klic(kn);
        row.mean_klic_snn = mean_klic(ks);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string summary_to_csv(std::span<const SummaryRow> rows) {
    std::string out = kSummaryColumns;
    out += '\n';
    for (const auto& r : rows) {
        out += to_string(r.study);
        append_taus(out, r.taus);
        out += ',' + std::to_string(r.n) + ',' + std::to_string(r.r_effective);
        out += ',' + number_field(r.med_pval_nested) + ',' + number_field(r.med_pval_snn);
        out += ',' + std::to_string(r.rejections_nested) + ',' + std::to_string(r.rejections_snn);
        out += ',' + number_field(r.mean_klic_nested) + ',' + number_field(r.mean_klic_snn);
        out += ',' + std::to_string(r.failures) + '\n';
    }
    return out;
}

std::vector<ScenarioConfig> configs_from_json(const json& doc, bool full_grid) {
    if (!doc.is_object()) throw Error(ErrorKind::ParseError, "configuration must be a JSON object");
    try {
        const std::uint64_t seed = doc.value("master_seed", kDefaultMasterSeed);
        const double alpha = doc.value("alpha", 0.05);
        const int default_reps = doc.value("R", 300);
        std::vector<ScenarioConfig> out;
        if (doc.contains("scenarios")) {
            for (const json& s : doc.at("scenarios")) {
                ScenarioConfig c;
                c.study = study_from_string(s.at("study").get<std::string>());
                c.taus = s.at("taus").get<std::vector<double>>();
                c.n = s.at("n").get<int>();
                c.reps = s.value("R", default_reps);
                c.alpha = s.value("alpha", alpha);
                c.master_seed = s.value("master_seed", seed);
                check_config(c);
                out.push_back(std::move(c));
            }
        }
        if (full_grid || doc.value("full_grid", false)) {
            const auto sizes = doc.value("sizes", std::vector<int>{100, 200, 500, 1000});
            for (auto&& c : grid_3d(sizes, default_reps, alpha, seed)) out.push_back(std::move(c));
            for (Study s : {Study::FourD_G1_vs_G2, Study::FourD_G2_vs_F}) {
                for (auto&& c : grid_4d(s, sizes, default_reps, alpha, seed)) out.push_back(std::move(c));
            }
        }
        std::set<ScenarioKey> seen;
        std::erase_if(out, [&](const ScenarioConfig& c) { return !seen.insert(key_of(c)).second; });
        return out;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::ParseError, std::string("configuration: ") + e.what());
    }
}

json configs_to_json(std::span<const ScenarioConfig> configs) {
    json scenarios = json::array();
    for (const auto& c : configs) {
        scenarios.push_back({{"study", std::string(to_string(c.study))},
                             {"taus", c.taus},
                             {"n", c.n},
                             {"R", c.reps},
                             {"alpha", c.alpha},
                             {"master_seed", c.master_seed}});
    }
    return {{"scenarios", std::move(scenarios)}};
}

std::vector<ScenarioConfig> desk_configs(std::uint64_t master_seed) {
    return {
        {Study::ThreeD, {0.20, 0.0}, 500, 500, 0.05, master_seed},
        {Study::ThreeD, {0.20, 0.08}, 500, 300, 0.05, master_seed},
        {Study::ThreeD, {0.20, 0.12}, 500, 300, 0.05, master_seed},
        {Study::FourD_G1_vs_G2, {0.12, 0.08, 0.04}, 200, 50, 0.05, master_seed},
        {Study::FourD_G2_vs_F, {0.12, 0.08, 0.04}, 200, 50, 0.05, master_seed},
    };
}

}  // namespace vinetrunc
