#include "vinetrunc/klic.hpp"

#include "vinetrunc/error.hpp"

namespace vinetrunc {

double empirical_klic(const VineModel& true_model, const VineModel& fitted, const Dataset& data) {
    if (data.size() == 0) throw Error(ErrorKind::EmptyInput, "empirical KLIC needs observations");
    return (log_density_terms(true_model, data) - log_density_terms(fitted, data)).mean();
}

double mean_klic(std::span<const KlicRecord> records) {
    if (records.empty()) throw Error(ErrorKind::EmptyInput, "no KLIC records to average");
    double sum = 0.0;
    for (const auto& r : records) sum += r.value;
    return sum / static_cast<double>(records.size());
}

}  // namespace vinetrunc
