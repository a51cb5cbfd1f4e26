#pragma once

#include <span>
#include <string>

#include "vinetrunc/vine.hpp"

namespace vinetrunc {

struct KlicRecord {
    int rep = 0;
    std::string tag;  ///< which model was chosen
    double value = 0.0;  ///< nats per observation, may be negative
};

/// mean log h0(u) - mean log f(u) over `data`.
double empirical_klic(const VineModel& true_model, const VineModel& fitted, const Dataset& data);

/// Throws EmptyInput for an empty list.
double mean_klic(std::span<const KlicRecord> records);

}  // namespace vinetrunc
