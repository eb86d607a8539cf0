#pragma once

#include <json.hpp>

#include "crreg/metrics.hpp"
#include "crreg/registration.hpp"

namespace crreg {

/// Flat object: dice_mean, pct_neg_jacobian, pct_ndv, field_grad_energy,
/// dice_per_label (label number as string key).
nlohmann::ordered_json to_json(const metrics::MetricsReport& m);

/// Config, metrics, mean displacement and the per-iteration
/// loss history. Wall time is deliberately left out so the file is a pure
/// function of its inputs.
nlohmann::ordered_json to_json(const RegistrationReport& r, const RegistrationConfig& cfg);

}  // namespace crreg
