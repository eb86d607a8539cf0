#include "crreg/report.hpp"

namespace crreg {

nlohmann::ordered_json to_json(const metrics::MetricsReport& m) {
  nlohmann::ordered_json j;
  j["dice_mean"] = m.dice_mean;
  j["pct_neg_jacobian"] = m.pct_neg_jacobian;
  j["pct_ndv"] = m.pct_ndv;
  j["field_grad_energy"] = m.field_grad_energy;
  nlohmann::ordered_json per_label = nlohmann::ordered_json::object();
  for (const auto& [label, dsc] : m.dice_per_label) per_label[std::to_string(label)] = dsc;
  j["dice_per_label"] = per_label;
  return j;
}

nlohmann::ordered_json to_json(const RegistrationReport& r, const RegistrationConfig& cfg) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"metric", to_string(cfg.metric)},
      {"lambda", cfg.lambda},
      {"levels", cfg.levels},
      {"iters_per_level", cfg.iters_per_level},
      {"step_size", cfg.step_size},
      {"adam_betas", {cfg.beta1, cfg.beta2}},
      {"bins", cfg.bins},
      {"bandwidth_scale", cfg.bandwidth_scale},
      {"seed", cfg.seed},
  };
  j["metrics"] = to_json(r.metrics);
  j["mean_displacement"] = r.final_field.mean_magnitude();

  nlohmann::ordered_json total = nlohmann::ordered_json::array();
  nlohmann::ordered_json similarity = nlohmann::ordered_json::array();
  nlohmann::ordered_json regularizer = nlohmann::ordered_json::array();
  for (const auto& t : r.loss_history) {
    total.push_back(t.total);
    similarity.push_back(t.similarity);
    regularizer.push_back(t.regularizer);
  }
  j["loss_history"] = {
      {"total", total}, {"similarity", similarity}, {"regularizer", regularizer}};
  return j;
}

}  // namespace crreg
