#include "crreg/experiments.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "crreg/transform.hpp"

namespace crreg {

SweepAxis parse_axis(const std::string& name) {
  if (name == "tx") return SweepAxis::tx;
  if (name == "ty") return SweepAxis::ty;
  if (name == "tz") return SweepAxis::tz;
  if (name == "rx") return SweepAxis::rx;
  if (name == "ry") return SweepAxis::ry;
  if (name == "rz") return SweepAxis::rz;
  throw Error("unknown axis '" + name + "' (expected tx, ty, tz, rx, ry or rz)");
}

std::string to_string(SweepAxis a) {
  static const char* names[] = {"tx", "ty", "tz", "rx", "ry", "rz"};
  return names[static_cast<int>(a)];
}

std::vector<SweepRow> landscape(const Volume& fixed, const Volume& moving,
                                const RegistrationConfig& cfg, SweepAxis axis, double range,
                                int steps) {
  if (steps < 3) throw Error("landscape: steps must be >= 3");
  if (!(range > 0.0)) throw Error("landscape: range must be > 0");
  require_same_dims(fixed.dims(), moving.dims(), "landscape");
  const PairBinning binning = pair_binning(fixed, moving, cfg);

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(steps));
  const int a = static_cast<int>(axis);
  for (int s = 0; s < steps; ++s) {
    const double value = -range + 2.0 * range * s / (steps - 1);
    AffineParams params;
    if (a < 3) {
      params.translation[a] = value;
    } else {
      params.rotation_deg[a - 3] = value;
    }
    const Volume warped = warp(moving, affine_field(params, fixed.dims())).warped;
    SweepRow row;
    row.parameter = value;
    row.objective.similarity =
        similarity_loss_value(cfg.metric, fixed, warped, binning.fixed, binning.moving);
    row.objective.total = row.objective.similarity;
    rows.push_back(row);
  }
  return rows;
}

std::vector<SweepRow> lambda_sweep(const Volume& fixed, const Volume& moving,
                                   const LabelVolume& fixed_labels,
                                   const LabelVolume& moving_labels,
                                   const RegistrationConfig& cfg, std::vector<double> lambdas) {
  if (lambdas.empty()) throw Error("lambda_sweep: no lambdas given");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw Error("lambda_sweep: lambda must be >= 0");
  }
  std::sort(lambdas.begin(), lambdas.end());

  std::vector<SweepRow> rows;
  for (double l : lambdas) {
    RegistrationConfig run = cfg;
    run.lambda = l;
    const RegistrationReport rep =
        register_images(fixed, moving, run, fixed_labels, moving_labels);
    SweepRow row;
    row.parameter = l;
    row.objective = rep.loss_history.back();
    // The reported field is the best finest-level iterate, so report its terms.
    for (auto it = rep.loss_history.end() - run.iters_per_level; it != rep.loss_history.end();
         ++it) {
      if (it->total < row.objective.total) row.objective = *it;
    }
    row.dice_mean = rep.metrics.dice_mean;
    row.pct_neg_jacobian = rep.metrics.pct_neg_jacobian;
    row.pct_ndv = rep.metrics.pct_ndv;
    row.field_grad_energy = rep.metrics.field_grad_energy;
    row.mean_displacement = rep.final_field.mean_magnitude();
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> default_lambda_grid(Metric metric) {
  if (metric == Metric::mi) return {0.1, 1.0, 1.7, 4.5, 10.0, 100.0};
  return {0.1, 1.0, 4.2, 7.7, 10.0, 100.0};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_landscape_csv(std::ostream& out, SweepAxis axis, const std::vector<SweepRow>& rows) {
  out << "axis,parameter,similarity\n";
  for (const auto& r : rows) {
    out << to_string(axis) << ',' << format_double(r.parameter) << ','
        << format_double(r.objective.similarity) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  out << "lambda,total,similarity,regularizer,dice_mean,pct_neg_jacobian,pct_ndv,"
         "field_grad_energy,mean_displacement\n";
  for (const auto& r : rows) {
    out << format_double(r.parameter) << ',' << format_double(r.objective.total) << ','
        << format_double(r.objective.similarity) << ',' << format_double(r.objective.regularizer)
        << ',' << opt(r.dice_mean) << ',' << opt(r.pct_neg_jacobian) << ',' << opt(r.pct_ndv)
        << ',' << opt(r.field_grad_energy) << ',' << opt(r.mean_displacement) << '\n';
  }
}

}  // namespace crreg
