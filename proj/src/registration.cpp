#include "crreg/registration.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "crreg/transform.hpp"

namespace crreg {
namespace {

constexpr double kAdamEpsilon = 1e-8;

class Adam {
 public:
  Adam(std::size_t n, const RegistrationConfig& cfg)
      : m_(n, Vec3{0.0, 0.0, 0.0}), v_(n, Vec3{0.0, 0.0, 0.0}), cfg_(cfg) {}

  void step(DisplacementField& field, const DisplacementField& grad) {
    ++t_;
    const double b1 = cfg_.beta1;
    const double b2 = cfg_.beta2;
    const double c1 = 1.0 - std::pow(b1, t_);
    const double c2 = 1.0 - std::pow(b2, t_);
    for (std::size_t i = 0; i < field.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        const double g = grad[i][c];
        m_[i][c] = b1 * m_[i][c] + (1.0 - b1) * g;
        v_[i][c] = b2 * v_[i][c] + (1.0 - b2) * g * g;
        field[i][c] -= cfg_.step_size * (m_[i][c] / c1) / (std::sqrt(v_[i][c] / c2) + kAdamEpsilon);
      }
    }
  }

 private:
  std::vector<Vec3> m_;
  std::vector<Vec3> v_;
  const RegistrationConfig& cfg_;
  int t_ = 0;
};

RegistrationReport run(const Volume& fixed, const Volume& moving, const RegistrationConfig& cfg) {
  cfg.validate();
  require_same_dims(fixed.dims(), moving.dims(), "register");
  const auto start = std::chrono::steady_clock::now();

  std::vector<Volume> fixed_pyr{fixed};
  std::vector<Volume> moving_pyr{moving};
  for (int l = 1; l < cfg.levels; ++l) {
    const Dims& d = fixed_pyr.back().dims();
    if (d.nx < 4 || d.ny < 4 || d.nz < 4) break;
    fixed_pyr.push_back(downsample(fixed_pyr.back()));
    moving_pyr.push_back(downsample(moving_pyr.back()));
  }

  RegistrationReport report;
  DisplacementField field(fixed_pyr.back().dims());
  for (int level = static_cast<int>(fixed_pyr.size()) - 1; level >= 0; --level) {
    const Volume& f = fixed_pyr[level];
    const Volume& m = moving_pyr[level];
    if (!(field.dims() == f.dims())) field = upsample_field(field, f.dims());
    const PairBinning binning = pair_binning(f, m, cfg);

    Adam adam(field.size(), cfg);
    double best = std::numeric_limits<double>::infinity();
    DisplacementField best_field = field;
    for (int it = 0; it < cfg.iters_per_level; ++it) {
      const LossEval eval = total_loss(f, m, field, cfg, binning);
      if (!std::isfinite(eval.terms.total)) {
        throw Error("register: non-finite loss at level " + std::to_string(level) +
                    ", iteration " + std::to_string(it));
      }
      report.loss_history.push_back(eval.terms);
      if (eval.terms.total < best) {
        best = eval.terms.total;
        best_field = field;
      }
      adam.step(field, eval.grad);
    }
    // Each level hands on its best iterate, so a level never ends worse than
    // it started.
    field = std::move(best_field);
  }

  report.final_field = std::move(field);
  report.metrics = metrics::field_metrics(report.final_field);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

void RegistrationConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be >= 0");
  if (levels < 1) throw Error("levels must be >= 1");
  if (iters_per_level < 1) throw Error("iterations must be >= 1");
  if (!(step_size > 0.0)) throw Error("step size must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("Adam betas must lie in [0, 1)");
  }
  if (bins < 2) throw Error("bins must be >= 2");
  if (!(bandwidth_scale > 0.0)) throw Error("bandwidth scale must be > 0");
}

PairBinning pair_binning(const Volume& fixed, const Volume& moving, const RegistrationConfig& cfg) {
  return {parzen::default_config(fixed, cfg.bins, cfg.bandwidth_scale),
          parzen::default_config(moving, cfg.bins, cfg.bandwidth_scale)};
}

LossEval total_loss(const Volume& fixed, const Volume& moving, const DisplacementField& field,
                    const RegistrationConfig& cfg, const PairBinning& binning) {
  require_same_dims(fixed.dims(), field.dims(), "total_loss");
  const WarpEval we = warp(moving, field);
  const SimilarityEval sim =
      similarity_loss(cfg.metric, fixed, we.warped, binning.fixed, binning.moving);
  const RegularizerEval reg = diffusion_reg(field);

  LossEval out{{}, chain_to_field(sim.grad_wrt_second, we)};
  out.terms.similarity = sim.value;
  out.terms.regularizer = cfg.lambda * reg.value;
  out.terms.total = out.terms.similarity + out.terms.regularizer;
  for (std::size_t i = 0; i < out.grad.size(); ++i) {
    for (int c = 0; c < 3; ++c) out.grad[i][c] += cfg.lambda * reg.grad[i][c];
  }
  return out;
}

LossEval total_loss(const Volume& fixed, const Volume& moving, const DisplacementField& field,
                    const RegistrationConfig& cfg) {
  return total_loss(fixed, moving, field, cfg, pair_binning(fixed, moving, cfg));
}

RegistrationReport register_images(const Volume& fixed, const Volume& moving,
                                   const RegistrationConfig& cfg) {
  return run(fixed, moving, cfg);
}

RegistrationReport register_images(const Volume& fixed, const Volume& moving,
                                   const RegistrationConfig& cfg, const LabelVolume& fixed_labels,
                                   const LabelVolume& moving_labels) {
  RegistrationReport report = run(fixed, moving, cfg);
  report.metrics = metrics::evaluate(report.final_field, fixed_labels, moving_labels);
  return report;
}

}  // namespace crreg
