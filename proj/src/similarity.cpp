#include "crreg/similarity.hpp"

#include <chrono>
#include <cmath>
#include <span>

namespace crreg {
namespace {

using parzen::kEpsilon;
using parzen::ParzenConfig;

/// Variance threshold below which an image counts as constant.
constexpr double kDegenerateVariance = 1e-12;
/// Joint-probability cells below this contribute nothing to MI.
constexpr double kMinProbability = 1e-12;

// Streams row-normalized Parzen weights of one image voxel by voxel and
// pushes a per-(voxel, bin) sensitivity back to the voxel intensity. Rows are
// recomputed on each pass instead of stored, which keeps memory at O(B).
//
// With a_k = w_k / (sum_m w_m + eps * w_near) and w_k' = -(x - c_k) / h^2 * w_k:
//   da_k/dx = -(slope / h^2) * a_k * (offset - c_k),
//   offset  = c_near (1 - sum_m a_m) + sum_m a_m c_m,
// where c_near is the center nearest to x.
class SoftBins {
 public:
  SoftBins(std::span<const double> x, const ParzenConfig& cfg)
      : x_(x), cfg_(cfg), centers_(cfg.centers()),
        inv_h2_(1.0 / (cfg.bandwidth() * cfg.bandwidth())) {}

  std::size_t bins() const { return centers_.size(); }
  std::size_t size() const { return x_.size(); }
  std::span<const double> values() const { return x_; }

  void row(std::size_t j, std::span<double> a) const { parzen::responsibility_row(x_[j], cfg_, a); }

  // Fills row j and returns the offset of the derivative formula.
  double row_with_offset(std::size_t j, std::span<double> a) const {
    const double mass = parzen::responsibility_row(x_[j], cfg_, a);
    double center = 0.0;
    std::size_t near = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      center += a[k] * centers_[k];
      if (a[k] > a[near]) near = k;
    }
    return centers_[near] * (1.0 - mass) + center;
  }

  double slope(std::size_t j) const { return cfg_.clamp_slope(x_[j]); }

  // d/dx_j of sum_k sens_k a_jk.
  double intensity_gradient(std::size_t j, std::span<const double> a, double offset,
                            const double* sens) const {
    const double s = slope(j);
    if (s == 0.0) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) acc += sens[k] * a[k] * (offset - centers_[k]);
    return -s * inv_h2_ * acc;
  }

 private:
  std::span<const double> x_;
  const ParzenConfig& cfg_;
  std::span<const double> centers_;
  double inv_h2_;
};

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += e;
  return s / static_cast<double>(v.size());
}

double variance_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double e : v) s += (e - mean) * (e - mean);
  return s / static_cast<double>(v.size());
}

// Conditional statistics plus the intermediate sums the gradient needs.
struct CrTerms {
  CondStats stats;
  std::vector<double> mass_guarded;  // sum_i a_ik + eps
  double total_guarded = 0.0;        // sum_k sum_i a_ik + eps
};

CrTerms cr_terms(const SoftBins& sx, std::span<const double> y) {
  const std::size_t bins = sx.bins();
  CrTerms t;
  CondStats& s = t.stats;
  s.mean_x = mean_of(sx.values());
  s.var_x = variance_of(sx.values(), s.mean_x);
  s.mean_y = mean_of(y);
  s.var_y = variance_of(y, s.mean_y);

  std::vector<double> a(bins);
  std::vector<double> mass(bins, 0.0);
  std::vector<double> weighted(bins, 0.0);
  for (std::size_t i = 0; i < y.size(); ++i) {
    sx.row(i, a);
    for (std::size_t k = 0; k < bins; ++k) {
      mass[k] += a[k];
      weighted[k] += a[k] * y[i];
    }
  }

  double total = 0.0;
  for (double c : mass) total += c;
  t.total_guarded = total + kEpsilon;
  t.mass_guarded.resize(bins);
  s.bin_means.resize(bins);
  s.bin_weights.resize(bins);
  s.var_between = 0.0;
  for (std::size_t k = 0; k < bins; ++k) {
    t.mass_guarded[k] = mass[k] + kEpsilon;
    s.bin_means[k] = weighted[k] / t.mass_guarded[k];
    s.bin_weights[k] = mass[k] / t.total_guarded;
    const double e = s.bin_means[k] - s.mean_y;
    s.var_between += s.bin_weights[k] * e * e;
  }
  return t;
}

// Adds scale * d eta(Y|X) / dx and / dy into grad_x and grad_y when non-empty.
double cr_direction(const SoftBins& sx, std::span<const double> y, double scale,
                    std::span<double> grad_x, std::span<double> grad_y, bool& degenerate) {
  const CrTerms t = cr_terms(sx, y);
  const CondStats& s = t.stats;
  if (s.var_y <= kDegenerateVariance) {
    degenerate = true;
    return 0.0;
  }
  const double denom = s.var_y + kEpsilon;
  const double eta = s.var_between / denom;
  if (grad_x.empty() && grad_y.empty()) return eta;

  const std::size_t n = y.size();
  const std::size_t bins = s.bin_means.size();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> dev(bins);     // ybar_k - ybar
  std::vector<double> coeff(bins);   // 2 n_k dev_k / W_k
  std::vector<double> base(bins);    // (dev_k^2 - V_B) / (T + eps)
  double dev_mass = 0.0;             // sum_k n_k dev_k
  for (std::size_t k = 0; k < bins; ++k) {
    dev[k] = s.bin_means[k] - s.mean_y;
    coeff[k] = 2.0 * s.bin_weights[k] * dev[k] / t.mass_guarded[k];
    base[k] = (dev[k] * dev[k] - s.var_between) / t.total_guarded;
    dev_mass += s.bin_weights[k] * dev[k];
  }

  const double g = scale / denom;
  std::vector<double> a(bins);
  std::vector<double> sens(bins);
  for (std::size_t j = 0; j < n; ++j) {
    const bool want_x = !grad_x.empty() && sx.slope(j) != 0.0;
    if (!want_x && grad_y.empty()) continue;
    double offset = 0.0;
    if (want_x) {
      offset = sx.row_with_offset(j, a);
    } else {
      sx.row(j, a);
    }
    if (!grad_y.empty()) {
      double acc = 0.0;
      for (std::size_t k = 0; k < bins; ++k) acc += coeff[k] * a[k];
      const double d_between = acc - 2.0 * inv_n * dev_mass;
      const double d_var = 2.0 * inv_n * (y[j] - s.mean_y);
      grad_y[j] += g * (d_between - eta * d_var);
    }
    if (want_x) {
      for (std::size_t k = 0; k < bins; ++k) sens[k] = base[k] + coeff[k] * (y[j] - s.bin_means[k]);
      grad_x[j] += g * sx.intensity_gradient(j, a, offset, sens.data());
    }
  }
  return eta;
}

double mi_core(const SoftBins& sx, const SoftBins& sy, std::span<double> grad_x,
               std::span<double> grad_y, double scale) {
  const std::size_t n = sx.size();
  const std::size_t bx = sx.bins();
  const std::size_t by = sy.bins();
  std::vector<double> a(bx);
  std::vector<double> b(by);

  std::vector<double> joint(bx * by, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sx.row(i, a);
    sy.row(i, b);
    for (std::size_t k = 0; k < bx; ++k) {
      const double ak = a[k];
      double* row = joint.data() + k * by;
      for (std::size_t l = 0; l < by; ++l) row[l] += ak * b[l];
    }
  }

  double z = 0.0;
  for (double& v : joint) {
    v += kEpsilon;
    z += v;
  }
  std::vector<double> p(bx * by);
  std::vector<double> px(bx, 0.0);
  std::vector<double> py(by, 0.0);
  for (std::size_t k = 0; k < bx; ++k) {
    for (std::size_t l = 0; l < by; ++l) {
      const double v = joint[k * by + l] / z;
      p[k * by + l] = v;
      px[k] += v;
      py[l] += v;
    }
  }

  double mi = 0.0;
  for (std::size_t k = 0; k < bx; ++k) {
    for (std::size_t l = 0; l < by; ++l) {
      const double v = p[k * by + l];
      if (v < kMinProbability) continue;
      mi += v * (std::log(v) - std::log(px[k]) - std::log(py[l]));
    }
  }
  if (grad_x.empty() && grad_y.empty()) return mi;

  // dMI/dP with the marginals expressed through P.
  std::vector<double> row_share(bx, 0.0);
  std::vector<double> col_share(by, 0.0);
  for (std::size_t k = 0; k < bx; ++k) {
    for (std::size_t l = 0; l < by; ++l) {
      const double v = p[k * by + l];
      if (v < kMinProbability) continue;
      row_share[k] += v / px[k];
      col_share[l] += v / py[l];
    }
  }
  std::vector<double> dp(bx * by);
  double dp_mean = 0.0;
  for (std::size_t k = 0; k < bx; ++k) {
    for (std::size_t l = 0; l < by; ++l) {
      const double v = p[k * by + l];
      double d = -row_share[k] - col_share[l];
      if (v >= kMinProbability) d += std::log(v) - std::log(px[k]) - std::log(py[l]) + 1.0;
      dp[k * by + l] = d;
      dp_mean += d * v;
    }
  }
  // Through the normalization P = (J + eps) / Z.
  std::vector<double> dj(bx * by);
  for (std::size_t c = 0; c < dj.size(); ++c) dj[c] = scale * (dp[c] - dp_mean) / z;

  std::vector<double> sens_x(bx);
  std::vector<double> sens_y(by);
  for (std::size_t j = 0; j < n; ++j) {
    const bool want_x = !grad_x.empty() && sx.slope(j) != 0.0;
    const bool want_y = !grad_y.empty() && sy.slope(j) != 0.0;
    if (!want_x && !want_y) continue;
    const double offset_x = sx.row_with_offset(j, a);
    const double offset_y = sy.row_with_offset(j, b);
    std::fill(sens_y.begin(), sens_y.end(), 0.0);
    for (std::size_t k = 0; k < bx; ++k) {
      const double* row = dj.data() + k * by;
      double acc = 0.0;
      const double ak = a[k];
      for (std::size_t l = 0; l < by; ++l) {
        acc += row[l] * b[l];
        sens_y[l] += row[l] * ak;
      }
      sens_x[k] = acc;
    }
    if (want_x) grad_x[j] += sx.intensity_gradient(j, a, offset_x, sens_x.data());
    if (want_y) grad_y[j] += sy.intensity_gradient(j, b, offset_y, sens_y.data());
  }
  return mi;
}

SimilarityEval make_eval(const Volume& a, bool with_gradients) {
  SimilarityEval e;
  if (with_gradients) {
    e.grad_wrt_first.assign(a.size(), 0.0);
    e.grad_wrt_second.assign(a.size(), 0.0);
  }
  return e;
}

SimilarityEval cr_loss_impl(const Volume& fixed, const Volume& warped,
                            const ParzenConfig& cfg_fixed, const ParzenConfig& cfg_warped,
                            bool with_gradients) {
  require_same_dims(fixed.dims(), warped.dims(), "cr_loss");
  SimilarityEval e = make_eval(fixed, with_gradients);
  bool degenerate = false;
  const auto f = std::span<const double>(fixed.data());
  const auto w = std::span<const double>(warped.data());

  double eta_fw = 0.0;
  {
    const SoftBins bins_w(w, cfg_warped);
    eta_fw = cr_direction(bins_w, f, -0.5, e.grad_wrt_second, e.grad_wrt_first, degenerate);
  }
  double eta_wf = 0.0;
  {
    const SoftBins bins_f(f, cfg_fixed);
    eta_wf = cr_direction(bins_f, w, -0.5, e.grad_wrt_first, e.grad_wrt_second, degenerate);
  }
  if (degenerate) {
    // A constant image makes at least one direction undefined; report the
    // whole loss as degenerate rather than half a ratio.
    e.value = 0.0;
    std::fill(e.grad_wrt_first.begin(), e.grad_wrt_first.end(), 0.0);
    std::fill(e.grad_wrt_second.begin(), e.grad_wrt_second.end(), 0.0);
    e.degenerate = true;
    return e;
  }
  e.value = -0.5 * (eta_fw + eta_wf);
  return e;
}

SimilarityEval mi_impl(const Volume& x, const Volume& y, const ParzenConfig& cfg_x,
                       const ParzenConfig& cfg_y, double scale, bool with_gradients) {
  require_same_dims(x.dims(), y.dims(), "mutual_information");
  SimilarityEval e = make_eval(x, with_gradients);
  const SoftBins sx(x.data(), cfg_x);
  const SoftBins sy(y.data(), cfg_y);
  e.value = scale * mi_core(sx, sy, e.grad_wrt_first, e.grad_wrt_second, scale);
  return e;
}

}  // namespace

Metric parse_metric(const std::string& name) {
  if (name == "cr") return Metric::cr;
  if (name == "mi") return Metric::mi;
  throw Error("unknown metric '" + name + "' (expected cr or mi)");
}

std::string to_string(Metric m) { return m == Metric::cr ? "cr" : "mi"; }

CondStats cond_stats(const Volume& x, const Volume& y, const ParzenConfig& cfg) {
  require_same_dims(x.dims(), y.dims(), "cond_stats");
  const SoftBins sx(x.data(), cfg);
  return cr_terms(sx, y.data()).stats;
}

SimilarityEval correlation_ratio(const Volume& x, const Volume& y, const ParzenConfig& cfg) {
  require_same_dims(x.dims(), y.dims(), "correlation_ratio");
  SimilarityEval e = make_eval(x, true);
  const SoftBins sx(x.data(), cfg);
  bool degenerate = false;
  e.value = cr_direction(sx, y.data(), 1.0, e.grad_wrt_first, e.grad_wrt_second,
                         degenerate);
  e.degenerate = degenerate;
  return e;
}

SimilarityEval cr_loss(const Volume& fixed, const Volume& warped, const ParzenConfig& cfg_fixed,
                       const ParzenConfig& cfg_warped) {
  return cr_loss_impl(fixed, warped, cfg_fixed, cfg_warped, true);
}

SimilarityEval mutual_information(const Volume& x, const Volume& y, const ParzenConfig& cfg_x,
                                  const ParzenConfig& cfg_y) {
  return mi_impl(x, y, cfg_x, cfg_y, 1.0, true);
}

SimilarityEval mi_loss(const Volume& fixed, const Volume& warped, const ParzenConfig& cfg_fixed,
                       const ParzenConfig& cfg_warped) {
  return mi_impl(fixed, warped, cfg_fixed, cfg_warped, -1.0, true);
}

SimilarityEval similarity_loss(Metric metric, const Volume& fixed, const Volume& warped,
                               const ParzenConfig& cfg_fixed, const ParzenConfig& cfg_warped) {
  return metric == Metric::cr ? cr_loss(fixed, warped, cfg_fixed, cfg_warped)
                              : mi_loss(fixed, warped, cfg_fixed, cfg_warped);
}

double similarity_loss_value(Metric metric, const Volume& fixed, const Volume& warped,
                             const ParzenConfig& cfg_fixed, const ParzenConfig& cfg_warped) {
  return metric == Metric::cr
             ? cr_loss_impl(fixed, warped, cfg_fixed, cfg_warped, false).value
             : mi_impl(fixed, warped, cfg_fixed, cfg_warped, -1.0, false).value;
}

TimedEval eval_timed(Metric metric, const Volume& fixed, const Volume& warped,
                     const ParzenConfig& cfg_fixed, const ParzenConfig& cfg_warped,
                     int repeats) {
  if (repeats < 1) throw Error("eval_timed: repeats must be >= 1");
  TimedEval out;
  out.eval = similarity_loss(metric, fixed, warped, cfg_fixed, cfg_warped);
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  for (int r = 0; r < repeats; ++r) {
    out.eval = similarity_loss(metric, fixed, warped, cfg_fixed, cfg_warped);
  }
  const std::chrono::duration<double> elapsed = clock::now() - start;
  out.mean_seconds = elapsed.count() / repeats;
  return out;
}

}  // namespace crreg
