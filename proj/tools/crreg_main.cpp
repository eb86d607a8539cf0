// Command-line front end: phantom synthesis, registration, landscape and
// lambda sweeps, metric evaluation and similarity timing.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "crreg/experiments.hpp"
#include "crreg/io.hpp"
#include "crreg/phantom.hpp"
#include "crreg/registration.hpp"
#include "crreg/report.hpp"
#include "crreg/similarity.hpp"
#include "crreg/transform.hpp"

namespace fs = std::filesystem;
using namespace crreg;

namespace {

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  return out;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw Error("cannot parse '" + item + "' as a number");
    }
    if (used != item.size()) throw Error("cannot parse '" + item + "' as a number");
    out.push_back(v);
  }
  if (out.empty()) throw Error("empty list");
  return out;
}

struct RegisterArgs {
  std::string metric = "cr";
  RegistrationConfig cfg;
};

void add_register_options(CLI::App* cmd, RegisterArgs& a, bool with_lambda) {
  cmd->add_option("--metric", a.metric, "Similarity measure")
      ->check(CLI::IsMember({"cr", "mi"}));
  if (with_lambda) cmd->add_option("--lambda", a.cfg.lambda, "Regularization weight");
  cmd->add_option("--bins", a.cfg.bins, "Parzen bins");
  cmd->add_option("--bandwidth-scale", a.cfg.bandwidth_scale, "Kernel width in bin widths");
  cmd->add_option("--levels", a.cfg.levels, "Pyramid levels");
  cmd->add_option("--iters", a.cfg.iters_per_level, "Iterations per level");
  cmd->add_option("--step", a.cfg.step_size, "Adam step size (voxels)");
  cmd->add_option("--seed", a.cfg.seed, "Random seed");
}

RegistrationConfig finish(RegisterArgs& a) {
  a.cfg.metric = parse_metric(a.metric);
  a.cfg.validate();
  return a.cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Correlation-ratio deformable registration toolkit"};
  app.require_subcommand(1);

  // synth
  std::vector<std::size_t> synth_dims{48};
  PhantomSpec phantom;
  std::string remap = "quadratic";
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-modal phantom pair");
  synth->add_option("--dims", synth_dims, "Grid size: one value (cube) or three")
      ->expected(1, 3);
  synth->add_option("--seed", phantom.seed, "Random seed");
  synth->add_option("--amplitude", phantom.deformation_amplitude, "Max displacement (voxels)");
  synth->add_option("--sigma", phantom.deformation_smoothness, "Deformation smoothing sigma");
  synth->add_option("--remap", remap, "Intensity mapping of the moving image")
      ->check(CLI::IsMember({"quadratic", "inverted", "sinus"}));
  synth->add_option("--out-dir", synth_out, "Output directory")->required();

  // register
  RegisterArgs reg_args;
  std::string reg_fixed, reg_moving, reg_field, reg_report, reg_lf, reg_lm;
  auto* reg = app.add_subcommand("register", "Deformably register moving onto fixed");
  reg->add_option("--fixed", reg_fixed)->required();
  reg->add_option("--moving", reg_moving)->required();
  add_register_options(reg, reg_args, true);
  reg->add_option("--out-field", reg_field, "Displacement field (.mhd)")->required();
  reg->add_option("--out-report", reg_report, "Report (JSON)")->required();
  reg->add_option("--labels-fixed", reg_lf, "Fixed labels for Dice (optional)");
  reg->add_option("--labels-moving", reg_lm, "Moving labels for Dice (optional)");

  // landscape
  RegisterArgs land_args;
  std::string land_fixed, land_moving, land_axis = "tx", land_csv;
  double land_range = 10.0;
  int land_steps = 21;
  auto* land = app.add_subcommand("landscape", "Similarity versus one affine parameter");
  land->add_option("--fixed", land_fixed)->required();
  land->add_option("--moving", land_moving)->required();
  land->add_option("--metric", land_args.metric)->check(CLI::IsMember({"cr", "mi"}));
  land->add_option("--bins", land_args.cfg.bins);
  land->add_option("--bandwidth-scale", land_args.cfg.bandwidth_scale);
  land->add_option("--axis", land_axis)
      ->check(CLI::IsMember({"tx", "ty", "tz", "rx", "ry", "rz"}));
  land->add_option("--range", land_range, "Half-width (voxels or degrees)");
  land->add_option("--steps", land_steps, "Number of samples");
  land->add_option("--out-csv", land_csv)->required();

  // sweep
  RegisterArgs sweep_args;
  std::string sw_fixed, sw_moving, sw_lf, sw_lm, sw_lambdas, sw_csv;
  auto* sweep = app.add_subcommand("sweep", "Register once per lambda and tabulate metrics");
  sweep->add_option("--fixed", sw_fixed)->required();
  sweep->add_option("--moving", sw_moving)->required();
  sweep->add_option("--labels-fixed", sw_lf)->required();
  sweep->add_option("--labels-moving", sw_lm)->required();
  add_register_options(sweep, sweep_args, false);
  sweep->add_option("--lambdas", sw_lambdas, "Comma-separated list (default grid if omitted)");
  sweep->add_option("--out-csv", sw_csv)->required();

  // metrics
  std::string met_field, met_lf, met_lm, met_json;
  auto* met = app.add_subcommand("metrics", "Dice, Jacobian and NDV of a field");
  met->add_option("--field", met_field)->required();
  met->add_option("--labels-fixed", met_lf)->required();
  met->add_option("--labels-moving", met_lm)->required();
  met->add_option("--out-json", met_json)->required();

  // time
  RegisterArgs time_args;
  std::string tm_fixed, tm_moving;
  int tm_repeats = 100;
  auto* tm = app.add_subcommand("time", "Mean wall time of one loss + gradient evaluation");
  tm->add_option("--fixed", tm_fixed)->required();
  tm->add_option("--moving", tm_moving)->required();
  tm->add_option("--metric", time_args.metric)->check(CLI::IsMember({"cr", "mi"}));
  tm->add_option("--bins", time_args.cfg.bins);
  tm->add_option("--bandwidth-scale", time_args.cfg.bandwidth_scale);
  tm->add_option("--repeats", tm_repeats)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) {
      if (synth_dims.size() == 1) {
        phantom.dims = {synth_dims[0], synth_dims[0], synth_dims[0]};
      } else if (synth_dims.size() == 3) {
        phantom.dims = {synth_dims[0], synth_dims[1], synth_dims[2]};
      } else {
        throw Error("--dims takes one or three values");
      }
      phantom.remap = parse_remap(remap);
      const Phantom p = make_phantom(phantom);
      const fs::path dir(synth_out);
      fs::create_directories(dir);
      io::save_volume(p.fixed, dir / "fixed.mhd");
      io::save_volume(p.moving, dir / "moving.mhd");
      io::save_field(p.truth, dir / "truth_field.mhd");
      io::save_labels(p.labels_fixed, dir / "labels_fixed.mhd");
      io::save_labels(p.labels_moving, dir / "labels_moving.mhd");
    } else if (*reg) {
      const RegistrationConfig cfg = finish(reg_args);
      const Volume fixed = io::load_volume(reg_fixed);
      const Volume moving = io::load_volume(reg_moving);
      if (reg_lf.empty() != reg_lm.empty()) {
        throw Error("--labels-fixed and --labels-moving must be given together");
      }
      const RegistrationReport rep =
          reg_lf.empty() ? register_images(fixed, moving, cfg)
                         : register_images(fixed, moving, cfg, io::load_labels(reg_lf),
                                           io::load_labels(reg_lm));
      const fs::path field_path(reg_field);
      if (field_path.has_parent_path()) fs::create_directories(field_path.parent_path());
      io::save_field(rep.final_field, field_path);
      open_output(reg_report) << to_json(rep, cfg).dump(2) << '\n';
      std::cerr << "registered in " << rep.wall_seconds << " s\n";
    } else if (*land) {
      const RegistrationConfig cfg = finish(land_args);
      const Volume fixed = io::load_volume(land_fixed);
      const Volume moving = io::load_volume(land_moving);
      const SweepAxis axis = parse_axis(land_axis);
      const auto rows = landscape(fixed, moving, cfg, axis, land_range, land_steps);
      auto out = open_output(land_csv);
      write_landscape_csv(out, axis, rows);
    } else if (*sweep) {
      const RegistrationConfig cfg = finish(sweep_args);
      const std::vector<double> lambdas =
          sw_lambdas.empty() ? default_lambda_grid(cfg.metric) : parse_list(sw_lambdas);
      const auto rows =
          lambda_sweep(io::load_volume(sw_fixed), io::load_volume(sw_moving),
                       io::load_labels(sw_lf), io::load_labels(sw_lm), cfg, lambdas);
      auto out = open_output(sw_csv);
      write_sweep_csv(out, rows);
    } else if (*met) {
      const DisplacementField field = io::load_field(met_field);
      const auto report =
          metrics::evaluate(field, io::load_labels(met_lf), io::load_labels(met_lm));
      open_output(met_json) << to_json(report).dump(2) << '\n';
    } else if (*tm) {
      const RegistrationConfig cfg = finish(time_args);
      const Volume fixed = io::load_volume(tm_fixed);
      const Volume moving = io::load_volume(tm_moving);
      const PairBinning binning = pair_binning(fixed, moving, cfg);
      const TimedEval t =
          eval_timed(cfg.metric, fixed, moving, binning.fixed, binning.moving, tm_repeats);
      nlohmann::ordered_json j;
      j["metric"] = to_string(cfg.metric);
      j["value"] = t.eval.value;
      j["repeats"] = tm_repeats;
      j["mean_seconds"] = t.mean_seconds;
      std::cout << j.dump() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
