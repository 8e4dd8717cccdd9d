#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cli.hpp"
#include "expjump/errors.hpp"

namespace {

using expjump::cli::json;
using expjump::cli::Manifest;

struct Common {
  std::string config;
  std::optional<double> lambda;
  std::uint64_t seed = 1;
  std::string output;
};

void add_common(CLI::App* app, Common& c, bool needs_config) {
  auto* opt = app->add_option("--config", c.config, "environment JSON file");
  if (needs_config) opt->required();
  app->add_option("--lambda", c.lambda, "override lambda from the config");
  app->add_option("--seed", c.seed, "master seed");
  app->add_option("--output", c.output, "output prefix for <prefix>.csv and <prefix>.json");
}

Manifest base_manifest(const std::string& command, const Common& c) {
  Manifest m;
  m.command = command;
  if (!c.config.empty()) m.environment = expjump::cli::load_json_file(c.config);
  if (c.lambda) m.environment["lambda"] = *c.lambda;
  m.master_seed = c.seed;
  m.output_path = c.output;
  return m;
}

template <class T>
void put(json& o, const char* key, const std::optional<T>& v) {
  if (v) o[key] = *v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential jump model toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", expjump::cli::version());

  Common common;
  Manifest manifest;

  // run --manifest
  std::string manifest_path, output_override;
  auto* run = app.add_subcommand("run", "run a JSON experiment manifest");
  run->add_option("--manifest", manifest_path, "manifest file")->required();
  run->add_option("--output", output_override, "override the manifest output prefix");

  // limit-shape
  double ls_tau = 0;
  std::optional<double> ls_xmin, ls_xmax;
  std::optional<int> ls_points;
  auto* ls = app.add_subcommand("limit-shape", "limit shape, phases and dispersion on an x grid");
  add_common(ls, common, true);
  ls->add_option("--tau", ls_tau)->required();
  ls->add_option("--x-min", ls_xmin);
  ls->add_option("--x-max", ls_xmax);
  ls->add_option("--points", ls_points);

  // simulate
  double sim_tau = 0;
  int sim_trials = 1;
  std::vector<double> sim_xs;
  bool sim_snapshot = false;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo heights of the exponential model");
  add_common(sim, common, true);
  sim->add_option("--tau", sim_tau)->required();
  sim->add_option("--trials", sim_trials);
  sim->add_option("--record-heights", sim_xs)->delimiter(',')->required();
  sim->add_flag("--snapshot", sim_snapshot, "dump the final configuration of trial 0");

  // stationary
  double st_c = 0;
  std::optional<double> st_xi, st_len, st_t;
  std::optional<int> st_seeds;
  auto* st = app.add_subcommand("stationary", "stationarity check on a ring");
  add_common(st, common, true);
  st->add_option("--c", st_c)->required();
  st->add_option("--xi", st_xi);
  st->add_option("--length", st_len);
  st->add_option("--t-end", st_t);
  st->add_option("--seeds", st_seeds);

  // dist
  std::string d_law;
  double d_r = 0;
  std::optional<int> d_m, d_samples;
  std::vector<double> d_b;
  auto* dist = app.add_subcommand("dist", "evaluate F2, BBP or G_m");
  dist->add_option("--law", d_law)->required()->check(CLI::IsMember({"f2", "bbp", "gm"}));
  dist->add_option("--r", d_r)->required();
  dist->add_option("--m", d_m);
  dist->add_option("--b", d_b)->delimiter(',');
  dist->add_option("--samples", d_samples);
  dist->add_option("--seed", common.seed);

  // fredholm-check
  double fc_tau = 0, fc_x = 0;
  std::optional<double> fc_zeta, fc_a, fc_phi;
  std::optional<int> fc_trials;
  auto* fc = app.add_subcommand("fredholm-check", "Fredholm determinant against Monte Carlo");
  add_common(fc, common, true);
  fc->add_option("--tau", fc_tau)->required();
  fc->add_option("--x", fc_x)->required();
  fc->add_option("--zeta", fc_zeta);
  fc->add_option("--trials", fc_trials);
  fc->add_option("--a", fc_a);
  fc->add_option("--phi", fc_phi);

  // fluct
  double fl_tau = 0, fl_x = 0;
  std::optional<int> fl_trials;
  std::optional<double> fl_gate;
  auto* fl = app.add_subcommand("fluct", "fluctuation statistics against the limit law");
  add_common(fl, common, true);
  fl->add_option("--tau", fl_tau)->required();
  fl->add_option("--x", fl_x)->required();
  fl->add_option("--trials", fl_trials);
  fl->add_option("--ks-gate", fl_gate);

  // traffic-jam
  double tj_tau = 0, tj_sigma = 0;
  std::string tj_type;
  std::optional<double> tj_alpha, tj_p, tj_sigma1, tj_kappa, tj_delta;
  std::optional<int> tj_trials;
  auto* tj = app.add_subcommand("traffic-jam", "fluctuations on both sides of an inserted jam");
  add_common(tj, common, true);
  tj->add_option("--tau", tj_tau)->required();
  tj->add_option("--scenario", tj_type)->required()->check(CLI::IsMember({"roadblock", "slowdown"}));
  tj->add_option("--sigma", tj_sigma)->required();
  tj->add_option("--alpha", tj_alpha);
  tj->add_option("--p", tj_p);
  tj->add_option("--sigma1", tj_sigma1);
  tj->add_option("--kappa", tj_kappa);
  tj->add_option("--delta", tj_delta);
  tj->add_option("--trials", tj_trials);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      manifest = expjump::cli::parse_manifest(expjump::cli::load_json_file(manifest_path));
      if (!output_override.empty()) manifest.output_path = output_override;
    } else if (ls->parsed()) {
      manifest = base_manifest("limit-shape", common);
      manifest.options["tau"] = ls_tau;
      put(manifest.options, "x_min", ls_xmin);
      put(manifest.options, "x_max", ls_xmax);
      put(manifest.options, "points", ls_points);
    } else if (sim->parsed()) {
      manifest = base_manifest("simulate", common);
      manifest.options = {{"tau", sim_tau}, {"trials", sim_trials}, {"record_heights", sim_xs},
                          {"snapshot", sim_snapshot}};
    } else if (st->parsed()) {
      manifest = base_manifest("stationary", common);
      manifest.options["c"] = st_c;
      put(manifest.options, "xi", st_xi);
      put(manifest.options, "length", st_len);
      put(manifest.options, "t_end", st_t);
      put(manifest.options, "seeds", st_seeds);
    } else if (dist->parsed()) {
      manifest.command = "dist";
      manifest.master_seed = common.seed;
      manifest.options = {{"law", d_law}, {"r", d_r}};
      put(manifest.options, "m", d_m);
      put(manifest.options, "samples", d_samples);
      if (!d_b.empty()) manifest.options["b"] = d_b;
    } else if (fc->parsed()) {
      manifest = base_manifest("fredholm-check", common);
      manifest.options = {{"tau", fc_tau}, {"x", fc_x}};
      put(manifest.options, "zeta", fc_zeta);
      put(manifest.options, "trials", fc_trials);
      put(manifest.options, "a", fc_a);
      put(manifest.options, "phi", fc_phi);
    } else if (fl->parsed()) {
      manifest = base_manifest("fluct", common);
      manifest.options = {{"tau", fl_tau}, {"x", fl_x}};
      put(manifest.options, "trials", fl_trials);
      put(manifest.options, "ks_gate", fl_gate);
    } else if (tj->parsed()) {
      manifest = base_manifest("traffic-jam", common);
      json sc{{"type", tj_type}, {"sigma", tj_sigma}};
      if (tj_type == "roadblock") {
        put(sc, "alpha", tj_alpha);
        put(sc, "p", tj_p);
      } else {
        put(sc, "sigma1", tj_sigma1);
        put(sc, "kappa", tj_kappa);
      }
      manifest.options = {{"tau", tj_tau}, {"scenario", sc}};
      put(manifest.options, "trials", tj_trials);
      put(manifest.options, "delta", tj_delta);
    }
    return expjump::cli::run(manifest, std::cout);
  } catch (const expjump::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return expjump::cli::kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return expjump::cli::kExitError;
  }
}
