#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "expjump/distributions.hpp"
#include "expjump/errors.hpp"
#include "expjump/experiments.hpp"
#include "expjump/fredholm.hpp"
#include "expjump/limitshape.hpp"
#include "expjump/rng.hpp"
#include "expjump/simulator.hpp"
#include "expjump/stationary.hpp"

#ifndef EXPJUMP_VERSION
#define EXPJUMP_VERSION "0.0.0"
#endif

namespace expjump::cli {

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("expected a JSON object", path);
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "'", path);
  }
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError("missing required key", join(path, key));
  return *it;
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("expected a number", where);
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& where) {
  if (!v.is_number_integer()) throw ConfigError("expected an integer", where);
  return v.get<std::int64_t>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError("expected an array of numbers", where);
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(as_number(v[i], where + "[" + std::to_string(i) + "]"));
  }
  return out;
}

double num(const json& obj, const std::string& key, const std::string& path) {
  return as_number(require(obj, key, path), join(path, key));
}

double num_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  return obj.contains(key) ? as_number(obj.at(key), join(path, key)) : fallback;
}

int int_or(const json& obj, const std::string& key, int fallback, const std::string& path) {
  if (!obj.contains(key)) return fallback;
  const auto v = as_integer(obj.at(key), join(path, key));
  if (v < 0 || v > std::numeric_limits<int>::max()) throw ConfigError("out of range", join(path, key));
  return static_cast<int>(v);
}

// Wraps library argument errors so that they report the offending section.
template <class F>
auto with_context(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), where);
  }
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

const std::set<std::string> kEnvKeys{"q",        "lambda",   "xi0",       "breakpoints",
                                     "segment_values", "roadblocks", "band_min", "band_max"};

ModelParams parse_params(const json& doc) {
  check_keys(doc, kEnvKeys, "environment");
  return with_context("environment", [&] {
    return ModelParams(num(doc, "q", "environment"), num(doc, "lambda", "environment"));
  });
}

struct Output {
  const Manifest& m;
  std::ostream& out;

  json header() const {
    return {{"version", version()}, {"manifest_hash", manifest_hash(m)}, {"manifest", m.to_json()}};
  }
  // CSV goes to <prefix>.csv or, without a prefix, to the stream.
  void csv(const std::string& text) const {
    if (m.output_path.empty()) {
      out << text;
      return;
    }
    write_file(m.output_path + ".csv", text);
  }
  void summary(const json& body, bool print_without_prefix) const {
    json j = header();
    j.update(body);
    if (m.output_path.empty()) {
      if (print_without_prefix) out << j.dump(2) << "\n";
      return;
    }
    write_file(m.output_path + ".json", j.dump(2) + "\n");
  }
  static void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file '" + path + "'", "output_path");
    f << text;
  }
};

int cmd_limit_shape(const Manifest& m, std::ostream& out) {
  const auto env = parse_environment(m.environment);
  const auto& o = m.options;
  check_keys(o, {"tau", "x_min", "x_max", "points", "xs"}, "options");
  const double tau = num(o, "tau", "options");
  if (!(tau > 0.0)) throw ConfigError("must be positive", "options.tau");
  const QParam q = env.params.q;
  const double xe = limitshape::edge_x(tau, env.field, q);
  std::vector<double> xs;
  if (o.contains("xs")) {
    xs = as_number_list(o.at("xs"), "options.xs");
  } else {
    const double lo = num_or(o, "x_min", 1e-3, "options");
    const double hi = num_or(o, "x_max", 1.05 * xe, "options");
    const int n = int_or(o, "points", 200, "options");
    if (!(lo > 0.0 && hi > lo) || n < 2) throw ConfigError("need 0 < x_min < x_max and points >= 2", "options");
    for (int i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * i / (n - 1));
  }
  std::ostringstream csv;
  csv << "x,H,phase,m_x,omega_circ,W,dispersion,density,beta\n";
  std::vector<std::pair<double, std::string>> phases;
  for (double x : xs) {
    if (!(x > 0.0)) throw ConfigError("grid points must be positive", "options.xs");
    if (x >= xe) {
      csv << fmt(x) << ",0,Beyond,0,,,,0,\n";
      phases.emplace_back(x, "Beyond");
      continue;
    }
    const auto r = limitshape::classify(tau, x, env.field, env.rb, q);
    const std::string ph = limitshape::to_string(r.phase);
    csv << fmt(x) << ',' << fmt(r.H) << ',' << ph << ',' << r.m_x << ',' << fmt(r.omega_circ) << ','
        << fmt(r.W) << ',' << fmt(r.dispersion) << ',' << fmt(r.density) << ','
        << fmt(r.fluctuation_exponent) << "\n";
    phases.emplace_back(x, ph);
  }
  json changes = json::array();
  for (std::size_t i = 1; i < phases.size(); ++i) {
    if (phases[i].second == phases[i - 1].second) continue;
    json c{{"x_left", phases[i - 1].first}, {"x_right", phases[i].first},
           {"from", phases[i - 1].second}, {"to", phases[i].second}};
    if (phases[i].second != "Beyond" && phases[i - 1].second != "Beyond") {
      try {
        c["x_transition"] = limitshape::transition_point(tau, env.field, env.rb, q,
                                                         phases[i - 1].first, phases[i].first);
      } catch (const Error&) {
        c["x_transition"] = nullptr;
      }
    }
    changes.push_back(c);
  }
  Output io{m, out};
  io.csv(csv.str());
  io.summary({{"tau", tau}, {"x_edge", xe}, {"phase_changes", changes}}, false);
  return kExitOk;
}

int cmd_simulate(const Manifest& m, std::ostream& out) {
  const auto env = parse_environment(m.environment);
  const auto& o = m.options;
  check_keys(o, {"tau", "trials", "record_heights", "snapshot"}, "options");
  const double tau = num(o, "tau", "options");
  const int trials = int_or(o, "trials", 1, "options");
  const auto xs = as_number_list(require(o, "record_heights", "options"), "options.record_heights");
  const bool snapshot = o.value("snapshot", false);
  if (!(tau >= 0.0) || trials < 1) throw ConfigError("need tau >= 0 and trials >= 1", "options");
  const double t = tau * env.params.lambda;

  std::vector<std::vector<std::int64_t>> heights(static_cast<std::size_t>(trials));
  json snap = json::array();
  for (int i = 0; i < trials; ++i) {
    sim::ExpJumpSimulator s(env.field, env.rb, env.params, trial_seed(m.master_seed, i));
    s.run_until(t);
    for (double x : xs) heights[i].push_back(s.height(x));
    if (snapshot && i == 0) {
      for (const auto& st : s.config().stacks) snap.push_back({st.pos, st.count});
    }
  }
  std::ostringstream csv;
  csv << "trial,x,height,time\n";
  for (int i = 0; i < trials; ++i) {
    for (std::size_t j = 0; j < xs.size(); ++j) {
      csv << i << ',' << fmt(xs[j]) << ',' << heights[i][j] << ',' << fmt(t) << "\n";
    }
  }
  Output io{m, out};
  io.csv(csv.str());
  json body{{"time", t}, {"trials", trials}};
  if (snapshot) {
    if (m.output_path.empty()) {
      body["snapshot"] = snap;
    } else {
      Output::write_file(m.output_path + ".snapshot.json", snap.dump() + "\n");
    }
  }
  io.summary(body, false);
  return kExitOk;
}

int cmd_stationary(const Manifest& m, std::ostream& out) {
  const ModelParams p = parse_params(m.environment);
  const auto& o = m.options;
  check_keys(o, {"c", "xi", "length", "t_end", "seeds"}, "options");
  stationary::MarkedPoissonSpec spec{num(o, "c", "options"), p.lambda, num_or(o, "length", 20.0, "options")};
  const double xi = num_or(o, "xi", 1.0, "options");
  const double t_end = num_or(o, "t_end", 5.0, "options");
  const int seeds = int_or(o, "seeds", 50, "options");
  const auto rep = with_context("options", [&] {
    spec.validate();
    return stationary::ring_evolution(spec, xi, p.q, t_end, seeds, m.master_seed);
  });
  auto est = [](const stationary::Estimate& e) {
    return json{{"est", e.est}, {"se", e.se}, {"target", e.target}};
  };
  const bool density_ok = std::abs(rep.density.est - rep.density.target) <= 3.0 * rep.density.se;
  const bool current_ok = std::abs(rep.current.est - rep.current.target) <= 3.0 * rep.current.se;
  const bool marks_ok = std::abs(rep.mark_z) <= 3.0;
  const bool pass = density_ok && current_ok && marks_ok && rep.conserved;
  Output io{m, out};
  io.summary({{"density", est(rep.density)},
              {"current", est(rep.current)},
              {"mark_chi2", rep.mark_chi2},
              {"mark_dof", rep.mark_dof},
              {"mark_z", rep.mark_z},
              {"seeds", rep.seeds},
              {"conserved", rep.conserved},
              {"pass", pass}},
             true);
  return pass ? kExitOk : kExitGateFailed;
}

int cmd_dist(const Manifest& m, std::ostream& out) {
  const auto& o = m.options;
  check_keys(o, {"law", "r", "m", "b", "samples"}, "options");
  const auto& law_v = require(o, "law", "options");
  if (!law_v.is_string()) throw ConfigError("expected a string", "options.law");
  const std::string law = law_v.get<std::string>();
  const double r = num(o, "r", "options");
  json body{{"law", law}, {"r", r}};
  with_context("options", [&] {
    if (law == "f2") {
      body["value"] = dist::F2(r);
    } else if (law == "bbp") {
      const int mm = int_or(o, "m", 0, "options");
      std::vector<double> b(static_cast<std::size_t>(mm), 0.0);
      if (o.contains("b")) b = as_number_list(o.at("b"), "options.b");
      body["m"] = mm;
      body["b"] = b;
      body["value"] = dist::BBP(r, mm, b);
    } else if (law == "gm") {
      const int mm = int_or(o, "m", 1, "options");
      const auto v = dist::G_m(r, mm, int_or(o, "samples", 200000, "options"), m.master_seed);
      body["m"] = mm;
      body["value"] = v.value;
      body["se"] = v.se;
    } else {
      throw ConfigError("law must be one of f2, bbp, gm", "options.law");
    }
    return 0;
  });
  Output{m, out}.summary(body, true);
  return kExitOk;
}

int cmd_fredholm_check(const Manifest& m, std::ostream& out) {
  const auto env = parse_environment(m.environment);
  const auto& o = m.options;
  check_keys(o, {"tau", "x", "zeta", "trials", "a", "phi", "nodes_per_panel"}, "options");
  const double tau = num(o, "tau", "options");
  const double x = num(o, "x", "options");
  const double zeta = num_or(o, "zeta", -1.0, "options");
  const int trials = int_or(o, "trials", 100000, "options");
  const double t = tau * env.params.lambda;
  fredholm::ContourSpec c;
  const double W = with_context("options", [&] { return min_speed(env.field, env.rb, x).W; });
  c.a = num_or(o, "a", 0.5 * W, "options");
  c.phi = num_or(o, "phi", c.phi, "options");
  c.nodes_per_panel = int_or(o, "nodes_per_panel", c.nodes_per_panel, "options");
  if (!(zeta < 0.0)) throw ConfigError("the Monte Carlo check needs zeta < 0", "options.zeta");
  const auto det = with_context("options", [&] {
    return fredholm::qlaplace_det_report(fredholm::ZetaPoint(zeta), t, x, env.field, env.rb,
                                         env.params, c);
  });
  const auto mc = fredholm::mc_qlaplace(zeta, t, x, env.field, env.rb, env.params, trials,
                                        m.master_seed);
  const bool pass = std::abs(det.value.real() - mc.mean) <= 3.0 * mc.se + 0.01;
  Output{m, out}.summary({{"det", det.value.real()},
                          {"det_imag", det.value.imag()},
                          {"doubling_change", det.doubling_change},
                          {"mc_est", mc.mean},
                          {"mc_se", mc.se},
                          {"pass", pass}},
                         true);
  return pass ? kExitOk : kExitGateFailed;
}

int cmd_fluct(const Manifest& m, std::ostream& out) {
  const auto env = parse_environment(m.environment);
  const auto& o = m.options;
  check_keys(o, {"tau", "x", "trials", "ks_gate"}, "options");
  const double tau = num(o, "tau", "options");
  const double x = num(o, "x", "options");
  const int trials = int_or(o, "trials", 2000, "options");
  const auto [s, k] = with_context("options", [&] {
    return experiments::fluct_experiment(tau, x, env.field, env.rb, env.params, trials,
                                         m.master_seed);
  });
  std::ostringstream csv;
  csv << "trial,standardized\n";
  for (std::size_t i = 0; i < s.standardized.size(); ++i) csv << i << ',' << fmt(s.standardized[i]) << "\n";
  json body{{"tau", tau},
            {"x", x},
            {"lambda", env.params.lambda},
            {"phase", limitshape::to_string(s.report.phase)},
            {"m_x", s.report.m_x},
            {"H", s.report.H},
            {"beta", s.beta},
            {"scale", s.scale},
            {"ks", k.ks_distance},
            {"n", k.n},
            {"reference_law", k.reference_law}};
  bool pass = true;
  if (o.contains("ks_gate")) {
    const double gate = num(o, "ks_gate", "options");
    pass = k.ks_distance <= gate;
    body["gates"] = {{"ks_max", gate}, {"pass", pass}};
  }
  Output io{m, out};
  io.csv(csv.str());
  io.summary(body, false);
  return pass ? kExitOk : kExitGateFailed;
}

limitshape::JamScenario parse_scenario(const json& s) {
  const std::string path = "options.scenario";
  if (!s.is_object()) throw ConfigError("expected an object", path);
  const auto& type = require(s, "type", path);
  if (type == "roadblock") {
    check_keys(s, {"type", "sigma", "alpha", "p"}, path);
    return limitshape::RoadblockInsert{num(s, "sigma", path), num(s, "alpha", path), num(s, "p", path)};
  }
  if (type == "slowdown") {
    check_keys(s, {"type", "sigma", "sigma1", "kappa"}, path);
    const double s1 = s.contains("sigma1") && !s.at("sigma1").is_null() ? num(s, "sigma1", path)
                                                                         : INFINITY;
    return limitshape::Slowdown{num(s, "sigma", path), s1, num(s, "kappa", path)};
  }
  throw ConfigError("type must be 'roadblock' or 'slowdown'", path + ".type");
}

int cmd_traffic_jam(const Manifest& m, std::ostream& out) {
  const auto env = parse_environment(m.environment);
  const auto& o = m.options;
  check_keys(o, {"tau", "trials", "delta", "scenario"}, "options");
  const double tau = num(o, "tau", "options");
  const int trials = int_or(o, "trials", 1000, "options");
  const double delta = num_or(o, "delta", 0.02, "options");
  const auto scenario = parse_scenario(require(o, "scenario", "options"));
  const auto rep = with_context("options", [&] {
    return experiments::traffic_jam_experiment(tau, scenario, env.field, env.rb, env.params,
                                               trials, m.master_seed, delta);
  });
  std::ostringstream csv;
  csv << "side,x,H_base,H_modified,phase,beta,scale,ks,law,mean_height\n";
  for (const auto& s : rep.sides) {
    csv << s.side << ',' << fmt(s.x) << ',' << fmt(s.H_base) << ',' << fmt(s.H_modified) << ','
        << s.phase << ',' << fmt(s.beta) << ',' << fmt(s.scale) << ',' << fmt(s.ks) << ',' << s.law
        << ',' << fmt(s.mean_height) << "\n";
  }
  const bool pass = std::abs(rep.left_z) <= 3.0;
  Output io{m, out};
  io.csv(csv.str());
  io.summary({{"sigma", rep.sigma},
              {"delta", rep.delta},
              {"left_mean_base", rep.left_mean_base},
              {"left_mean_modified", rep.left_mean_modified},
              {"left_z", rep.left_z},
              {"pass", pass}},
             false);
  return pass ? kExitOk : kExitGateFailed;
}

}  // namespace

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": invalid JSON (" + e.what() + ")");
  }
}

json load_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_json(ss.str(), path);
}

Environment parse_environment(const json& doc) {
  const std::string path = "environment";
  if (doc.is_object() && doc.empty()) throw ConfigError("empty environment", path);
  check_keys(doc, kEnvKeys, path);
  const ModelParams params = parse_params(doc);
  const double xi0 = num(doc, "xi0", path);
  const auto br = as_number_list(require(doc, "breakpoints", path), path + ".breakpoints");
  const auto vals = as_number_list(require(doc, "segment_values", path), path + ".segment_values");
  std::optional<double> bmin, bmax;
  if (doc.contains("band_min")) bmin = num(doc, "band_min", path);
  if (doc.contains("band_max")) bmax = num(doc, "band_max", path);
  SpeedField field = with_context(path, [&] { return SpeedField(xi0, br, vals, bmin, bmax); });
  std::vector<Roadblock> rbs;
  if (doc.contains("roadblocks")) {
    const auto& arr = doc.at("roadblocks");
    if (!arr.is_array()) throw ConfigError("expected an array", path + ".roadblocks");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = path + ".roadblocks[" + std::to_string(i) + "]";
      check_keys(arr[i], {"b", "p", "xi_override"}, p);
      Roadblock r{num(arr[i], "b", p), num(arr[i], "p", p), std::nullopt};
      if (arr[i].contains("xi_override") && !arr[i].at("xi_override").is_null()) {
        r.xi_override = num(arr[i], "xi_override", p);
      }
      rbs.push_back(r);
    }
  }
  Roadblocks rb = with_context(path + ".roadblocks", [&] { return Roadblocks(rbs); });
  return {std::move(field), std::move(rb), params};
}

json Manifest::to_json() const {
  return {{"command", command},
          {"environment", environment},
          {"options", options},
          {"master_seed", master_seed},
          {"output_path", output_path}};
}

Manifest parse_manifest(const json& doc) {
  check_keys(doc, {"command", "environment", "options", "master_seed", "output_path"}, "");
  Manifest m;
  const auto& cmd = require(doc, "command", "");
  if (!cmd.is_string()) throw ConfigError("expected a string", "command");
  m.command = cmd.get<std::string>();
  static const std::set<std::string> commands{"limit-shape", "simulate", "stationary", "dist",
                                               "fredholm-check", "fluct", "traffic-jam"};
  if (!commands.count(m.command)) throw ConfigError("unknown command '" + m.command + "'", "command");
  if (doc.contains("environment")) m.environment = doc.at("environment");
  if (doc.contains("options")) m.options = doc.at("options");
  if (!m.options.is_object()) throw ConfigError("expected an object", "options");
  if (doc.contains("master_seed")) {
    const auto& s = doc.at("master_seed");
    if (!s.is_number_unsigned() && !s.is_number_integer()) throw ConfigError("expected an integer", "master_seed");
    m.master_seed = s.get<std::uint64_t>();
  }
  if (doc.contains("output_path")) {
    if (!doc.at("output_path").is_string()) throw ConfigError("expected a string", "output_path");
    m.output_path = doc.at("output_path").get<std::string>();
  }
  return m;
}

std::string manifest_hash(const Manifest& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : m.to_json().dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

std::string version() { return EXPJUMP_VERSION; }

int run(const Manifest& m, std::ostream& out) {
  if (m.command == "limit-shape") return cmd_limit_shape(m, out);
  if (m.command == "simulate") return cmd_simulate(m, out);
  if (m.command == "stationary") return cmd_stationary(m, out);
  if (m.command == "dist") return cmd_dist(m, out);
  if (m.command == "fredholm-check") return cmd_fredholm_check(m, out);
  if (m.command == "fluct") return cmd_fluct(m, out);
  if (m.command == "traffic-jam") return cmd_traffic_jam(m, out);
  throw ConfigError("unknown command '" + m.command + "'", "command");
}

}  // namespace expjump::cli
