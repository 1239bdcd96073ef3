#include "aircomp/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "aircomp/centralized.hpp"
#include "aircomp/errors.hpp"

namespace aircomp {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw ConfigError("config: " + msg); }

void check_keys(const json& j, const std::string& section,
                const std::set<std::string>& allowed) {
  if (!j.is_object()) fail("section '" + section + "' must be an object");
  for (const auto& item : j.items())
    if (!allowed.count(item.key()))
      fail("unknown key '" + (section.empty() ? "" : section + ".") + item.key() + "'");
}

const json& require(const json& j, const std::string& section, const std::string& key) {
  if (!j.contains(key))
    fail("missing key '" + (section.empty() ? "" : section + ".") + key + "'");
  return j.at(key);
}

double get_num(const json& v, const std::string& name) {
  if (!v.is_number()) fail("key '" + name + "' must be a number");
  return v.get<double>();
}

double get_pos(const json& v, const std::string& name) {
  const double x = get_num(v, name);
  if (!(x > 0.0)) fail("key '" + name + "' must be positive");
  return x;
}

long long get_int(const json& v, const std::string& name) {
  if (!v.is_number_integer()) fail("key '" + name + "' must be an integer");
  return v.get<long long>();
}

std::string get_str(const json& v, const std::string& name) {
  if (!v.is_string()) fail("key '" + name + "' must be a string");
  return v.get<std::string>();
}

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

NetworkScenario parse_scenario(const json& j) {
  check_keys(j, "scenario",
             {"ap_positions_m", "devices_per_cell", "cell_radius_m",
              "noise_power_dbm", "noise_power_w", "power_budget_w",
              "power_budgets_w", "pathloss"});
  NetworkScenario sc;

  const json& aps = require(j, "scenario", "ap_positions_m");
  if (!aps.is_array() || aps.empty()) fail("key 'scenario.ap_positions_m' must be a nonempty array");
  sc.ap_positions_m.resize(static_cast<int>(aps.size()), 2);
  for (std::size_t i = 0; i < aps.size(); ++i) {
    if (!aps[i].is_array() || aps[i].size() != 2)
      fail("key 'scenario.ap_positions_m' entries must be [x, y]");
    sc.ap_positions_m(static_cast<int>(i), 0) = get_num(aps[i][0], "scenario.ap_positions_m");
    sc.ap_positions_m(static_cast<int>(i), 1) = get_num(aps[i][1], "scenario.ap_positions_m");
  }

  const json& dev = require(j, "scenario", "devices_per_cell");
  if (!dev.is_array() || dev.empty()) fail("key 'scenario.devices_per_cell' must be a nonempty array");
  for (const auto& d : dev) {
    const long long k = get_int(d, "scenario.devices_per_cell");
    if (k < 1) fail("key 'scenario.devices_per_cell' entries must be >= 1");
    sc.devices_per_cell.push_back(static_cast<int>(k));
  }

  sc.cell_radius_m = get_pos(require(j, "scenario", "cell_radius_m"), "scenario.cell_radius_m");

  const bool has_dbm = j.contains("noise_power_dbm");
  const bool has_w = j.contains("noise_power_w");
  if (has_dbm == has_w)
    fail("exactly one of 'scenario.noise_power_dbm' and 'scenario.noise_power_w' is required");
  sc.noise_power_w = has_w ? get_pos(j.at("noise_power_w"), "scenario.noise_power_w")
                           : dbm_to_watt(get_num(j.at("noise_power_dbm"), "scenario.noise_power_dbm"));

  const bool has_uniform = j.contains("power_budget_w");
  const bool has_list = j.contains("power_budgets_w");
  if (has_uniform == has_list)
    fail("exactly one of 'scenario.power_budget_w' and 'scenario.power_budgets_w' is required");
  if (has_uniform) {
    const double p = get_pos(j.at("power_budget_w"), "scenario.power_budget_w");
    sc.power_budgets_w = uniform_budgets(sc, p);
  } else {
    const json& b = j.at("power_budgets_w");
    if (!b.is_array()) fail("key 'scenario.power_budgets_w' must be an array");
    sc.power_budgets_w.resize(static_cast<int>(b.size()));
    for (std::size_t i = 0; i < b.size(); ++i)
      sc.power_budgets_w(static_cast<int>(i)) = get_pos(b[i], "scenario.power_budgets_w");
  }

  const json& pl = require(j, "scenario", "pathloss");
  check_keys(pl, "scenario.pathloss", {"ref_gain", "ref_gain_db", "ref_distance_m", "exponent"});
  const bool has_db = pl.contains("ref_gain_db");
  const bool has_lin = pl.contains("ref_gain");
  if (has_db == has_lin)
    fail("exactly one of 'scenario.pathloss.ref_gain_db' and 'scenario.pathloss.ref_gain' is required");
  sc.pathloss.ref_gain = has_lin ? get_pos(pl.at("ref_gain"), "scenario.pathloss.ref_gain")
                                 : db_to_linear(get_num(pl.at("ref_gain_db"), "scenario.pathloss.ref_gain_db"));
  sc.pathloss.ref_distance_m =
      get_pos(require(pl, "scenario.pathloss", "ref_distance_m"), "scenario.pathloss.ref_distance_m");
  sc.pathloss.exponent = get_num(require(pl, "scenario.pathloss", "exponent"), "scenario.pathloss.exponent");
  if (sc.pathloss.exponent < 0.0) fail("key 'scenario.pathloss.exponent' must be nonnegative");

  try {
    sc.validate();
  } catch (const std::exception& e) {
    fail(std::string("invalid scenario: ") + e.what());
  }
  return sc;
}

Eigen::VectorXd parse_profile(const json& v, const std::string& name) {
  if (!v.is_array() || v.empty()) fail("key '" + name + "' must be a nonempty array");
  Eigen::VectorXd p(static_cast<int>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) p(static_cast<int>(i)) = get_num(v[i], name);
  try {
    validate_profile(p);
  } catch (const std::exception& e) {
    fail("key '" + name + "': " + e.what());
  }
  return p;
}

RunConfig parse_json(const json& j) {
  check_keys(j, "",
             {"scenario", "mode", "seed", "realizations", "output_dir", "profiles",
              "profile_count", "bisect_tol", "coordination", "power_sweep_w",
              "device_sweep", "denoise_rule", "mc_trials"});

  RunConfig cfg;
  cfg.scenario = parse_scenario(require(j, "", "scenario"));

  cfg.mode = get_str(require(j, "", "mode"), "mode");
  static const std::set<std::string> kModes{"centralized", "distributed", "baselines",
                                            "pareto", "validate"};
  if (!kModes.count(cfg.mode)) fail("key 'mode' must be one of centralized|distributed|baselines|pareto|validate");

  if (j.contains("seed")) {
    const long long s = get_int(j.at("seed"), "seed");
    if (s < 0) fail("key 'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("realizations")) {
    const long long r = get_int(j.at("realizations"), "realizations");
    if (r < 1) fail("key 'realizations' must be >= 1");
    cfg.realizations = static_cast<int>(r);
  }
  if (j.contains("output_dir")) cfg.output_dir = get_str(j.at("output_dir"), "output_dir");

  if (j.contains("profiles")) {
    const json& ps = j.at("profiles");
    if (!ps.is_array()) fail("key 'profiles' must be an array of profiles");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      std::ostringstream name;
      name << "profiles[" << i << "]";
      Eigen::VectorXd p = parse_profile(ps[i], name.str());
      if (p.size() != cfg.scenario.num_cells())
        fail("key '" + name.str() + "' must have one weight per cell");
      cfg.profiles.push_back(std::move(p));
    }
  }
  if (j.contains("profile_count")) {
    const long long c = get_int(j.at("profile_count"), "profile_count");
    if (c < 0) fail("key 'profile_count' must be nonnegative");
    if (c > 0 && cfg.scenario.num_cells() != 2)
      fail("key 'profile_count' requires a two-cell scenario");
    cfg.profile_count = static_cast<int>(c);
  }
  if (j.contains("bisect_tol"))
    cfg.bisect_tol = get_pos(j.at("bisect_tol"), "bisect_tol");

  if (j.contains("coordination")) {
    const json& c = j.at("coordination");
    check_keys(c, "coordination",
               {"alpha", "step_fraction", "det_tol", "improve_tol", "max_rounds",
                "max_backtracks", "accept_slack", "cell_tol", "cell_max_iters"});
    CoordinationParams& p = cfg.coordination;
    if (c.contains("alpha")) {
      p.alpha = get_num(c.at("alpha"), "coordination.alpha");
      if (p.alpha < 0.0) fail("key 'coordination.alpha' must be nonnegative");
    }
    if (c.contains("step_fraction")) p.step_fraction = get_pos(c.at("step_fraction"), "coordination.step_fraction");
    if (c.contains("det_tol")) p.det_tol = get_pos(c.at("det_tol"), "coordination.det_tol");
    if (c.contains("improve_tol")) p.improve_tol = get_pos(c.at("improve_tol"), "coordination.improve_tol");
    if (c.contains("max_rounds")) {
      const long long r = get_int(c.at("max_rounds"), "coordination.max_rounds");
      if (r < 1) fail("key 'coordination.max_rounds' must be >= 1");
      p.max_rounds = static_cast<int>(r);
    }
    if (c.contains("max_backtracks")) {
      const long long r = get_int(c.at("max_backtracks"), "coordination.max_backtracks");
      if (r < 0) fail("key 'coordination.max_backtracks' must be nonnegative");
      p.max_backtracks = static_cast<int>(r);
    }
    if (c.contains("accept_slack")) p.accept_slack = get_pos(c.at("accept_slack"), "coordination.accept_slack");
    if (c.contains("cell_tol")) p.cell_tol = get_pos(c.at("cell_tol"), "coordination.cell_tol");
    if (c.contains("cell_max_iters")) {
      const long long r = get_int(c.at("cell_max_iters"), "coordination.cell_max_iters");
      if (r < 1) fail("key 'coordination.cell_max_iters' must be >= 1");
      p.cell_max_iters = static_cast<int>(r);
    }
  }

  if (j.contains("power_sweep_w")) {
    const json& s = j.at("power_sweep_w");
    if (!s.is_array()) fail("key 'power_sweep_w' must be an array");
    for (const auto& v : s) cfg.power_sweep_w.push_back(get_pos(v, "power_sweep_w"));
  }
  if (j.contains("device_sweep")) {
    const json& s = j.at("device_sweep");
    if (!s.is_array()) fail("key 'device_sweep' must be an array");
    for (const auto& v : s) {
      const long long k = get_int(v, "device_sweep");
      if (k < 1) fail("key 'device_sweep' entries must be >= 1");
      cfg.device_sweep.push_back(static_cast<int>(k));
    }
  }
  if (j.contains("denoise_rule")) {
    const std::string r = get_str(j.at("denoise_rule"), "denoise_rule");
    if (r == "true_interference")
      cfg.denoise_rule = DenoiseRule::kTrueInterference;
    else if (r == "assumed_interference")
      cfg.denoise_rule = DenoiseRule::kAssumedInterference;
    else
      fail("key 'denoise_rule' must be true_interference|assumed_interference");
  }
  if (j.contains("mc_trials")) {
    const long long t = get_int(j.at("mc_trials"), "mc_trials");
    if (t < 1) fail("key 'mc_trials' must be >= 1");
    cfg.mc_trials = t;
  }

  validate_mode_requirements(cfg);
  return cfg;
}

}  // namespace

void validate_mode_requirements(const RunConfig& cfg) {
  if (cfg.mode == "centralized" && cfg.profiles.empty())
    fail("mode 'centralized' requires key 'profiles'");
  if (cfg.mode == "pareto" && cfg.profiles.empty() && cfg.profile_count == 0)
    fail("mode 'pareto' requires key 'profiles' or 'profile_count'");
  if (!cfg.device_sweep.empty()) {
    const double first = cfg.scenario.power_budgets_w(0);
    if (!(cfg.scenario.power_budgets_w.array() == first).all())
      fail("key 'device_sweep' requires a uniform power budget");
  }
}

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }
  return parse_json(j);
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  json j;
  json sc;
  json aps = json::array();
  for (int i = 0; i < cfg.scenario.ap_positions_m.rows(); ++i)
    aps.push_back({cfg.scenario.ap_positions_m(i, 0), cfg.scenario.ap_positions_m(i, 1)});
  sc["ap_positions_m"] = std::move(aps);
  sc["devices_per_cell"] = cfg.scenario.devices_per_cell;
  sc["cell_radius_m"] = cfg.scenario.cell_radius_m;
  sc["noise_power_w"] = cfg.scenario.noise_power_w;
  sc["power_budgets_w"] =
      std::vector<double>(cfg.scenario.power_budgets_w.data(),
                          cfg.scenario.power_budgets_w.data() + cfg.scenario.power_budgets_w.size());
  sc["pathloss"] = {{"ref_gain", cfg.scenario.pathloss.ref_gain},
                    {"ref_distance_m", cfg.scenario.pathloss.ref_distance_m},
                    {"exponent", cfg.scenario.pathloss.exponent}};
  j["scenario"] = std::move(sc);

  j["mode"] = cfg.mode;
  j["seed"] = cfg.seed;
  j["realizations"] = cfg.realizations;
  j["output_dir"] = cfg.output_dir;

  json profiles = json::array();
  for (const auto& p : cfg.profiles)
    profiles.push_back(std::vector<double>(p.data(), p.data() + p.size()));
  j["profiles"] = std::move(profiles);
  j["profile_count"] = cfg.profile_count;
  j["bisect_tol"] = cfg.bisect_tol;

  j["coordination"] = {{"alpha", cfg.coordination.alpha},
                       {"step_fraction", cfg.coordination.step_fraction},
                       {"det_tol", cfg.coordination.det_tol},
                       {"improve_tol", cfg.coordination.improve_tol},
                       {"max_rounds", cfg.coordination.max_rounds},
                       {"max_backtracks", cfg.coordination.max_backtracks},
                       {"accept_slack", cfg.coordination.accept_slack},
                       {"cell_tol", cfg.coordination.cell_tol},
                       {"cell_max_iters", cfg.coordination.cell_max_iters}};

  j["power_sweep_w"] = cfg.power_sweep_w;
  j["device_sweep"] = cfg.device_sweep;
  j["denoise_rule"] = cfg.denoise_rule == DenoiseRule::kTrueInterference
                          ? "true_interference"
                          : "assumed_interference";
  j["mc_trials"] = cfg.mc_trials;
  return j.dump(2) + "\n";
}

}  // namespace aircomp
