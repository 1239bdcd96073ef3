#include "aircomp/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "aircomp/baselines.hpp"
#include "aircomp/centralized.hpp"
#include "aircomp/coordination.hpp"
#include "aircomp/errors.hpp"
#include "aircomp/mse.hpp"
#include "aircomp/rng.hpp"

namespace aircomp {

namespace {

constexpr std::uint64_t kRealizationTag = 7000;
constexpr std::uint64_t kValidateTag = 9'000'000;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string sanitize(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

class Csv {
 public:
  Csv(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw ConfigError("run: cannot open output file '" + path.string() + "'");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

std::vector<std::string> mse_headers(int cells, const std::string& prefix) {
  std::vector<std::string> h;
  for (int l = 0; l < cells; ++l) h.push_back(prefix + std::to_string(l + 1));
  return h;
}

ChannelRealization draw(const NetworkScenario& sc, std::uint64_t master, int r) {
  return sample_realization(sc, substream(master, kRealizationTag + static_cast<std::uint64_t>(r)));
}

std::vector<Eigen::VectorXd> effective_profiles(const RunConfig& cfg) {
  if (!cfg.profiles.empty()) return cfg.profiles;
  std::vector<Eigen::VectorXd> out;
  for (int i = 1; i <= cfg.profile_count; ++i) {
    Eigen::VectorXd p(2);
    p(0) = static_cast<double>(i) / (cfg.profile_count + 1);
    p(1) = 1.0 - p(0);
    out.push_back(std::move(p));
  }
  return out;
}

void run_profiles(const RunConfig& cfg, const std::filesystem::path& path) {
  const int L = cfg.scenario.num_cells();
  std::vector<std::string> header{"realization", "profile_index"};
  for (const auto& h : mse_headers(L, "beta_")) header.push_back(h);
  header.push_back("eps");
  for (const auto& h : mse_headers(L, "mse_")) header.push_back(h);
  header.push_back("bisection_steps");
  header.push_back("status");
  Csv csv(path, header);

  const auto profiles = effective_profiles(cfg);
  for (int r = 0; r < cfg.realizations; ++r) {
    const ChannelRealization re = draw(cfg.scenario, cfg.seed, r);
    for (std::size_t pi = 0; pi < profiles.size(); ++pi) {
      std::vector<std::string> row{std::to_string(r), std::to_string(pi)};
      for (int l = 0; l < L; ++l) row.push_back(fmt(profiles[pi](l)));
      try {
        const CentralizedSolution sol =
            solve_p1(cfg.scenario, re, profiles[pi], cfg.scenario.power_budgets_w,
                     cfg.bisect_tol);
        row.push_back(fmt(sol.sum_mse));
        for (int l = 0; l < L; ++l) row.push_back(fmt(sol.achieved(l)));
        row.push_back(std::to_string(sol.bisection_steps));
        row.push_back("ok");
      } catch (const std::exception& e) {
        row.push_back(fmt(std::numeric_limits<double>::quiet_NaN()));
        for (int l = 0; l < L; ++l) row.push_back(fmt(std::numeric_limits<double>::quiet_NaN()));
        row.push_back("0");
        row.push_back(sanitize(e.what()));
      }
      csv.row(row);
    }
  }
}

const char* stop_name(StopReason r) {
  switch (r) {
    case StopReason::kDetBelowThreshold:
      return "det_below_threshold";
    case StopReason::kNoImprovement:
      return "no_improvement";
    case StopReason::kRoundLimit:
      return "round_limit";
  }
  return "unknown";
}

void run_distributed(const RunConfig& cfg, const std::filesystem::path& trace_path,
                     const std::filesystem::path& summary_path,
                     const std::filesystem::path& messages_path) {
  const int L = cfg.scenario.num_cells();

  std::vector<std::string> trace_header{"realization", "entry",    "round",
                                        "cell_a",      "cell_b",   "accepted",
                                        "step",        "det_residual"};
  for (const auto& h : mse_headers(L, "mse_")) trace_header.push_back(h);
  Csv trace_csv(trace_path, trace_header);

  std::vector<std::string> summary_header{"realization", "rounds", "stop_reason", "sum_mse"};
  for (const auto& h : mse_headers(L, "mse_")) summary_header.push_back(h);
  summary_header.push_back("status");
  Csv summary_csv(summary_path, summary_header);

  std::ofstream messages(messages_path, std::ios::binary);
  if (!messages)
    throw ConfigError("run: cannot open output file '" + messages_path.string() + "'");

  for (int r = 0; r < cfg.realizations; ++r) {
    const ChannelRealization re = draw(cfg.scenario, cfg.seed, r);
    std::vector<std::string> summary{std::to_string(r)};
    try {
      const BaselineResult start = run_baseline(
          cfg.scenario, re, BaselineKind::kIgnoreInterference,
          cfg.scenario.power_budgets_w);
      const ItLevels it0 =
          init_it_from_allocation(cfg.scenario, re, start.allocation.powers_w);
      const CoordinationResult res = run_algorithm2(
          cfg.scenario, re, it0, cfg.scenario.power_budgets_w, cfg.coordination);

      for (std::size_t i = 0; i < res.trace.size(); ++i) {
        const TraceEntry& t = res.trace[i];
        std::vector<std::string> row{std::to_string(r),
                                     std::to_string(i),
                                     std::to_string(t.round),
                                     std::to_string(t.cell_a),
                                     std::to_string(t.cell_b),
                                     t.accepted ? "1" : "0",
                                     fmt(t.step),
                                     fmt(t.det_residual)};
        for (int l = 0; l < L; ++l) row.push_back(fmt(t.mse(l)));
        trace_csv.row(row);
      }
      for (std::size_t i = 0; i < res.messages.size(); ++i) {
        const BackhaulMessage& m = res.messages[i];
        nlohmann::json j{{"realization", r},
                         {"seq", i},
                         {"kind", m.kind == MessageKind::kItExchange ? "it_exchange"
                                                                     : "sensitivity_share"},
                         {"sender", m.sender},
                         {"receiver", m.receiver},
                         {"payload", {m.payload[0], m.payload[1]}}};
        messages << j.dump() << '\n';
      }
      summary.push_back(std::to_string(res.rounds));
      summary.push_back(stop_name(res.stop_reason));
      summary.push_back(fmt(res.mse.sum()));
      for (int l = 0; l < L; ++l) summary.push_back(fmt(res.mse(l)));
      summary.push_back("ok");
    } catch (const std::exception& e) {
      summary.push_back("0");
      summary.push_back("error");
      summary.push_back(fmt(std::numeric_limits<double>::quiet_NaN()));
      for (int l = 0; l < L; ++l)
        summary.push_back(fmt(std::numeric_limits<double>::quiet_NaN()));
      summary.push_back(sanitize(e.what()));
    }
    summary_csv.row(summary);
  }
}

NetworkScenario sweep_scenario(const NetworkScenario& base, int devices, double power) {
  NetworkScenario sc = base;
  if (devices > 0)
    for (auto& k : sc.devices_per_cell) k = devices;
  if (power > 0.0)
    sc.power_budgets_w = uniform_budgets(sc, power);
  else if (devices > 0)
    sc.power_budgets_w = uniform_budgets(sc, base.power_budgets_w(0));
  return sc;
}

void run_baselines(const RunConfig& cfg, const std::filesystem::path& path) {
  Csv csv(path, {"scheme", "power_w", "devices_per_cell", "total_devices",
                 "realizations", "n_errors", "mean_sum_mse", "stderr_sum_mse"});

  std::vector<double> powers = cfg.power_sweep_w;
  if (powers.empty()) powers.push_back(0.0);  // sentinel: scenario budgets as-is
  std::vector<int> devices = cfg.device_sweep;
  if (devices.empty()) devices.push_back(0);  // sentinel: scenario counts as-is

  struct SchemeDef {
    const char* name;
    BaselineKind kind;
  };
  static const SchemeDef kSchemes[] = {
      {"full_power", BaselineKind::kFullPower},
      {"ignore_interference", BaselineKind::kIgnoreInterference},
      {"max_interference", BaselineKind::kMaxInterference},
  };

  for (int dev : devices) {
    for (double pw : powers) {
      const NetworkScenario sc = sweep_scenario(cfg.scenario, dev, pw);
      const double power_col = pw > 0.0 ? pw : sc.power_budgets_w.mean();

      // scheme index 0..2: baselines; 3: centralized optimum paired with the
      // max-interference scheme's achieved error profile.
      std::vector<double> sum(4, 0.0), sum2(4, 0.0);
      std::vector<int> n(4, 0), errors(4, 0);
      for (int r = 0; r < cfg.realizations; ++r) {
        const ChannelRealization re = draw(sc, cfg.seed, r);
        Eigen::VectorXd maxint_profile;
        for (int s = 0; s < 3; ++s) {
          try {
            const BaselineResult b = run_baseline(sc, re, kSchemes[s].kind,
                                                  sc.power_budgets_w, cfg.denoise_rule);
            sum[s] += b.sum_mse;
            sum2[s] += b.sum_mse * b.sum_mse;
            ++n[s];
            if (kSchemes[s].kind == BaselineKind::kMaxInterference && b.sum_mse > 0.0)
              maxint_profile = b.mse / b.sum_mse;
          } catch (const std::exception&) {
            ++errors[s];
          }
        }
        try {
          if (maxint_profile.size() == 0) throw SolverError("no pairing profile");
          const CentralizedSolution sol =
              solve_p1(sc, re, maxint_profile, sc.power_budgets_w, cfg.bisect_tol);
          const double v = sol.achieved.sum();
          sum[3] += v;
          sum2[3] += v * v;
          ++n[3];
        } catch (const std::exception&) {
          ++errors[3];
        }
      }

      const char* names[4] = {kSchemes[0].name, kSchemes[1].name, kSchemes[2].name,
                              "optimal"};
      for (int s = 0; s < 4; ++s) {
        const double mean = n[s] > 0 ? sum[s] / n[s] : std::numeric_limits<double>::quiet_NaN();
        double se = std::numeric_limits<double>::quiet_NaN();
        if (n[s] > 1) {
          const double var = std::max(0.0, (sum2[s] - n[s] * mean * mean) / (n[s] - 1));
          se = std::sqrt(var / n[s]);
        }
        csv.row({names[s], fmt(power_col), std::to_string(dev),
                 std::to_string(sc.num_devices()), std::to_string(n[s]),
                 std::to_string(errors[s]), fmt(mean), fmt(se)});
      }
    }
  }
}

void run_validate(const RunConfig& cfg, const std::filesystem::path& path) {
  const int L = cfg.scenario.num_cells();
  Csv csv(path, {"realization", "cell", "analytic", "empirical", "std_error",
                 "trials", "z"});
  for (int r = 0; r < cfg.realizations; ++r) {
    const ChannelRealization re = draw(cfg.scenario, cfg.seed, r);
    const BaselineResult fp = run_baseline(cfg.scenario, re, BaselineKind::kFullPower,
                                           cfg.scenario.power_budgets_w);
    for (int l = 0; l < L; ++l) {
      const std::uint64_t seed =
          substream(cfg.seed, kValidateTag + static_cast<std::uint64_t>(r) * 64 + l);
      const EmpiricalMse emp = empirical_mse_stats(cfg.scenario, re, fp.allocation,
                                                   l, cfg.mc_trials, seed);
      const double analytic = fp.mse(l);
      const double z = emp.std_error > 0.0 ? (emp.mean - analytic) / emp.std_error
                                           : std::numeric_limits<double>::quiet_NaN();
      csv.row({std::to_string(r), std::to_string(l), fmt(analytic), fmt(emp.mean),
               fmt(emp.std_error), std::to_string(emp.trials), fmt(z)});
    }
  }
}

}  // namespace

RunOutputs run(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("run: cannot create output directory '" + dir.string() + "'");

  RunOutputs out;
  const auto emit = [&](const fs::path& p) { out.files.push_back(p.string()); return p; };

  if (cfg.mode == "centralized") {
    run_profiles(cfg, emit(dir / "centralized.csv"));
  } else if (cfg.mode == "pareto") {
    run_profiles(cfg, emit(dir / "pareto.csv"));
  } else if (cfg.mode == "distributed") {
    // sequence the emit calls: argument evaluation order would scramble out.files
    const fs::path trace = emit(dir / "distributed_trace.csv");
    const fs::path summary = emit(dir / "distributed_summary.csv");
    const fs::path msgs = emit(dir / "messages.jsonl");
    run_distributed(cfg, trace, summary, msgs);
  } else if (cfg.mode == "baselines") {
    run_baselines(cfg, emit(dir / "baselines.csv"));
  } else if (cfg.mode == "validate") {
    run_validate(cfg, emit(dir / "validate.csv"));
  } else {
    throw ConfigError("run: unknown mode '" + cfg.mode + "'");
  }
  return out;
}

}  // namespace aircomp
