#include "tsncbs/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "tsncbs/config_io.hpp"
#include "tsncbs/report.hpp"

namespace tsncbs {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

void init_logging() {
  static bool done = false;
  if (done) return;
  done = true;
  auto logger = spdlog::stderr_color_mt("tsncbs");
  spdlog::set_default_logger(logger);
  const char* env = std::getenv("TSNCBS_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content) {
  fs::create_directories(dir);
  std::ofstream o(dir / name, std::ios::binary);
  o << content;
  spdlog::info("wrote {}", (dir / name).string());
}

struct Flags {
  std::string config;
  std::string out = ".";
  std::string model = "fluid";
  double margin = 1.0;
  double rho = 0.05;
  std::size_t max_rounds = 50;
  double horizon_us = 20000;
  std::uint64_t seed = 1;
  double spread_us = 0;
  std::string arrivals = "greedy";
  bool deploy_first = false;
  bool dump_curves = false;
  bool cbs_on_es = false;
};

nc::AnalysisOptions analysis_options(const Flags& f) {
  nc::AnalysisOptions o;
  o.model = f.model == "packetized" ? nc::Model::Packetized : nc::Model::Fluid;
  return o;
}

deploy::FrameworkOptions framework_options(const Flags& f) {
  deploy::FrameworkOptions o;
  o.initial_margin = from_double(f.margin);
  o.rho = from_double(f.rho);
  o.max_rounds = f.max_rounds;
  o.analysis = analysis_options(f);
  return o;
}

NetworkConfiguration load(const Flags& f) {
  NetworkConfiguration cfg = load_configuration_file(f.config);
  if (f.cbs_on_es && !cfg.cbs_on_end_systems())
    cfg = NetworkConfiguration(cfg.devices(), cfg.ports(), cfg.flows(), cfg.cbs(), true);
  return cfg;
}

void dump_curves(const NetworkConfiguration& cfg, const nc::AnalysisResult& a,
                 const fs::path& dir) {
  for (const auto& [key, curve] : a.arrival) {
    std::string stem = cfg.ports()[key.first].id + "_p" + std::to_string(key.second);
    write_file(dir / "curves", "alpha_" + stem + ".csv", curve.to_csv());
    write_file(dir / "curves", "beta_" + stem + ".csv", a.service.at(key).to_csv());
  }
}

int cmd_analyze(const Flags& f, std::ostream& out) {
  auto t0 = Clock::now();
  NetworkConfiguration cfg = load(f);
  verify::Verdict v = verify::verify_schedulability(cfg, analysis_options(f));
  fs::path dir(f.out);
  write_file(dir, "delays.csv", report::analysis_csv(cfg, v.analysis));
  write_file(dir, "verdicts.csv", report::verdict_csv(cfg, v));
  write_file(dir, "analysis.json", report::analysis_json(cfg, v.analysis));
  if (f.dump_curves) dump_curves(cfg, v.analysis, dir);
  out << "flows: " << cfg.flows().size() << ", schedulable: " << v.schedulable().size()
      << ", unsched shaped: " << v.unsched_shaped().size()
      << ", unsched non-shaped: " << v.unsched_non_shaped().size() << '\n';
  if (!v.analysis.converged) out << "fixed point did not converge; affected flows unbounded\n";
  out << "analysis time: " << ms_since(t0) << " ms\n";
  return v.all_schedulable() ? kExitOk : kExitUnschedulable;
}

int exit_for(deploy::Status s) {
  switch (s) {
    case deploy::Status::Success: return kExitOk;
    case deploy::Status::Infeasible: return kExitInfeasible;
    case deploy::Status::BudgetExceeded: return kExitBudgetExceeded;
    case deploy::Status::PreconditionViolated: return kExitPreconditionViolated;
  }
  return kExitInfeasible;
}

int cmd_deploy(const Flags& f, std::ostream& out) {
  NetworkConfiguration cfg = load(f);
  auto t0 = Clock::now();
  deploy::FrameworkOutcome res = deploy::run_framework(cfg, framework_options(f));
  double t_framework = ms_since(t0);
  fs::path dir(f.out);
  write_file(dir, "framework_trace.csv", report::framework_trace_csv(res));
  write_file(dir, "verdicts.csv", report::verdict_csv(res.config, res.verdict));
  out << "outcome: " << deploy::status_name(res.status) << " after " << res.rounds
      << " round(s), margin " << to_fixed(res.margins.back(), 4) << '\n';
  if (res.status == deploy::Status::PreconditionViolated) {
    out << "framework precondition violated: priority-0 flows unschedulable without CBS:";
    for (std::size_t i : res.precondition_flows) out << ' ' << cfg.flows()[i].id;
    out << '\n';
    return exit_for(res.status);
  }
  if (res.status != deploy::Status::Success) return exit_for(res.status);

  write_file(dir, "enriched.json", dump_configuration(res.config));
  write_file(dir, "placement.csv", report::placement_csv(res.config));
  auto t1 = Clock::now();
  deploy::BaselineOutcome full = deploy::full_cbs_baseline(cfg, framework_options(f));
  double t_baseline = ms_since(t1);
  std::size_t devices = res.config.tsn_device_count();
  std::size_t instances = res.config.cbs().size();
  out << "TSN devices: " << devices << "/" << full.candidate_devices
      << ", CBS instances: " << instances << "/" << full.candidates.size() << '\n';
  out << "device reduction vs full CBS: "
      << report::format_reduction(report::reduction(devices, full.candidate_devices)) << '\n';
  out << "CBS instance reduction vs full CBS: "
      << report::format_reduction(report::reduction(instances, full.candidates.size())) << '\n';
  if (!full.feasible)
    out << "note: full CBS baseline is not fully feasible (" << full.dropped.size()
        << " candidate(s) without a valid idle slope)\n";
  out << report::placement_csv(res.config);
  out << "framework time: " << t_framework << " ms, baseline time: " << t_baseline << " ms\n";
  return kExitOk;
}

int cmd_compare(const Flags& f, std::ostream& out) {
  NetworkConfiguration cfg = load(f);
  auto opts = framework_options(f);
  deploy::FrameworkOutcome partial = deploy::run_framework(cfg, opts);
  if (partial.status != deploy::Status::Success) {
    out << "deployment failed: " << deploy::status_name(partial.status) << '\n';
    return exit_for(partial.status);
  }
  deploy::BaselineOutcome full = deploy::full_cbs_baseline(cfg, opts);
  nc::AnalysisResult npsp = nc::analyze(cfg.without_cbs(), opts.analysis);
  const nc::AnalysisResult& part = partial.verdict.analysis;
  const nc::AnalysisResult& fullr = full.verdict.analysis;

  std::set<int> priorities;
  for (const auto& fl : cfg.flows()) priorities.insert(fl.priority);
  fs::path dir(f.out);
  for (int p : priorities) {
    std::string k = std::to_string(p);
    write_file(dir, "cdf_p" + k + "_npsp.csv", report::cdf_csv(cfg, npsp, p));
    write_file(dir, "cdf_p" + k + "_partial.csv", report::cdf_csv(partial.config, part, p));
    write_file(dir, "cdf_p" + k + "_full.csv", report::cdf_csv(full.config, fullr, p));
  }

  std::ostringstream table;
  table << "flow,priority,deadline_us,npsp_us,partial_us,full_us\n";
  auto us = [](const Bound& b) { return b ? to_fixed(us_from_seconds(*b), 3) : "inf"; };
  for (std::size_t i = 0; i < cfg.flows().size(); ++i) {
    const Flow& fl = cfg.flows()[i];
    table << fl.id << ',' << fl.priority << ','
          << (fl.deadline ? to_fixed(us_from_seconds(*fl.deadline), 3) : "") << ','
          << us(npsp.flow_delay[i]) << ',' << us(part.flow_delay[i]) << ','
          << us(fullr.flow_delay[i]) << '\n';
  }
  write_file(dir, "compare.csv", table.str());

  std::optional<Rational> lo, hi;
  for (std::size_t i = 0; i < cfg.flows().size(); ++i) {
    if (cfg.flows()[i].priority != 0) continue;
    const Bound &a = part.flow_delay[i], &b = fullr.flow_delay[i];
    if (!a || !b || *b == 0) continue;
    Rational gain = 1 - *a / *b;
    if (!lo || gain < *lo) lo = gain;
    if (!hi || gain > *hi) hi = gain;
  }
  if (lo)
    out << "priority-0 bound improvement partial vs full: min " << to_fixed(Rational(*lo * 100), 1)
        << "%, max " << to_fixed(Rational(*hi * 100), 1) << "%\n";
  std::size_t np_ok = 0, part_ok = 0, total = 0;
  verify::Verdict vn = verify::classify(cfg.without_cbs(), npsp);
  for (std::size_t i = 0; i < cfg.flows().size(); ++i) {
    if (!cfg.flows()[i].deadline || cfg.flows()[i].priority == 0) continue;
    ++total;
    np_ok += vn.classes[i] == verify::FlowClass::Schedulable;
    part_ok += partial.verdict.classes[i] == verify::FlowClass::Schedulable;
  }
  out << "lower-priority deadline flows schedulable: NP-SP " << np_ok << "/" << total
      << ", partial CBS " << part_ok << "/" << total << '\n';
  return kExitOk;
}

int cmd_simulate(const Flags& f, std::ostream& out) {
  NetworkConfiguration cfg = load(f);
  if (f.deploy_first) {
    deploy::FrameworkOutcome res = deploy::run_framework(cfg, framework_options(f));
    if (res.status != deploy::Status::Success) {
      out << "deployment failed: " << deploy::status_name(res.status) << '\n';
      return exit_for(res.status);
    }
    cfg = res.config;
  }
  sim::SimScenario sc{cfg, seconds_from_us(from_double(f.horizon_us)), f.seed,
                      f.arrivals == "jitter" ? sim::ArrivalModel::PeriodicJitter
                                             : sim::ArrivalModel::GreedyBurst,
                      seconds_from_us(from_double(f.spread_us)), true};
  auto t0 = Clock::now();
  sim::SimResult r = sim::simulate(sc);
  double t_sim = ms_since(t0);
  nc::AnalysisOptions bounds = analysis_options(f);
  bounds.model = nc::Model::Packetized;
  nc::AnalysisResult a = nc::analyze(cfg, bounds);
  auto rows = sim::summarize(cfg, r, a);
  fs::path dir(f.out);
  write_file(dir, "sim_summary.csv", report::sim_summary_csv(cfg, rows));
  write_file(dir, "trace.csv", report::sim_trace_csv(cfg, r));
  std::size_t violations = 0;
  for (const auto& row : rows)
    if (row.violation) {
      ++violations;
      out << "dominance violation: " << cfg.flows()[row.flow].id << '\n';
    }
  out << "frames: " << r.frames << ", violations: " << violations << ", simulation time: " << t_sim
      << " ms\n";
  return violations ? kExitDominanceViolation : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  init_logging();
  CLI::App app{"Network-calculus analysis and partial CBS deployment for TSN networks", "tsncbs"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", f.config, "JSON network configuration")->required();
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--model", f.model, "Analysis model")
        ->check(CLI::IsMember({"fluid", "packetized"}));
    sub->add_flag("--cbs-on-es", f.cbs_on_es, "Allow CBS on end-system ports");
  };
  auto add_deploy = [&](CLI::App* sub) {
    sub->add_option("--margin", f.margin, "Initial margin in (0,1]");
    sub->add_option("--rho", f.rho, "Margin step")->check(CLI::PositiveNumber);
    sub->add_option("--max-rounds", f.max_rounds, "Framework round budget");
  };
  auto* analyze = app.add_subcommand("analyze", "Delay bounds and schedulability verdicts");
  add_common(analyze);
  analyze->add_flag("--dump-curves", f.dump_curves, "Write arrival/service curves as CSV");
  auto* dep = app.add_subcommand("deploy", "Run the partial CBS deployment framework");
  add_common(dep);
  add_deploy(dep);
  auto* cmp = app.add_subcommand("compare", "NP-SP vs partial CBS vs full CBS delay CDFs");
  add_common(cmp);
  add_deploy(cmp);
  auto* simc =
      app.add_subcommand("simulate", "Discrete-event simulation against store-and-forward bounds");
  add_common(simc);
  add_deploy(simc);
  simc->add_option("--horizon", f.horizon_us, "Frame generation horizon in microseconds");
  simc->add_option("--seed", f.seed, "Random seed");
  simc->add_option("--arrivals", f.arrivals, "Arrival model")
      ->check(CLI::IsMember({"greedy", "jitter"}));
  simc->add_option("--spread", f.spread_us, "Greedy start-offset window in microseconds");
  simc->add_flag("--deploy", f.deploy_first, "Run the deployment first and simulate its result");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (analyze->parsed()) return cmd_analyze(f, out);
    if (dep->parsed()) return cmd_deploy(f, out);
    if (cmp->parsed()) return cmd_compare(f, out);
    if (simc->parsed()) return cmd_simulate(f, out);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfigError;
  }
  return kExitConfigError;
}

}  // namespace tsncbs
