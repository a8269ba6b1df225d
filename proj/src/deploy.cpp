#include "tsncbs/deploy.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace tsncbs::deploy {

namespace {

/// d - D with +inf for unbounded delays and -inf for "no such flow".
struct Excess {
  int rank = 0;  // 0: -inf, 1: finite, 2: +inf
  Rational value;
  bool operator<(const Excess& o) const {
    if (rank != o.rank) return rank < o.rank;
    return rank == 1 && value < o.value;
  }
};

Excess excess_of(const NetworkConfiguration& config, std::size_t f,
                 const verify::Verdict& verdict) {
  const Bound& d = verdict.analysis.flow_delay[f];
  if (!d) return {2, 0};
  const auto& deadline = config.flows()[f].deadline;
  return {1, *d - (deadline ? *deadline : Rational(0))};
}

bool on_path(const Flow& f, std::size_t port) {
  return std::find(f.path.begin(), f.path.end(), port) != f.path.end();
}

Rational slope_sum(const NetworkConfiguration& config, std::size_t port) {
  Rational s = 0;
  for (const auto& c : config.cbs())
    if (c.port == port) s += c.idle_slope;
  return s;
}

std::string describe(const NetworkConfiguration& config, const std::vector<CbsAssignment>& list) {
  std::ostringstream os;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) os << ' ';
    os << config.ports()[list[i].port].id << ":p" << list[i].priority << '='
       << to_fixed(list[i].idle_slope, 0);
  }
  return os.str();
}

/// Places (or re-places) the given classes in port-id then priority order.
/// Returns nullopt when some class has no feasible idle slope or breaks 9a.
std::optional<NetworkConfiguration> place_in_order(NetworkConfiguration cfg,
                                                   std::vector<nc::PortClass> classes,
                                                   const Rational& margin,
                                                   const nc::AnalysisResult& analysis,
                                                   std::vector<CbsAssignment>* out) {
  const auto& ports = cfg.ports();
  std::sort(classes.begin(), classes.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return ports[a.first].id < ports[b.first].id;
    return a.second < b.second;
  });
  for (const auto& [port, p] : classes) {
    auto slope = placed_idle_slope(cfg, port, p, margin, analysis);
    if (!slope) return std::nullopt;
    if (slope_sum(cfg, port) + *slope > kMaxCbsShare * ports[port].capacity) return std::nullopt;
    CbsAssignment a{port, p, *slope};
    cfg = cfg.with_cbs({a});
    if (out) out->push_back(a);
  }
  return cfg;
}

/// max d_op^p / D_op^p over the given classes.
Rational margin_floor(const NetworkConfiguration& config, const std::vector<nc::PortClass>& classes,
                      const nc::AnalysisResult& analysis) {
  Rational floor = 0;
  for (const auto& [port, p] : classes) {
    auto ld = local_deadline(config, port, p, analysis);
    Bound d = analysis.delay_at(port, p);
    if (!ld || !d || ld->value <= 0) return Rational(1);
    floor = max(floor, *d / ld->value);
  }
  return floor;
}

}  // namespace

std::optional<LocalDeadline> local_deadline(const NetworkConfiguration& config, std::size_t port,
                                            int priority, const nc::AnalysisResult& analysis) {
  const auto& fl = config.flows_at(port, priority);
  if (fl.empty()) throw std::invalid_argument("no flow at " + config.ports()[port].id);
  std::optional<LocalDeadline> best;
  const Rational r_op = config.aggregate_rate(port, priority);
  for (std::size_t f : fl) {
    const Flow& flow = config.flows()[f];
    if (!flow.deadline)
      throw std::invalid_argument("flow " + flow.id + " at " + config.ports()[port].id +
                                  " has no deadline");
    bool at_source = flow.path.front() == port;
    Rational budget = *flow.deadline - config.propagation_delay(f);
    if (!at_source) {
      const Bound& src = analysis.source_delay[f];
      if (!src) return std::nullopt;
      budget -= *src;
    }
    Rational rates = 0;
    for (std::size_t h = at_source ? 0 : 1; h < flow.path.size(); ++h)
      rates += config.aggregate_rate(flow.path[h], priority);
    Rational share = rates > 0 ? budget * r_op / rates : budget;
    if (!best || share < best->value) best = LocalDeadline{share, f};
  }
  return best;
}

std::optional<Rational> min_idle_slope(const NetworkConfiguration& config, std::size_t port,
                                       int priority, const Rational& margin,
                                       const nc::AnalysisResult& analysis) {
  auto ld = local_deadline(config, port, priority, analysis);
  if (!ld) return std::nullopt;
  Rational denom = ld->value * margin - nc::latency_factor_at(config, port, priority);
  if (denom <= 0) return std::nullopt;
  Rational bursts = 0;
  for (std::size_t f : config.flows_at(port, priority)) {
    const Bound& b = config.flows()[f].burst;
    if (!b) return std::nullopt;
    bursts += *b;
  }
  return bursts / denom;
}

std::optional<Rational> placed_idle_slope(const NetworkConfiguration& config, std::size_t port,
                                          int priority, const Rational& margin,
                                          const nc::AnalysisResult& analysis) {
  auto i_min = min_idle_slope(config, port, priority, margin, analysis);
  if (!i_min) return std::nullopt;
  Rational slope{ceil_int(max(*i_min, config.aggregate_rate(port, priority)))};
  if (slope <= 0 || slope > config.ports()[port].capacity) return std::nullopt;
  return slope;
}

std::size_t most_constrained_flow(const NetworkConfiguration& config,
                                  const std::vector<std::size_t>& unsched,
                                  const verify::Verdict& verdict) {
  if (unsched.empty()) throw std::invalid_argument("no unscheduled flow");
  const auto& flows = config.flows();
  int top = kPriorityLevels;
  for (std::size_t f : unsched) top = std::min(top, flows[f].priority);
  std::optional<std::size_t> best;
  Excess best_excess;
  for (std::size_t f : unsched) {
    if (flows[f].priority != top) continue;
    Excess e = excess_of(config, f, verdict);
    if (!best || best_excess < e || (!(e < best_excess) && flows[f].id < flows[*best].id)) {
      best = f;
      best_excess = e;
    }
  }
  return *best;
}

std::optional<int> highest_non_shaped_priority(const NetworkConfiguration& config,
                                               std::size_t port, int below,
                                               const verify::Verdict& verdict) {
  if (!config.is_switch_port(port) && !config.cbs_on_end_systems()) return std::nullopt;
  int k = 0;
  while (k < kPriorityLevels && config.has_cbs(port, k)) ++k;
  if (k >= below) return std::nullopt;
  const auto& fl = config.flows_at(port, k);
  if (fl.empty()) return std::nullopt;
  for (std::size_t f : fl)
    if (!config.flows()[f].deadline || verdict.classes[f] != verify::FlowClass::Schedulable)
      return std::nullopt;
  return k;
}

std::optional<std::size_t> select_device(const NetworkConfiguration& config, std::size_t foi,
                                         const std::set<std::size_t>& excluded,
                                         const verify::Verdict& verdict) {
  const Flow& f = config.flows()[foi];
  for (std::size_t port : f.path) {
    std::size_t dev = config.ports()[port].device;
    if (excluded.count(dev)) continue;
    if (highest_non_shaped_priority(config, port, f.priority, verdict)) return dev;
  }
  return std::nullopt;
}

std::vector<std::size_t> ordered_ports(const NetworkConfiguration& config, std::size_t device,
                                       int foi_priority, const std::vector<std::size_t>& unsched,
                                       const verify::Verdict& verdict) {
  std::vector<std::pair<Excess, std::size_t>> keyed;
  for (std::size_t port : config.ports_of_device(device)) {
    if (!highest_non_shaped_priority(config, port, foi_priority, verdict)) continue;
    Excess worst;
    for (std::size_t f : unsched)
      if (on_path(config.flows()[f], port)) worst = std::max(worst, excess_of(config, f, verdict));
    keyed.emplace_back(worst, port);
  }
  const auto& ports = config.ports();
  std::stable_sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
    if (b.first < a.first) return true;
    if (a.first < b.first) return false;
    return ports[a.second].id < ports[b.second].id;
  });
  std::vector<std::size_t> out;
  for (const auto& k : keyed) out.push_back(k.second);
  return out;
}

std::optional<NetworkConfiguration> partial_cbs_deployment(DeploymentState& state,
                                                           const NetworkConfiguration& config,
                                                           const verify::Verdict& verdict) {
  const auto& analysis = verdict.analysis;
  const auto& flows = config.flows();
  state.while_iterations = 0;
  state.initial_unsched = 0;

  if (!verdict.unsched_shaped().empty()) {
    std::vector<nc::PortClass> classes;
    for (const auto& a : state.placed) classes.emplace_back(a.port, a.priority);
    Rational floor = margin_floor(config, classes, analysis);
    Rational m = state.margin - state.rho;
    if (m <= floor || m <= 0) return std::nullopt;
    state.margin = m;
    std::vector<CbsAssignment> kept;
    for (const auto& c : config.cbs())
      if (std::none_of(state.placed.begin(), state.placed.end(), [&](const CbsAssignment& a) {
            return a.port == c.port && a.priority == c.priority;
          }))
        kept.push_back(c);
    NetworkConfiguration base(config.devices(), config.ports(), config.flows(), kept,
                              config.cbs_on_end_systems());
    std::vector<CbsAssignment> replaced;
    auto next = place_in_order(base, classes, m, analysis, &replaced);
    if (!next || !next->validate().empty()) return std::nullopt;
    state.placed = replaced;
    return next;
  }

  std::vector<std::size_t> working = verdict.unsched_non_shaped();
  if (working.empty()) return config;
  state.initial_unsched = working.size();
  state.excluded_devices.clear();
  state.shaped_flows.clear();

  NetworkConfiguration cfg = config;
  bool any_placed = false;
  while (!working.empty()) {
    ++state.while_iterations;
    std::size_t foi = most_constrained_flow(cfg, working, verdict);
    const Flow& f = flows[foi];
    std::size_t dev = 0;
    for (;;) {
      auto selected = select_device(cfg, foi, state.excluded_devices, verdict);
      if (!selected) return std::nullopt;
      dev = *selected;
      bool reselect = false;
      for (std::size_t port : ordered_ports(cfg, dev, f.priority, working, verdict)) {
        auto p = highest_non_shaped_priority(cfg, port, f.priority, verdict);
        if (!p) continue;
        auto slope = placed_idle_slope(cfg, port, *p, state.margin, analysis);
        bool fits = slope && slope_sum(cfg, port) + *slope <=
                                 kMaxCbsShare * cfg.ports()[port].capacity;
        if (fits) {
          CbsAssignment a{port, *p, *slope};
          cfg = cfg.with_cbs({a});
          state.placed.push_back(a);
          for (std::size_t g : cfg.flows_at(port, *p)) state.shaped_flows.insert(g);
          any_placed = true;
        } else if (on_path(f, port)) {
          state.excluded_devices.insert(dev);
          reselect = true;
          break;
        }
      }
      if (!reselect) break;
    }

    std::set<std::size_t> on_device;
    for (std::size_t g : cfg.flows_through_device(dev)) on_device.insert(g);
    std::set<std::size_t> direct, touched_ports;
    for (std::size_t g : working)
      if (on_device.count(g)) direct.insert(g);
    for (std::size_t g : direct)
      for (std::size_t port : flows[g].path) touched_ports.insert(port);
    for (std::size_t g : state.shaped_flows)
      for (std::size_t port : flows[g].path) touched_ports.insert(port);
    std::vector<std::size_t> rest;
    for (std::size_t g : working) {
      if (direct.count(g)) continue;
      bool indirect = std::any_of(flows[g].path.begin(), flows[g].path.end(),
                                  [&](std::size_t port) { return touched_ports.count(port) > 0; });
      if (!indirect) rest.push_back(g);
    }
    if (rest.size() >= working.size()) throw std::logic_error("placement loop made no progress");
    working = std::move(rest);
  }
  if (!any_placed) return std::nullopt;
  return cfg;
}

const char* status_name(Status s) {
  switch (s) {
    case Status::Success: return "SUCCESS";
    case Status::Infeasible: return "INFEASIBLE";
    case Status::BudgetExceeded: return "BUDGET_EXCEEDED";
    case Status::PreconditionViolated: return "PRECONDITION_VIOLATED";
  }
  return "?";
}

FrameworkOutcome run_framework(const NetworkConfiguration& config,
                               const FrameworkOptions& options) {
  if (options.rho <= 0) throw std::invalid_argument("rho must be positive");
  if (options.initial_margin <= 0 || options.initial_margin > 1)
    throw std::invalid_argument("margin must lie in (0, 1]");

  FrameworkOutcome out;
  out.config = config;
  out.precondition_flows = verify::precondition_violations(config, options.analysis);
  if (!out.precondition_flows.empty()) {
    out.status = Status::PreconditionViolated;
    out.verdict = verify::verify_schedulability(config, options.analysis);
    return out;
  }

  DeploymentState state;
  state.margin = options.initial_margin;
  state.rho = options.rho;
  NetworkConfiguration cfg = config;
  verify::Verdict verdict = verify::verify_schedulability(cfg, options.analysis);
  out.margins.push_back(state.margin);
  auto note = [&](std::size_t round, std::string action, std::string placements) {
    out.trace.push_back({round, std::move(action), state.margin, std::move(placements),
                         verdict.unsched_shaped().size(), verdict.unsched_non_shaped().size()});
  };
  note(0, "verify", "");

  for (;;) {
    if (verdict.all_schedulable()) {
      if (!cfg.validate().empty()) throw std::logic_error("deployment violates constraints");
      out.status = Status::Success;
      note(out.rounds, "success", "");
      break;
    }
    if (out.rounds >= options.max_rounds) {
      out.status = Status::BudgetExceeded;
      note(out.rounds, "budget_exceeded", "");
      break;
    }
    ++out.rounds;
    bool reconfigure = !verdict.unsched_shaped().empty();
    std::size_t before = state.placed.size();
    auto next = partial_cbs_deployment(state, cfg, verdict);
    if (!reconfigure) out.placement_iterations.emplace_back(state.while_iterations,
                                                            state.initial_unsched);
    if (!next) {
      out.status = Status::Infeasible;
      note(out.rounds, "infeasible", "");
      break;
    }
    std::vector<CbsAssignment> added;
    if (reconfigure)
      added = state.placed;
    else
      added.assign(state.placed.begin() + static_cast<std::ptrdiff_t>(before), state.placed.end());
    out.placements_per_round.push_back(added);
    out.margins.push_back(state.margin);
    cfg = std::move(*next);
    note(out.rounds, reconfigure ? "reconfigure" : "place", describe(cfg, added));
    verdict = verify::verify_schedulability(cfg, options.analysis);
    note(out.rounds, "verify", "");
  }
  out.config = cfg;
  out.verdict = std::move(verdict);
  return out;
}

std::vector<nc::PortClass> full_cbs_candidates(const NetworkConfiguration& config) {
  std::vector<nc::PortClass> out;
  for (std::size_t port = 0; port < config.ports().size(); ++port) {
    if (!config.is_switch_port(port) && !config.cbs_on_end_systems()) continue;
    for (int p = 0; p < kPriorityLevels; ++p) {
      const auto& fl = config.flows_at(port, p);
      bool deadline_class =
          !fl.empty() && std::all_of(fl.begin(), fl.end(), [&](std::size_t f) {
            return config.flows()[f].deadline.has_value();
          });
      if (!deadline_class) break;
      out.emplace_back(port, p);
    }
  }
  const auto& ports = config.ports();
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return ports[a.first].id < ports[b.first].id;
    return a.second < b.second;
  });
  return out;
}

BaselineOutcome full_cbs_baseline(const NetworkConfiguration& config,
                                  const FrameworkOptions& options) {
  BaselineOutcome out;
  out.candidates = full_cbs_candidates(config);
  std::set<std::size_t> devs;
  for (const auto& [port, p] : out.candidates) devs.insert(config.ports()[port].device);
  out.candidate_devices = devs.size();

  NetworkConfiguration input = config.without_cbs();
  nc::AnalysisResult analysis = nc::analyze(input, options.analysis);
  Rational m = options.initial_margin;
  for (;;) {
    NetworkConfiguration cfg = input;
    std::vector<nc::PortClass> placed, dropped;
    std::size_t blocked_port = config.ports().size();
    for (const auto& [port, p] : out.candidates) {
      if (port == blocked_port) {
        dropped.emplace_back(port, p);
        continue;
      }
      auto slope = placed_idle_slope(cfg, port, p, m, analysis);
      if (!slope || slope_sum(cfg, port) + *slope > kMaxCbsShare * cfg.ports()[port].capacity) {
        blocked_port = port;
        dropped.emplace_back(port, p);
        continue;
      }
      cfg = cfg.with_cbs({{port, p, *slope}});
      placed.emplace_back(port, p);
    }
    verify::Verdict verdict = verify::verify_schedulability(cfg, options.analysis);
    out.config = cfg;
    out.margin = m;
    out.dropped = dropped;
    if (verdict.unsched_shaped().empty()) {
      out.feasible = dropped.empty() && verdict.all_schedulable();
      out.verdict = std::move(verdict);
      return out;
    }
    Rational floor = margin_floor(cfg, placed, verdict.analysis);
    m -= options.rho;
    if (m <= floor || m <= 0) {
      out.feasible = false;
      out.verdict = std::move(verdict);
      return out;
    }
    analysis = verdict.analysis;
  }
}

}  // namespace tsncbs::deploy
