#include "tsncbs/nc.hpp"

#include <algorithm>
#include <functional>
#include <queue>
#include <set>
#include <stdexcept>

namespace tsncbs::nc {

using curves::leaky_bucket;
using curves::rate_latency;

Rational cred_min(const Rational& idle_slope, const Rational& capacity,
                  const Rational& max_frame) {
  if (idle_slope > capacity) throw std::invalid_argument("idle slope above link capacity");
  return (idle_slope - capacity) * max_frame / capacity;
}

Rational latency_factor(std::span<const HigherCbs> higher, const Rational& max_frame_below,
                        const Rational& capacity) {
  Rational sum_cred = 0, sum_slope = 0;
  for (const auto& h : higher) {
    sum_cred += h.cred_min;
    sum_slope += h.idle_slope;
  }
  if (sum_slope >= capacity)
    throw std::invalid_argument("higher-priority idle slopes saturate the link");
  return (sum_cred - max_frame_below) / (sum_slope - capacity);
}

Rational cred_max(const Rational& idle_slope, std::span<const HigherCbs> higher,
                  const Rational& max_frame_below, const Rational& capacity) {
  return idle_slope * latency_factor(higher, max_frame_below, capacity);
}

namespace {

std::vector<HigherCbs> higher_classes(const NetworkConfiguration& config, std::size_t port,
                                      int priority) {
  std::vector<HigherCbs> out;
  const Rational& c = config.ports()[port].capacity;
  for (int k = 0; k < priority; ++k)
    if (const auto* a = config.cbs_at(port, k))
      out.push_back({a->idle_slope, cred_min(a->idle_slope, c, config.max_frame(port, k))});
  return out;
}

}  // namespace

Rational latency_factor_at(const NetworkConfiguration& config, std::size_t port, int priority) {
  auto higher = higher_classes(config, port, priority);
  return latency_factor(higher, config.max_frame_below(port, priority),
                        config.ports()[port].capacity);
}

CbsParams cbs_params(const NetworkConfiguration& config, std::size_t port, int priority) {
  const auto* a = config.cbs_at(port, priority);
  if (!a) throw std::invalid_argument("no CBS at " + config.ports()[port].id);
  if (a->idle_slope <= 0) throw std::invalid_argument("idle slope must be positive");
  const Rational& c = config.ports()[port].capacity;
  CbsParams p;
  p.idle_slope = a->idle_slope;
  p.cred_min = cred_min(a->idle_slope, c, config.max_frame(port, priority));
  p.latency = latency_factor_at(config, port, priority);
  p.cred_max = p.idle_slope * p.latency;
  return p;
}

PwlCurve cbs_service(const CbsParams& params) {
  return rate_latency(params.idle_slope, params.cred_max / params.idle_slope);
}

PwlCurve npsp_leftover(const Rational& capacity, std::span<const PwlCurve> higher,
                       const Rational& max_frame_below) {
  return curves::subtract_and_close(leaky_bucket(capacity, 0), higher, max_frame_below);
}

PwlCurve output_arrival(const PwlCurve& alpha, const Rational& delay, const Rational& capacity) {
  return curves::min(leaky_bucket(capacity, 0), alpha.shift_left(delay));
}

Bound AnalysisResult::delay_at(std::size_t port, int priority) const {
  auto it = port_delay.find({port, priority});
  if (it == port_delay.end()) return Rational(0);
  return it->second;
}

std::vector<std::pair<std::size_t, std::size_t>> cut_edges(const NetworkConfiguration& config) {
  const auto& ports = config.ports();
  PortGraph g = port_graph(config);
  std::set<std::size_t> source_set;
  for (const auto& f : config.flows()) source_set.insert(f.path.front());
  std::vector<std::size_t> sources(source_set.begin(), source_set.end());
  std::sort(sources.begin(), sources.end(),
            [&](std::size_t a, std::size_t b) { return ports[a].id < ports[b].id; });

  enum Color { White, Gray, Black };
  std::vector<Color> color(ports.size(), White);
  std::vector<std::pair<std::size_t, std::size_t>> cuts;
  for (std::size_t s : sources) {
    if (color[s] != White) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{s, 0}};
    color[s] = Gray;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < g.successors[u].size()) {
        std::size_t v = g.successors[u][next++];
        if (color[v] == Gray)
          cuts.emplace_back(u, v);
        else if (color[v] == White) {
          color[v] = Gray;
          stack.emplace_back(v, 0);
        }
      } else {
        color[u] = Black;
        stack.pop_back();
      }
    }
  }
  std::sort(cuts.begin(), cuts.end(), [&](const auto& a, const auto& b) {
    return std::tie(ports[a.first].id, ports[a.second].id) <
           std::tie(ports[b.first].id, ports[b.second].id);
  });
  return cuts;
}

namespace {

std::vector<std::size_t> topological_order(const NetworkConfiguration& config,
                                           const std::set<std::pair<std::size_t, std::size_t>>& cuts) {
  const auto& ports = config.ports();
  PortGraph g = port_graph(config);
  std::vector<std::size_t> indegree(ports.size(), 0);
  for (const auto& [u, v] : g.edges())
    if (!cuts.count({u, v})) ++indegree[v];
  auto later = [&](std::size_t a, std::size_t b) { return ports[a].id > ports[b].id; };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(later)> ready(later);
  for (std::size_t u = 0; u < ports.size(); ++u)
    if (indegree[u] == 0) ready.push(u);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t u = ready.top();
    ready.pop();
    order.push_back(u);
    for (std::size_t v : g.successors[u])
      if (!cuts.count({u, v}) && --indegree[v] == 0) ready.push(v);
  }
  if (order.size() != ports.size()) throw std::logic_error("port graph still cyclic after cuts");
  return order;
}

using Arrival = std::optional<PwlCurve>;  // nullopt = unbounded

}  // namespace

AnalysisResult tfa_pass(const NetworkConfiguration& config, const CutBursts& cut_bursts,
                        const std::vector<std::pair<std::size_t, std::size_t>>& cuts,
                        const AnalysisOptions& options) {
  const auto& ports = config.ports();
  const auto& flows = config.flows();
  std::set<std::pair<std::size_t, std::size_t>> cut_set(cuts.begin(), cuts.end());
  const bool packetized = options.model == Model::Packetized;

  AnalysisResult r;
  r.cut_edges = cuts;
  r.hop_burst.resize(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    r.hop_burst[f].assign(flows[f].path.size() + 1, std::nullopt);
    r.hop_burst[f][0] = flows[f].burst;
  }

  for (std::size_t port : topological_order(config, cut_set)) {
    const Rational& cap = ports[port].capacity;
    std::vector<Arrival> alpha(kPriorityLevels);
    std::vector<bool> present(kPriorityLevels, false);

    for (int p = 0; p < kPriorityLevels; ++p) {
      const auto& fl = config.flows_at(port, p);
      if (fl.empty()) continue;
      present[p] = true;
      std::map<std::optional<std::size_t>, std::vector<std::size_t>> groups;
      for (std::size_t f : fl) {
        std::size_t h = *config.hop_index(f, port);
        if (h > 0 && cut_set.count({flows[f].path[h - 1], port})) {
          auto it = cut_bursts.find({f, h});
          r.hop_burst[f][h] = it != cut_bursts.end() ? it->second : flows[f].burst;
        }
        groups[h == 0 ? std::nullopt : std::optional(flows[f].path[h - 1])].push_back(f);
      }

      Arrival total = PwlCurve();
      for (const auto& [pred, members] : groups) {
        Arrival group = PwlCurve();
        Rational largest = 0;
        for (std::size_t f : members) {
          std::size_t h = *config.hop_index(f, port);
          largest = max(largest, flows[f].max_frame);
          const Bound& b = r.hop_burst[f][h];
          if (!b || !group)
            group = std::nullopt;
          else
            group = *group + leaky_bucket(flows[f].rate, *b);
        }
        if (pred) {
          const Rational& in_cap = ports[*pred].capacity;
          PwlCurve cap_curve = leaky_bucket(in_cap, packetized ? largest : Rational(0));
          if (config.has_cbs(*pred, p)) {
            CbsParams cp = cbs_params(config, *pred, p);
            Rational burst = cp.cred_max - cp.cred_min;
            if (packetized) burst += cp.idle_slope * config.max_frame(*pred, p) / in_cap;
            cap_curve = curves::min(cap_curve, leaky_bucket(cp.idle_slope, burst));
          }
          group = group ? curves::min(*group, cap_curve) : cap_curve;
        }
        if (!group || !total)
          total = std::nullopt;
        else
          total = *total + *group;
      }
      alpha[p] = total;
      if (total) r.arrival[{port, p}] = *total;
    }

    for (int p = 0; p < kPriorityLevels; ++p) {
      if (!present[p]) continue;
      PwlCurve beta;
      if (config.has_cbs(port, p)) {
        beta = cbs_service(cbs_params(config, port, p));
      } else {
        std::vector<PwlCurve> higher;
        bool saturated = false;
        for (int k = 0; k < p; ++k) {
          if (!present[k]) continue;
          if (config.has_cbs(port, k)) {
            CbsParams cp = cbs_params(config, port, k);
            Rational burst = packetized ? cp.cred_max - cp.cred_min : cp.cred_max;
            PwlCurve shaped = leaky_bucket(cp.idle_slope, burst);
            higher.push_back(alpha[k] ? curves::min(*alpha[k], shaped) : shaped);
          } else if (alpha[k]) {
            higher.push_back(*alpha[k]);
          } else {
            saturated = true;
          }
        }
        beta = saturated ? PwlCurve()
                         : npsp_leftover(cap, higher, config.max_frame_below(port, p));
      }
      r.service[{port, p}] = beta;
      Bound d = alpha[p] ? curves::h_dev(*alpha[p], beta) : Bound();
      r.port_delay[{port, p}] = d;
      for (std::size_t f : config.flows_at(port, p)) {
        std::size_t h = *config.hop_index(f, port);
        if (h + 1 < flows[f].path.size() && cut_set.count({port, flows[f].path[h + 1]})) continue;
        const Bound& b = r.hop_burst[f][h];
        r.hop_burst[f][h + 1] = (b && d) ? Bound(*b + flows[f].rate * *d) : Bound();
      }
    }
  }

  r.flow_delay.resize(flows.size());
  r.source_delay.resize(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    Bound total = config.propagation_delay(f);
    for (std::size_t port : flows[f].path) {
      Bound d = r.delay_at(port, flows[f].priority);
      total = (total && d) ? Bound(*total + *d) : Bound();
    }
    r.flow_delay[f] = total;
    r.source_delay[f] = r.delay_at(flows[f].path.front(), flows[f].priority);
  }
  return r;
}

CutBursts cut_outputs(const NetworkConfiguration& config, const AnalysisResult& pass,
                      const std::vector<std::pair<std::size_t, std::size_t>>& cuts) {
  CutBursts out;
  std::set<std::pair<std::size_t, std::size_t>> cut_set(cuts.begin(), cuts.end());
  const auto& flows = config.flows();
  for (std::size_t f = 0; f < flows.size(); ++f)
    for (std::size_t h = 1; h < flows[f].path.size(); ++h)
      if (cut_set.count({flows[f].path[h - 1], flows[f].path[h]})) {
        const Bound& b = pass.hop_burst[f][h - 1];
        Bound d = pass.delay_at(flows[f].path[h - 1], flows[f].priority);
        out[{f, h}] = (b && d) ? Bound(*b + flows[f].rate * *d) : Bound();
      }
  return out;
}

AnalysisResult analyze(const NetworkConfiguration& config, const AnalysisOptions& options) {
  auto cuts = cut_edges(config);
  CutBursts state;
  const auto& flows = config.flows();
  for (std::size_t f = 0; f < flows.size(); ++f)
    for (std::size_t h = 1; h < flows[f].path.size(); ++h)
      if (std::find(cuts.begin(), cuts.end(), std::make_pair(flows[f].path[h - 1],
                                                             flows[f].path[h])) != cuts.end())
        state[{f, h}] = flows[f].burst;
  if (state.empty()) {
    AnalysisResult r = tfa_pass(config, state, cuts, options);
    r.iterations = 1;
    return r;
  }

  const CutBursts initial = state;
  for (unsigned it = 1; it <= options.max_iterations; ++it) {
    AnalysisResult pass = tfa_pass(config, state, cuts, options);
    CutBursts next = cut_outputs(config, pass, cuts);
    bool converged = true, diverged = false;
    for (auto& [key, value] : next) {
      if (value) value = ceil_to_grid(*value, options.burst_grid);
      const Bound& old = state[key];
      const Bound& start = initial.at(key);
      Rational scale = start ? max(*start, flows[key.first].max_frame) : Rational(0);
      if (value && start && *value > options.divergence_factor * scale) diverged = true;
      if (!value && !old) continue;
      if (!value || !old) {
        converged = false;
        continue;
      }
      if (abs(*value - *old) > options.tolerance * abs(*old)) converged = false;
    }
    state = std::move(next);
    if (diverged) break;
    if (converged) {
      AnalysisResult r = tfa_pass(config, state, cuts, options);
      r.iterations = it;
      r.converged = true;
      return r;
    }
  }
  for (auto& [key, value] : state) value.reset();
  AnalysisResult r = tfa_pass(config, state, cuts, options);
  r.iterations = options.max_iterations;
  r.converged = false;
  return r;
}

}  // namespace tsncbs::nc
