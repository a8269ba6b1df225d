#include "tsncbs/model.hpp"

#include <algorithm>
#include <set>

namespace tsncbs {

NetworkConfiguration::NetworkConfiguration(std::vector<Device> devices,
                                           std::vector<OutputPort> ports, std::vector<Flow> flows,
                                           std::vector<CbsAssignment> cbs,
                                           bool cbs_on_end_systems)
    : devices_(std::move(devices)),
      ports_(std::move(ports)),
      flows_(std::move(flows)),
      cbs_(std::move(cbs)),
      cbs_on_end_systems_(cbs_on_end_systems) {
  index();
}

void NetworkConfiguration::index() {
  device_index_.clear();
  port_index_.clear();
  flow_index_.clear();
  for (std::size_t i = 0; i < devices_.size(); ++i)
    if (!device_index_.emplace(devices_[i].id, i).second)
      throw ConfigError("devices[" + std::to_string(i) + "]", "duplicate id " + devices_[i].id);
  for (std::size_t i = 0; i < ports_.size(); ++i) {
    const auto& p = ports_[i];
    std::string where = "ports[" + std::to_string(i) + "]";
    if (!port_index_.emplace(p.id, i).second) throw ConfigError(where, "duplicate id " + p.id);
    if (p.device >= devices_.size()) throw ConfigError(where, "unknown device");
    if (p.capacity <= 0) throw ConfigError(where, "capacity must be positive");
    if (p.prop_delay < 0) throw ConfigError(where, "negative propagation delay");
    if (p.peer_device && *p.peer_device >= devices_.size())
      throw ConfigError(where, "unknown link target");
  }
  for (std::size_t i = 0; i < flows_.size(); ++i) {
    const auto& f = flows_[i];
    std::string where = "flows[" + std::to_string(i) + "]";
    if (!flow_index_.emplace(f.id, i).second) throw ConfigError(where, "duplicate id " + f.id);
    if (f.priority < 0 || f.priority >= kPriorityLevels)
      throw ConfigError(where, "priority out of range 0..7");
    if (f.rate < 0) throw ConfigError(where, "negative rate");
    if (f.burst && *f.burst < 0) throw ConfigError(where, "negative burst");
    if (f.max_frame <= 0) throw ConfigError(where, "frame size must be positive");
    if (f.deadline && *f.deadline <= 0) throw ConfigError(where, "deadline must be positive");
    if (f.path.empty()) throw ConfigError(where, "empty path");
    std::set<std::size_t> seen;
    for (std::size_t h = 0; h < f.path.size(); ++h) {
      if (f.path[h] >= ports_.size()) throw ConfigError(where, "unknown port in path");
      if (!seen.insert(f.path[h]).second)
        throw ConfigError(where, "path visits port " + ports_[f.path[h]].id + " twice");
      if (h > 0) {
        const auto& prev = ports_[f.path[h - 1]];
        if (prev.peer_device && *prev.peer_device != ports_[f.path[h]].device)
          throw ConfigError(where, "port " + prev.id + " does not lead to the device of " +
                                       ports_[f.path[h]].id);
      }
    }
  }

  flows_at_.assign(ports_.size(), std::vector<std::vector<std::size_t>>(kPriorityLevels));
  for (std::size_t i = 0; i < flows_.size(); ++i)
    for (std::size_t port : flows_[i].path) flows_at_[port][flows_[i].priority].push_back(i);
  auto by_id = [this](std::size_t a, std::size_t b) { return flows_[a].id < flows_[b].id; };
  for (auto& per_port : flows_at_)
    for (auto& list : per_port) std::sort(list.begin(), list.end(), by_id);

  device_ports_.assign(devices_.size(), {});
  for (const auto& [id, i] : port_index_) device_ports_[ports_[i].device].push_back(i);

  cbs_index_.clear();
  std::sort(cbs_.begin(), cbs_.end(), [this](const CbsAssignment& a, const CbsAssignment& b) {
    if (a.port != b.port) return ports_[a.port].id < ports_[b.port].id;
    return a.priority < b.priority;
  });
  for (std::size_t i = 0; i < cbs_.size(); ++i) {
    const auto& c = cbs_[i];
    if (c.port >= ports_.size()) throw ConfigError("cbs[" + std::to_string(i) + "]", "unknown port");
    if (c.priority < 0 || c.priority >= kPriorityLevels)
      throw ConfigError("cbs[" + std::to_string(i) + "]", "priority out of range 0..7");
    cbs_index_.emplace(std::make_pair(c.port, c.priority), i);
  }
}

std::optional<std::size_t> NetworkConfiguration::find_device(std::string_view id) const {
  auto it = device_index_.find(id);
  if (it == device_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> NetworkConfiguration::find_port(std::string_view id) const {
  auto it = port_index_.find(id);
  if (it == port_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> NetworkConfiguration::find_flow(std::string_view id) const {
  auto it = flow_index_.find(id);
  if (it == flow_index_.end()) return std::nullopt;
  return it->second;
}

const std::vector<std::size_t>& NetworkConfiguration::flows_at(std::size_t port,
                                                               int priority) const {
  return flows_at_[port][static_cast<std::size_t>(priority)];
}

const std::vector<std::size_t>& NetworkConfiguration::ports_of_device(std::size_t device) const {
  return device_ports_[device];
}

std::vector<std::size_t> NetworkConfiguration::flows_through_device(std::size_t device) const {
  std::set<std::size_t> out;
  for (std::size_t port : device_ports_[device])
    for (int p = 0; p < kPriorityLevels; ++p)
      for (std::size_t f : flows_at(port, p)) out.insert(f);
  return {out.begin(), out.end()};
}

std::optional<std::size_t> NetworkConfiguration::hop_index(std::size_t flow,
                                                           std::size_t port) const {
  const auto& path = flows_[flow].path;
  auto it = std::find(path.begin(), path.end(), port);
  if (it == path.end()) return std::nullopt;
  return static_cast<std::size_t>(it - path.begin());
}

Rational NetworkConfiguration::aggregate_rate(std::size_t port, int priority) const {
  Rational r = 0;
  for (std::size_t f : flows_at(port, priority)) r += flows_[f].rate;
  return r;
}

Rational NetworkConfiguration::max_frame(std::size_t port, int priority) const {
  Rational l = 0;
  for (std::size_t f : flows_at(port, priority)) l = max(l, flows_[f].max_frame);
  return l;
}

Rational NetworkConfiguration::max_frame_below(std::size_t port, int priority) const {
  Rational l = 0;
  for (int q = priority + 1; q < kPriorityLevels; ++q) l = max(l, max_frame(port, q));
  return l;
}

const CbsAssignment* NetworkConfiguration::cbs_at(std::size_t port, int priority) const {
  auto it = cbs_index_.find({port, priority});
  return it == cbs_index_.end() ? nullptr : &cbs_[it->second];
}

bool NetworkConfiguration::tsn_enabled(std::size_t device) const {
  return std::any_of(cbs_.begin(), cbs_.end(),
                     [&](const CbsAssignment& c) { return ports_[c.port].device == device; });
}

std::size_t NetworkConfiguration::tsn_device_count() const {
  std::set<std::size_t> devs;
  for (const auto& c : cbs_) devs.insert(ports_[c.port].device);
  return devs.size();
}

NetworkConfiguration NetworkConfiguration::with_cbs(const std::vector<CbsAssignment>& added) const {
  std::vector<CbsAssignment> all;
  for (const auto& c : cbs_) {
    bool replaced = std::any_of(added.begin(), added.end(), [&](const CbsAssignment& a) {
      return a.port == c.port && a.priority == c.priority;
    });
    if (!replaced) all.push_back(c);
  }
  all.insert(all.end(), added.begin(), added.end());
  return NetworkConfiguration(devices_, ports_, flows_, std::move(all), cbs_on_end_systems_);
}

NetworkConfiguration NetworkConfiguration::without_cbs() const {
  return NetworkConfiguration(devices_, ports_, flows_, {}, cbs_on_end_systems_);
}

std::vector<ConstraintViolation> NetworkConfiguration::validate() const {
  std::vector<ConstraintViolation> out;
  std::set<std::pair<std::size_t, int>> seen;
  std::map<std::size_t, Rational> slope_sum;
  for (const auto& c : cbs_) {
    const std::string& pid = ports_[c.port].id;
    std::string where = pid + " p" + std::to_string(c.priority);
    if (!seen.insert({c.port, c.priority}).second)
      out.push_back({"9e", where + ": more than one CBS instance for the class"});
    if (c.idle_slope <= 0 || c.idle_slope > ports_[c.port].capacity)
      out.push_back({"input", where + ": idle slope must lie in (0, C]"});
    if (!cbs_on_end_systems_ && !is_switch_port(c.port))
      out.push_back({"input", where + ": CBS on an end-system port is disabled"});
    Rational r = aggregate_rate(c.port, c.priority);
    if (c.idle_slope < r)
      out.push_back({"9b", where + ": idle slope " + to_fixed(c.idle_slope, 0) +
                               " below class rate " + to_fixed(r, 0)});
    slope_sum[c.port] += c.idle_slope;
    for (int k = 0; k < c.priority; ++k)
      if (!has_cbs(c.port, k)) {
        out.push_back({"9c", where + ": CBS priorities must be contiguous from 0"});
        break;
      }
  }
  for (const auto& [port, total] : slope_sum)
    if (total > kMaxCbsShare * ports_[port].capacity)
      out.push_back({"9a", ports_[port].id + ": idle slopes sum to " + to_fixed(total, 0) +
                               " above 0.75 C"});
  return out;
}

Rational NetworkConfiguration::propagation_delay(std::size_t flow) const {
  Rational d = 0;
  for (std::size_t port : flows_[flow].path) d += ports_[port].prop_delay;
  return d;
}

std::vector<std::pair<std::size_t, std::size_t>> PortGraph::edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t u = 0; u < successors.size(); ++u)
    for (std::size_t v : successors[u]) out.emplace_back(u, v);
  return out;
}

PortGraph port_graph(const NetworkConfiguration& config) {
  const auto& ports = config.ports();
  std::vector<std::set<std::size_t>> succ(ports.size());
  for (const auto& f : config.flows())
    for (std::size_t h = 0; h + 1 < f.path.size(); ++h) succ[f.path[h]].insert(f.path[h + 1]);
  PortGraph g;
  g.successors.resize(ports.size());
  for (std::size_t u = 0; u < ports.size(); ++u) {
    g.successors[u].assign(succ[u].begin(), succ[u].end());
    std::sort(g.successors[u].begin(), g.successors[u].end(),
              [&](std::size_t a, std::size_t b) { return ports[a].id < ports[b].id; });
  }
  return g;
}

}  // namespace tsncbs
