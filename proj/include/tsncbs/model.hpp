#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tsncbs/rational.hpp"

namespace tsncbs {

inline constexpr int kPriorityLevels = 8;

enum class DeviceKind { Switch, EndSystem };

struct Device {
  std::string id;
  DeviceKind kind = DeviceKind::Switch;
};

/// Output port together with the link it drives.
struct OutputPort {
  std::string id;
  std::size_t device = 0;
  Rational capacity;    // bit/s
  Rational prop_delay;  // s, on the link leaving this port
  std::optional<std::size_t> peer_device;  // device at the other end of the link
};

/// Unicast flow; multicast sources are expanded into one Flow per destination.
struct Flow {
  std::string id;
  std::string group;  // original flow name before expansion
  Rational rate;      // bit/s
  Bound burst;        // bits, nullopt = unbounded
  Rational max_frame; // bits
  std::optional<Rational> deadline;  // s
  int priority = 0;
  std::vector<std::size_t> path;  // output ports, source ES port first
};

struct CbsAssignment {
  std::size_t port = 0;
  int priority = 0;
  Rational idle_slope;  // bit/s
  bool operator==(const CbsAssignment&) const = default;
};

struct ConstraintViolation {
  std::string constraint;  // "9a", "9b", "9c", "9e" or "input"
  std::string message;
};

/// Raised for malformed configuration input; `where` locates the offending field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& message)
      : std::runtime_error(where.empty() ? message : where + ": " + message),
        where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

class NetworkConfiguration {
 public:
  NetworkConfiguration() = default;
  NetworkConfiguration(std::vector<Device> devices, std::vector<OutputPort> ports,
                       std::vector<Flow> flows, std::vector<CbsAssignment> cbs,
                       bool cbs_on_end_systems = false);

  const std::vector<Device>& devices() const { return devices_; }
  const std::vector<OutputPort>& ports() const { return ports_; }
  const std::vector<Flow>& flows() const { return flows_; }
  const std::vector<CbsAssignment>& cbs() const { return cbs_; }
  bool cbs_on_end_systems() const { return cbs_on_end_systems_; }

  std::optional<std::size_t> find_device(std::string_view id) const;
  std::optional<std::size_t> find_port(std::string_view id) const;
  std::optional<std::size_t> find_flow(std::string_view id) const;

  const Device& device_of(std::size_t port) const { return devices_[ports_[port].device]; }
  bool is_switch_port(std::size_t port) const {
    return device_of(port).kind == DeviceKind::Switch;
  }

  /// F(op, p): flows of priority p through the port, ordered by id.
  const std::vector<std::size_t>& flows_at(std::size_t port, int priority) const;
  /// Output ports of the device, ordered by id.
  const std::vector<std::size_t>& ports_of_device(std::size_t device) const;
  /// F(dev): flows crossing any output port of the device.
  std::vector<std::size_t> flows_through_device(std::size_t device) const;
  /// Index of `port` in the path of `flow`, if any.
  std::optional<std::size_t> hop_index(std::size_t flow, std::size_t port) const;

  /// r_op^p.
  Rational aggregate_rate(std::size_t port, int priority) const;
  /// L^p at the port (largest frame of that class), 0 if none.
  Rational max_frame(std::size_t port, int priority) const;
  /// L^{>p,max}: largest frame of a strictly lower priority at the port.
  Rational max_frame_below(std::size_t port, int priority) const;

  const CbsAssignment* cbs_at(std::size_t port, int priority) const;
  bool has_cbs(std::size_t port, int priority) const { return cbs_at(port, priority) != nullptr; }
  bool tsn_enabled(std::size_t device) const;
  std::size_t tsn_device_count() const;

  /// Copy with the given assignments added (existing (port, priority) entries are replaced).
  NetworkConfiguration with_cbs(const std::vector<CbsAssignment>& added) const;
  /// Copy without any CBS assignment.
  NetworkConfiguration without_cbs() const;

  /// Constraints 9a (0.75 C), 9b (I >= r), 9c (contiguous from 0) and 9e (one instance per class).
  std::vector<ConstraintViolation> validate() const;

  /// Sum of propagation delays along the flow's path.
  Rational propagation_delay(std::size_t flow) const;

 private:
  void index();

  std::vector<Device> devices_;
  std::vector<OutputPort> ports_;
  std::vector<Flow> flows_;
  std::vector<CbsAssignment> cbs_;
  bool cbs_on_end_systems_ = false;

  std::map<std::string, std::size_t, std::less<>> device_index_, port_index_, flow_index_;
  std::vector<std::vector<std::vector<std::size_t>>> flows_at_;  // [port][priority]
  std::vector<std::vector<std::size_t>> device_ports_;
  std::map<std::pair<std::size_t, int>, std::size_t> cbs_index_;
};

/// Edges between consecutive ports of flow paths.
struct PortGraph {
  std::vector<std::vector<std::size_t>> successors;  // ordered by port id
  std::vector<std::pair<std::size_t, std::size_t>> edges() const;
};

PortGraph port_graph(const NetworkConfiguration& config);

/// Maximum utilisation 0.75 C allowed for the sum of idle slopes at a port.
inline const Rational kMaxCbsShare{3, 4};

}  // namespace tsncbs
