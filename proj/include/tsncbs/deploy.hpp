#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tsncbs/verify.hpp"

namespace tsncbs::deploy {

struct DeploymentState {
  Rational margin{1};
  Rational rho{1, 20};
  std::set<std::size_t> excluded_devices;
  std::set<std::size_t> shaped_flows;
  std::vector<CbsAssignment> placed;
  /// While-iterations of the last placement branch and the size of its starting set.
  std::size_t while_iterations = 0;
  std::size_t initial_unsched = 0;
};

struct LocalDeadline {
  Rational value;  // s
  std::size_t verif_flow = 0;
};

/// Local deadline budget; nullopt if some source delay is unbounded.
/// Throws std::invalid_argument if F(op,p) is empty or holds a flow without deadline.
std::optional<LocalDeadline> local_deadline(const NetworkConfiguration& config, std::size_t port,
                                           int priority, const nc::AnalysisResult& analysis);

/// Lower bound on the idle slope; nullopt when D*m <= T.
std::optional<Rational> min_idle_slope(const NetworkConfiguration& config, std::size_t port,
                                       int priority, const Rational& margin,
                                       const nc::AnalysisResult& analysis);

/// Minimum idle slope clamped to the class rate (9b) and rounded up to whole bit/s.
std::optional<Rational> placed_idle_slope(const NetworkConfiguration& config, std::size_t port,
                                          int priority, const Rational& margin,
                                          const nc::AnalysisResult& analysis);

/// Largest d - D among the numerically smallest priority; ties by id.
std::size_t most_constrained_flow(const NetworkConfiguration& config,
                                  const std::vector<std::size_t>& unsched,
                                  const verify::Verdict& verdict);

/// Smallest priority without CBS at the port if it can take one below `below`.
std::optional<int> highest_non_shaped_priority(const NetworkConfiguration& config,
                                               std::size_t port, int below,
                                               const verify::Verdict& verdict);

/// First device on the flow's path whose output port there can shape a higher level.
std::optional<std::size_t> select_device(const NetworkConfiguration& config, std::size_t foi,
                                         const std::set<std::size_t>& excluded,
                                         const verify::Verdict& verdict);

/// Candidate ports of the device for the given flow priority, most constrained first.
std::vector<std::size_t> ordered_ports(const NetworkConfiguration& config, std::size_t device,
                                       int foi_priority, const std::vector<std::size_t>& unsched,
                                       const verify::Verdict& verdict);

/// Placement loop for one flow.
/// nullopt on margin floor, infeasible recompute or no eligible device.
std::optional<NetworkConfiguration> partial_cbs_deployment(DeploymentState& state,
                                                           const NetworkConfiguration& config,
                                                           const verify::Verdict& verdict);

enum class Status { Success, Infeasible, BudgetExceeded, PreconditionViolated };
const char* status_name(Status s);

struct TraceEntry {
  std::size_t round = 0;
  std::string action;
  Rational margin;
  std::string placements;
  std::size_t unsched_shaped = 0;
  std::size_t unsched_non_shaped = 0;
};

struct FrameworkOptions {
  Rational initial_margin{1};
  Rational rho{1, 20};
  std::size_t max_rounds = 50;
  nc::AnalysisOptions analysis;
};

struct FrameworkOutcome {
  Status status = Status::Infeasible;
  NetworkConfiguration config;
  verify::Verdict verdict;
  std::size_t rounds = 0;
  std::vector<Rational> margins;
  std::vector<std::vector<CbsAssignment>> placements_per_round;
  std::vector<TraceEntry> trace;
  /// (while-iterations, initial unsched non-shaped) for every placement branch run.
  std::vector<std::pair<std::size_t, std::size_t>> placement_iterations;
  std::vector<std::size_t> precondition_flows;
};

FrameworkOutcome run_framework(const NetworkConfiguration& config,
                               const FrameworkOptions& options = {});

/// (port, priority) pairs a full deployment would shape.
std::vector<nc::PortClass> full_cbs_candidates(const NetworkConfiguration& config);

struct BaselineOutcome {
  bool feasible = false;
  NetworkConfiguration config;
  verify::Verdict verdict;
  Rational margin{1};
  std::vector<nc::PortClass> candidates;
  std::vector<nc::PortClass> dropped;  // candidates no idle slope could be found for
  std::size_t candidate_devices = 0;
};

BaselineOutcome full_cbs_baseline(const NetworkConfiguration& config,
                                  const FrameworkOptions& options = {});

}  // namespace tsncbs::deploy
