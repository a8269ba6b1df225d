#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsncbs/nc.hpp"

namespace tsncbs::sim {

enum class ArrivalModel {
  /// Whole burst at the flow's start offset, then one frame every L/r.
  GreedyBurst,
  /// One frame every L/r, each delayed by a random jitter up to (b - L)/r.
  PeriodicJitter,
};

struct SimScenario {
  NetworkConfiguration config;
  Rational horizon;  // s; frames are created in [0, horizon)
  std::uint64_t seed = 1;
  ArrivalModel model = ArrivalModel::GreedyBurst;
  /// Greedy model: start offsets are drawn uniformly from [0, offset_spread).
  Rational offset_spread{0};
  bool record_trace = false;
};

struct TraceRecord {
  Rational time;
  std::size_t port = 0;
  int priority = 0;
  std::string event;
  std::optional<Rational> credit;
  std::uint64_t frame = 0;
};

struct CreditExtrema {
  Rational min;
  Rational max;
};

struct SimResult {
  std::vector<std::optional<Rational>> max_delay;  // per flow, s
  std::vector<std::size_t> delivered;             // frames per flow
  std::map<nc::PortClass, CreditExtrema> credit;
  std::vector<TraceRecord> trace;
  std::size_t frames = 0;
};

SimResult simulate(const SimScenario& scenario);

struct FlowSummary {
  std::size_t flow = 0;
  std::optional<Rational> observed;  // s
  Bound bound;                       // s
  bool violation = false;
};

/// Observed maximum against the analytical bound for every flow.
std::vector<FlowSummary> summarize(const NetworkConfiguration& config, const SimResult& result,
                                   const nc::AnalysisResult& analysis);

struct BlockingRow {
  std::size_t flow = 0;
  std::optional<Rational> with_cbs;
  std::optional<Rational> without_cbs;
};

/// Observed priority-0 delays of `shaped` against `reference` under the same arrivals.
std::vector<BlockingRow> blocking_demo(const NetworkConfiguration& shaped,
                                       const NetworkConfiguration& reference,
                                       const Rational& horizon, std::uint64_t seed);

/// Same, against the configuration with every CBS removed.
std::vector<BlockingRow> blocking_demo(const NetworkConfiguration& shaped,
                                       const Rational& horizon, std::uint64_t seed);

}  // namespace tsncbs::sim
