#include "tsncbs/verify.hpp"

namespace tsncbs::verify {

const char* class_name(FlowClass c) {
  switch (c) {
    case FlowClass::Schedulable: return "SCHED";
    case FlowClass::UnschedShaped: return "UNSCHED_SHAPED";
    case FlowClass::UnschedNonShaped: return "UNSCHED_NONSHAPED";
    case FlowClass::BestEffort: return "BEST_EFFORT";
  }
  return "?";
}

bool Verdict::all_schedulable() const {
  for (FlowClass c : classes)
    if (c == FlowClass::UnschedShaped || c == FlowClass::UnschedNonShaped) return false;
  return true;
}

std::vector<std::size_t> Verdict::of(FlowClass c) const {
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < classes.size(); ++f)
    if (classes[f] == c) out.push_back(f);
  return out;
}

bool is_shaped(const NetworkConfiguration& config, std::size_t flow) {
  const auto& f = config.flows()[flow];
  for (std::size_t port : f.path)
    if (config.has_cbs(port, f.priority)) return true;
  return false;
}

Verdict classify(const NetworkConfiguration& config, nc::AnalysisResult analysis) {
  Verdict v;
  const auto& flows = config.flows();
  v.classes.resize(flows.size());
  v.slack.resize(flows.size());
  for (std::size_t f = 0; f < flows.size(); ++f) {
    const Bound& d = analysis.flow_delay[f];
    if (!flows[f].deadline) {
      v.classes[f] = FlowClass::BestEffort;
      continue;
    }
    if (d) v.slack[f] = *flows[f].deadline - *d;
    if (d && *d <= *flows[f].deadline)
      v.classes[f] = FlowClass::Schedulable;
    else
      v.classes[f] = is_shaped(config, f) ? FlowClass::UnschedShaped : FlowClass::UnschedNonShaped;
  }
  v.analysis = std::move(analysis);
  return v;
}

Verdict verify_schedulability(const NetworkConfiguration& config,
                              const nc::AnalysisOptions& options) {
  return classify(config, nc::analyze(config, options));
}

std::vector<std::size_t> precondition_violations(const NetworkConfiguration& config,
                                                 const nc::AnalysisOptions& options) {
  Verdict v = verify_schedulability(config.without_cbs(), options);
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < config.flows().size(); ++f)
    if (config.flows()[f].priority == 0 && config.flows()[f].deadline &&
        v.classes[f] != FlowClass::Schedulable)
      out.push_back(f);
  return out;
}

}  // namespace tsncbs::verify
