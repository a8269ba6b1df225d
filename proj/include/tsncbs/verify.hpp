#pragma once

#include <vector>

#include "tsncbs/nc.hpp"

namespace tsncbs::verify {

enum class FlowClass { Schedulable, UnschedShaped, UnschedNonShaped, BestEffort };

const char* class_name(FlowClass c);

struct Verdict {
  nc::AnalysisResult analysis;
  std::vector<FlowClass> classes;  // indexed by flow
  std::vector<Bound> slack;        // D - d (seconds), nullopt if unbounded or no deadline

  std::vector<std::size_t> schedulable() const { return of(FlowClass::Schedulable); }
  std::vector<std::size_t> unsched_shaped() const { return of(FlowClass::UnschedShaped); }
  std::vector<std::size_t> unsched_non_shaped() const { return of(FlowClass::UnschedNonShaped); }
  bool all_schedulable() const;
  std::vector<std::size_t> of(FlowClass c) const;
};

/// A flow is shaped when some port on its path has CBS for its priority.
bool is_shaped(const NetworkConfiguration& config, std::size_t flow);

/// Deadline test d <= D on a finished analysis.
Verdict classify(const NetworkConfiguration& config, nc::AnalysisResult analysis);

Verdict verify_schedulability(const NetworkConfiguration& config,
                              const nc::AnalysisOptions& options = {});

/// Deadline flows of priority 0 that miss their deadline with no CBS anywhere.
std::vector<std::size_t> precondition_violations(const NetworkConfiguration& config,
                                                 const nc::AnalysisOptions& options = {});

}  // namespace tsncbs::verify
