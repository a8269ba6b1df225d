#pragma once

#include <string>

#include "tsncbs/deploy.hpp"
#include "tsncbs/simcheck.hpp"

namespace tsncbs::report {

/// flow,priority,delay_us,deadline_us,schedulable
std::string analysis_csv(const NetworkConfiguration& config, const nc::AnalysisResult& analysis);

/// analysis_csv columns plus class.
std::string verdict_csv(const NetworkConfiguration& config, const verify::Verdict& verdict);

/// Per (port, priority) delay bounds and arrival/service summaries as JSON.
std::string analysis_json(const NetworkConfiguration& config, const nc::AnalysisResult& analysis);

/// device,port,priority,idleslope_bps for every CBS instance.
std::string placement_csv(const NetworkConfiguration& config);

/// round,action,margin,placements,unsched_shaped,unsched_non_shaped
std::string framework_trace_csv(const deploy::FrameworkOutcome& outcome);

/// delay_us,cumulative_fraction over the flows of one priority.
std::string cdf_csv(const NetworkConfiguration& config, const nc::AnalysisResult& analysis,
                    int priority);

/// flow,observed_max_us,nc_bound_us,margin_pct
std::string sim_summary_csv(const NetworkConfiguration& config,
                            const std::vector<sim::FlowSummary>& rows);

/// time_us,port,priority,event,credit_bits,frame_id
std::string sim_trace_csv(const NetworkConfiguration& config, const sim::SimResult& result);

struct Reduction {
  std::size_t partial = 0;
  std::size_t full = 0;
  Rational fraction;  // 1 - partial / full
};

Reduction reduction(std::size_t partial, std::size_t full);

/// "71% (71.4%)": whole percent rounded down, then one decimal.
std::string format_reduction(const Reduction& r);

}  // namespace tsncbs::report
