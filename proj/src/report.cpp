#include "tsncbs/report.hpp"

#include <algorithm>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tsncbs::report {

namespace {

std::string us(const Bound& s) { return s ? to_fixed(us_from_seconds(*s), 3) : "inf"; }

void analysis_rows(std::ostringstream& os, const NetworkConfiguration& config,
                   const nc::AnalysisResult& analysis, const verify::Verdict* verdict) {
  for (std::size_t f = 0; f < config.flows().size(); ++f) {
    const Flow& flow = config.flows()[f];
    const Bound& d = analysis.flow_delay[f];
    os << flow.id << ',' << flow.priority << ',' << us(d) << ',';
    if (flow.deadline) os << us(*flow.deadline);
    os << ',';
    if (flow.deadline) os << ((d && *d <= *flow.deadline) ? "yes" : "no");
    if (verdict) os << ',' << verify::class_name(verdict->classes[f]);
    os << '\n';
  }
}

}  // namespace

std::string analysis_csv(const NetworkConfiguration& config, const nc::AnalysisResult& analysis) {
  std::ostringstream os;
  os << "flow,priority,delay_us,deadline_us,schedulable\n";
  analysis_rows(os, config, analysis, nullptr);
  return os.str();
}

std::string verdict_csv(const NetworkConfiguration& config, const verify::Verdict& verdict) {
  std::ostringstream os;
  os << "flow,priority,delay_us,deadline_us,schedulable,class\n";
  analysis_rows(os, config, verdict.analysis, &verdict);
  return os.str();
}

std::string analysis_json(const NetworkConfiguration& config,
                          const nc::AnalysisResult& analysis) {
  using nlohmann::json;
  json doc;
  doc["converged"] = analysis.converged;
  doc["iterations"] = analysis.iterations;
  doc["cut_edges"] = json::array();
  for (const auto& [u, v] : analysis.cut_edges)
    doc["cut_edges"].push_back({config.ports()[u].id, config.ports()[v].id});
  doc["ports"] = json::array();
  for (const auto& [key, d] : analysis.port_delay) {
    json e = {{"port", config.ports()[key.first].id},
              {"priority", key.second},
              {"delay_us", us(d)}};
    doc["ports"].push_back(e);
  }
  doc["flows"] = json::array();
  for (std::size_t f = 0; f < config.flows().size(); ++f) {
    const Flow& flow = config.flows()[f];
    json e = {{"flow", flow.id},
              {"priority", flow.priority},
              {"delay_us", us(analysis.flow_delay[f])},
              {"source_delay_us", us(analysis.source_delay[f])}};
    if (flow.deadline) e["deadline_us"] = us(*flow.deadline);
    doc["flows"].push_back(e);
  }
  return doc.dump(2) + "\n";
}

std::string placement_csv(const NetworkConfiguration& config) {
  std::ostringstream os;
  os << "device,port,priority,idleslope_bps\n";
  for (const auto& c : config.cbs())
    os << config.device_of(c.port).id << ',' << config.ports()[c.port].id << ',' << c.priority
       << ',' << to_fixed(c.idle_slope, 0) << '\n';
  return os.str();
}

std::string framework_trace_csv(const deploy::FrameworkOutcome& outcome) {
  std::ostringstream os;
  os << "round,action,margin,placements,unsched_shaped,unsched_non_shaped\n";
  for (const auto& t : outcome.trace)
    os << t.round << ',' << t.action << ',' << to_fixed(t.margin, 4) << ',' << t.placements << ','
       << t.unsched_shaped << ',' << t.unsched_non_shaped << '\n';
  return os.str();
}

std::string cdf_csv(const NetworkConfiguration& config, const nc::AnalysisResult& analysis,
                    int priority) {
  std::vector<Bound> delays;
  for (std::size_t f = 0; f < config.flows().size(); ++f)
    if (config.flows()[f].priority == priority) delays.push_back(analysis.flow_delay[f]);
  std::sort(delays.begin(), delays.end(), [](const Bound& a, const Bound& b) {
    if (!a || !b) return a.has_value() && !b.has_value();
    return *a < *b;
  });
  std::ostringstream os;
  os << "delay_us,cumulative_fraction\n";
  for (std::size_t i = 0; i < delays.size(); ++i)
    os << us(delays[i]) << ','
       << to_fixed(ratio(static_cast<long>(i + 1), static_cast<long>(delays.size())), 6) << '\n';
  return os.str();
}

std::string sim_summary_csv(const NetworkConfiguration& config,
                            const std::vector<sim::FlowSummary>& rows) {
  std::ostringstream os;
  os << "flow,observed_max_us,nc_bound_us,margin_pct\n";
  for (const auto& r : rows) {
    os << config.flows()[r.flow].id << ',' << (r.observed ? us(*r.observed) : "") << ','
       << us(r.bound) << ',';
    if (r.observed && r.bound && *r.bound > 0)
      os << to_fixed(Rational((*r.bound - *r.observed) / *r.bound * 100), 2);
    os << '\n';
  }
  return os.str();
}

std::string sim_trace_csv(const NetworkConfiguration& config, const sim::SimResult& result) {
  std::ostringstream os;
  os << "time_us,port,priority,event,credit_bits,frame_id\n";
  for (const auto& t : result.trace) {
    os << to_fixed(us_from_seconds(t.time), 6) << ',' << config.ports()[t.port].id << ','
       << t.priority << ',' << t.event << ',';
    if (t.credit) os << to_fixed(*t.credit, 3);
    os << ',' << t.frame << '\n';
  }
  return os.str();
}

Reduction reduction(std::size_t partial, std::size_t full) {
  Reduction r{partial, full, 0};
  if (full > 0)
    r.fraction = 1 - ratio(static_cast<long>(partial), static_cast<long>(full));
  return r;
}

std::string format_reduction(const Reduction& r) {
  Rational pct = r.fraction * 100;
  return floor_int(pct).get_str() + "% (" + to_fixed(pct, 1) + "%)";
}

}  // namespace tsncbs::report
