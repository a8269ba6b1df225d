#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "tsncbs/curves.hpp"
#include "tsncbs/model.hpp"

namespace tsncbs::nc {

using curves::PwlCurve;

/// credMin = (I - C) * L / C.
Rational cred_min(const Rational& idle_slope, const Rational& capacity, const Rational& max_frame);

/// One higher-priority CBS class at the same port.
struct HigherCbs {
  Rational idle_slope;
  Rational cred_min;
};

/// credMax = I * (sum credMin_k - L^{>p,max}) / (sum I_k - C) over higher classes k.
Rational cred_max(const Rational& idle_slope, std::span<const HigherCbs> higher,
                  const Rational& max_frame_below, const Rational& capacity);

/// T = (sum credMin_k - L^{>p,max}) / (sum I_k - C); zero higher classes gives L^{>p,max} / C.
Rational latency_factor(std::span<const HigherCbs> higher, const Rational& max_frame_below,
                        const Rational& capacity);

/// Parameters of a CBS class at a port.
struct CbsParams {
  Rational idle_slope;
  Rational cred_min;
  Rational cred_max;
  Rational latency;  // credMax / I
};

/// Throws std::invalid_argument if the assignment is missing or ill-formed.
CbsParams cbs_params(const NetworkConfiguration& config, std::size_t port, int priority);

/// Latency factor of a prospective CBS class at (port, priority) given the CBS already there.
Rational latency_factor_at(const NetworkConfiguration& config, std::size_t port, int priority);

/// beta = I * [t - credMax / I]^+.
PwlCurve cbs_service(const CbsParams& params);

/// (C t - sum alpha_higher - L^{>p,max}) made non-decreasing and non-negative.
PwlCurve npsp_leftover(const Rational& capacity, std::span<const PwlCurve> higher,
                       const Rational& max_frame_below);

/// min(C t, alpha(t + d)).
PwlCurve output_arrival(const PwlCurve& alpha, const Rational& delay, const Rational& capacity);

enum class Model {
  /// Fluid line shaping min(C t, alpha(t + d)). A CBS class interferes with lower
  /// priorities of its own port at most lambda(I, credMax) and leaves the port
  /// within lambda(I, credMax - credMin).
  Fluid,
  /// Store-and-forward aware: link caps carry one frame of slack and the CBS
  /// output bound gains I L / C.
  Packetized,
};

struct AnalysisOptions {
  Model model = Model::Fluid;
  unsigned max_iterations = 1000;
  Rational tolerance{1, 1000000000};
  Rational divergence_factor{1000000};
  /// Cut bursts are rounded up to this grid (1/n bit) between iterations.
  unsigned long burst_grid = 1024;
};

using PortClass = std::pair<std::size_t, int>;  // (port, priority)

struct AnalysisResult {
  std::map<PortClass, Bound> port_delay;      // d_op^p
  std::map<PortClass, PwlCurve> arrival;      // aggregate arrival curve at the port
  std::map<PortClass, PwlCurve> service;      // service curve used
  std::vector<std::vector<Bound>> hop_burst;  // burst of flow f at the input of hop h
  std::vector<Bound> flow_delay;              // end-to-end
  std::vector<Bound> source_delay;            // d_src
  std::vector<std::pair<std::size_t, std::size_t>> cut_edges;
  unsigned iterations = 0;
  bool converged = true;

  Bound delay_at(std::size_t port, int priority) const;
};

/// Depth-first search over the port graph from source ports in id order; back edges are cut.
std::vector<std::pair<std::size_t, std::size_t>> cut_edges(const NetworkConfiguration& config);

/// Full FP-TFA++ analysis with fixed-point iteration over cut bursts.
AnalysisResult analyze(const NetworkConfiguration& config, const AnalysisOptions& options = {});

/// One topological pass given the bursts entering through cut edges, keyed by (flow, hop).
using CutBursts = std::map<std::pair<std::size_t, std::size_t>, Bound>;
AnalysisResult tfa_pass(const NetworkConfiguration& config, const CutBursts& cut_bursts,
                        const std::vector<std::pair<std::size_t, std::size_t>>& cuts,
                        const AnalysisOptions& options);

/// Burst leaving the cut edges after a pass: the update of the fixed-point map.
CutBursts cut_outputs(const NetworkConfiguration& config, const AnalysisResult& pass,
                      const std::vector<std::pair<std::size_t, std::size_t>>& cuts);

}  // namespace tsncbs::nc
