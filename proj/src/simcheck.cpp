#include "tsncbs/simcheck.hpp"

#include <deque>
#include <queue>
#include <random>

namespace tsncbs::sim {

namespace {

struct Frame {
  std::size_t flow;
  Rational size;
  Rational created;
  std::size_t hop = 0;
};

enum class EventKind { Arrival = 0, Completion = 1, Dispatch = 2 };

struct Event {
  Rational time;
  EventKind kind;
  std::uint64_t seq;
  std::size_t port;
  std::size_t frame;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct ClassState {
  std::deque<std::size_t> queue;
  std::optional<Rational> idle_slope;  // set when the class is shaped
  Rational credit = 0;
};

struct PortState {
  std::vector<ClassState> classes = std::vector<ClassState>(kPriorityLevels);
  bool busy = false;
  int tx_class = -1;
  std::size_t tx_frame = 0;
  Rational last_update = 0;
  std::optional<Rational> pending_wake;
};

class Simulator {
 public:
  explicit Simulator(const SimScenario& s) : sc_(s), cfg_(s.config) {
    ports_.resize(cfg_.ports().size());
    for (const auto& c : cfg_.cbs()) {
      ports_[c.port].classes[static_cast<std::size_t>(c.priority)].idle_slope = c.idle_slope;
      result_.credit[{c.port, c.priority}] = {0, 0};
    }
    result_.max_delay.assign(cfg_.flows().size(), std::nullopt);
    result_.delivered.assign(cfg_.flows().size(), 0);
  }

  SimResult run() {
    generate();
    while (!events_.empty()) {
      Event e = events_.top();
      events_.pop();
      switch (e.kind) {
        case EventKind::Arrival: on_arrival(e); break;
        case EventKind::Completion: on_completion(e); break;
        case EventKind::Dispatch: on_dispatch(e); break;
      }
    }
    result_.frames = frames_.size();
    return std::move(result_);
  }

 private:
  void push(Rational t, EventKind k, std::size_t port, std::size_t frame) {
    events_.push({std::move(t), k, seq_++, port, frame});
  }

  void emit(std::size_t flow, const Rational& t, const Rational& size) {
    frames_.push_back({flow, size, t, 0});
    push(t, EventKind::Arrival, cfg_.flows()[flow].path.front(), frames_.size() - 1);
  }

  void generate() {
    if (sc_.horizon <= 0) return;
    std::mt19937_64 rng(sc_.seed);
    for (std::size_t f = 0; f < cfg_.flows().size(); ++f) {
      const Flow& flow = cfg_.flows()[f];
      Rational burst = flow.burst ? *flow.burst : 4 * flow.max_frame;
      if (burst <= 0) continue;
      Rational frame = min(flow.max_frame, burst);
      Rational period = flow.rate > 0 ? Rational(frame / flow.rate) : Rational(0);
      if (sc_.model == ArrivalModel::GreedyBurst) {
        Rational start = 0;
        if (sc_.offset_spread > 0) {
          std::uniform_int_distribution<std::uint64_t> pick(0, 999999);
          start = sc_.offset_spread * ratio(mpz_class(std::to_string(pick(rng))), 1000000);
        }
        if (start >= sc_.horizon) continue;
        Rational left = burst;
        while (left > 0) {
          Rational size = min(frame, left);
          emit(f, start, size);
          left -= size;
        }
        if (period > 0)
          for (Rational t = start + period; t < sc_.horizon; t += period) emit(f, t, frame);
      } else {
        if (period <= 0) {
          emit(f, 0, frame);
          continue;
        }
        Rational jitter_max = flow.rate > 0 ? Rational((burst - frame) / flow.rate) : Rational(0);
        std::uniform_int_distribution<std::uint64_t> pick(0, 999999);
        for (Rational t = 0; t < sc_.horizon; t += period) {
          Rational j = jitter_max * ratio(mpz_class(std::to_string(pick(rng))), 1000000);
          emit(f, t + j, frame);
        }
      }
    }
  }

  const Rational& capacity(std::size_t port) const { return cfg_.ports()[port].capacity; }

  /// Brings every shaped class of the port to time t under the current mode.
  void advance(std::size_t port, const Rational& t) {
    PortState& ps = ports_[port];
    Rational dt = t - ps.last_update;
    ps.last_update = t;
    if (dt <= 0) return;
    for (int k = 0; k < kPriorityLevels; ++k) {
      ClassState& c = ps.classes[static_cast<std::size_t>(k)];
      if (!c.idle_slope) continue;
      if (ps.busy && ps.tx_class == k)
        c.credit += (*c.idle_slope - capacity(port)) * dt;
      else if (!c.queue.empty())
        c.credit += *c.idle_slope * dt;
      else if (c.credit < 0)
        c.credit = min(Rational(0), c.credit + *c.idle_slope * dt);
      note_credit(port, k);
    }
  }

  void note_credit(std::size_t port, int k) {
    const ClassState& c = ports_[port].classes[static_cast<std::size_t>(k)];
    auto& ext = result_.credit[{port, k}];
    ext.min = min(ext.min, c.credit);
    ext.max = max(ext.max, c.credit);
  }

  void trace(const Rational& t, std::size_t port, int k, const char* what, std::size_t frame) {
    if (!sc_.record_trace) return;
    const ClassState& c = ports_[port].classes[static_cast<std::size_t>(k)];
    result_.trace.push_back(
        {t, port, k, what, c.idle_slope ? std::optional<Rational>(c.credit) : std::nullopt, frame});
  }

  void schedule_dispatch(std::size_t port, const Rational& t) {
    push(t, EventKind::Dispatch, port, 0);
  }

  void on_arrival(const Event& e) {
    advance(e.port, e.time);
    const Frame& fr = frames_[e.frame];
    int k = cfg_.flows()[fr.flow].priority;
    ports_[e.port].classes[static_cast<std::size_t>(k)].queue.push_back(e.frame);
    trace(e.time, e.port, k, "enqueue", e.frame);
    if (!ports_[e.port].busy) schedule_dispatch(e.port, e.time);
  }

  void on_completion(const Event& e) {
    advance(e.port, e.time);
    PortState& ps = ports_[e.port];
    int k = ps.tx_class;
    ps.busy = false;
    ps.tx_class = -1;
    ClassState& c = ps.classes[static_cast<std::size_t>(k)];
    trace(e.time, e.port, k, "tx_end", e.frame);
    if (c.idle_slope && c.queue.empty() && c.credit > 0) {
      c.credit = 0;
      trace(e.time, e.port, k, "reset", e.frame);
    }

    Frame& fr = frames_[e.frame];
    const Flow& flow = cfg_.flows()[fr.flow];
    Rational at = e.time + cfg_.ports()[e.port].prop_delay;
    if (fr.hop + 1 < flow.path.size()) {
      ++fr.hop;
      push(at, EventKind::Arrival, flow.path[fr.hop], e.frame);
    } else {
      Rational d = at - fr.created;
      auto& m = result_.max_delay[fr.flow];
      if (!m || *m < d) m = d;
      ++result_.delivered[fr.flow];
    }
    schedule_dispatch(e.port, e.time);
  }

  void on_dispatch(const Event& e) {
    PortState& ps = ports_[e.port];
    if (ps.pending_wake && *ps.pending_wake == e.time) ps.pending_wake.reset();
    if (ps.busy) return;
    advance(e.port, e.time);
    std::optional<Rational> wake;
    for (int k = 0; k < kPriorityLevels; ++k) {
      ClassState& c = ps.classes[static_cast<std::size_t>(k)];
      if (c.queue.empty()) continue;
      if (c.idle_slope && c.credit < 0) {
        Rational t = e.time + (-c.credit) / *c.idle_slope;
        if (!wake || t < *wake) wake = t;
        continue;
      }
      std::size_t f = c.queue.front();
      c.queue.pop_front();
      ps.busy = true;
      ps.tx_class = k;
      ps.tx_frame = f;
      trace(e.time, e.port, k, "tx_start", f);
      push(e.time + frames_[f].size / capacity(e.port), EventKind::Completion, e.port, f);
      return;
    }
    if (wake && (!ps.pending_wake || *wake < *ps.pending_wake)) {
      ps.pending_wake = wake;
      schedule_dispatch(e.port, *wake);
    }
  }

  const SimScenario& sc_;
  const NetworkConfiguration& cfg_;
  std::vector<PortState> ports_;
  std::vector<Frame> frames_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t seq_ = 0;
  SimResult result_;
};

}  // namespace

SimResult simulate(const SimScenario& scenario) { return Simulator(scenario).run(); }

std::vector<FlowSummary> summarize(const NetworkConfiguration& config, const SimResult& result,
                                   const nc::AnalysisResult& analysis) {
  std::vector<FlowSummary> out;
  for (std::size_t f = 0; f < config.flows().size(); ++f) {
    FlowSummary s;
    s.flow = f;
    s.observed = result.max_delay[f];
    s.bound = analysis.flow_delay[f];
    s.violation = s.observed && s.bound && *s.observed > *s.bound;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<BlockingRow> blocking_demo(const NetworkConfiguration& shaped,
                                       const NetworkConfiguration& reference,
                                       const Rational& horizon, std::uint64_t seed) {
  SimResult a = simulate({shaped, horizon, seed});
  SimResult b = simulate({reference, horizon, seed});
  std::vector<BlockingRow> rows;
  for (std::size_t f = 0; f < shaped.flows().size(); ++f)
    if (shaped.flows()[f].priority == 0) rows.push_back({f, a.max_delay[f], b.max_delay[f]});
  return rows;
}

std::vector<BlockingRow> blocking_demo(const NetworkConfiguration& shaped,
                                       const Rational& horizon, std::uint64_t seed) {
  return blocking_demo(shaped, shaped.without_cbs(), horizon, seed);
}

}  // namespace tsncbs::sim
