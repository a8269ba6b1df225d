#include <doctest.h>

#include <random>

#include "random_net.hpp"
#include "tsncbs/config_io.hpp"
#include "tsncbs/deploy.hpp"
#include "tsncbs/simcheck.hpp"

using namespace tsncbs;
using namespace tsncbs::sim;

namespace {

/// One flow of two 100-bit frames through one switch at C = 1000 bit/s.
const char* kSingle = R"({
  "defaults": {"capacity_bps": 1000},
  "devices": [{"id": "A", "kind": "end_system"}, {"id": "S", "kind": "switch"},
              {"id": "D", "kind": "end_system"}],
  "ports": [{"id": "A0", "device": "A", "to": "S"}, {"id": "S-D", "device": "S", "to": "D"}],
  "flows": [{"id": "h", "priority": 0, "rate_bps": 100, "burst_bits": 200,
             "max_frame_bits": 100, "path": ["A0", "S-D"]}]
})";

NetworkConfiguration illustrative() {
  return load_configuration_file(std::string(TSNCBS_CONFIG_DIR) + "/illustrative.json");
}

}  // namespace

TEST_CASE("store and forward of a greedy burst") {
  auto c = load_configuration(kSingle);
  auto r = simulate({c, 2});
  CHECK(r.frames == 3);
  CHECK(r.delivered[0] == 3);
  CHECK(r.max_delay[0] == std::optional<Rational>(ratio(3, 10)));
  CHECK(r.credit.empty());
}

TEST_CASE("a shaped class waits for its credit") {
  auto c = load_configuration(kSingle);
  std::size_t out = *c.find_port("S-D");
  auto s = c.with_cbs({{out, 0, 500}});
  auto r = simulate({s, 2});
  CHECK(r.max_delay[0] == std::optional<Rational>(ratio(2, 5)));
  const auto& ext = r.credit.at({out, 0});
  CHECK(ext.min == -50);
  CHECK(ext.max == 0);
  auto p = nc::cbs_params(s, out, 0);
  CHECK(ext.min >= p.cred_min);
  CHECK(ext.max <= p.cred_max);
  auto rows = blocking_demo(s, Rational(2), 1);
  REQUIRE(rows.size() == 1);
  CHECK(*rows[0].with_cbs > *rows[0].without_cbs);
}

TEST_CASE("horizon zero produces nothing") {
  auto r = simulate({illustrative(), 0});
  CHECK(r.frames == 0);
  for (const auto& d : r.max_delay) CHECK_FALSE(d.has_value());
}

TEST_CASE("runs are reproducible per seed") {
  auto c = illustrative();
  SimScenario sc{c, ratio(1, 100), 5, ArrivalModel::PeriodicJitter};
  auto a = simulate(sc), b = simulate(sc);
  CHECK(a.max_delay == b.max_delay);
  CHECK(a.frames == b.frames);
  sc.record_trace = true;
  auto t = simulate(sc);
  CHECK_FALSE(t.trace.empty());
  CHECK(t.trace.front().event == "enqueue");
}

TEST_CASE("periodic jitter emits one frame per period") {
  auto c = load_configuration(kSingle);
  auto r = simulate({c, 5, 3, ArrivalModel::PeriodicJitter});
  CHECK(r.frames == 5);
  CHECK(r.delivered[0] == 5);
}

TEST_CASE("deployed illustrative network stays within store-and-forward bounds") {
  auto out = deploy::run_framework(illustrative());
  REQUIRE(out.status == deploy::Status::Success);
  nc::AnalysisOptions pk;
  pk.model = nc::Model::Packetized;
  auto bounds = nc::analyze(out.config, pk);
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    SimScenario sc{out.config, ratio(1, 100), seed, ArrivalModel::GreedyBurst,
                   ratio(static_cast<long>(seed) * 100, 1000000)};
    auto rows = summarize(out.config, simulate(sc), bounds);
    for (const auto& row : rows) CHECK_FALSE(row.violation);
    for (const auto& row : rows) CHECK(row.bound == bounds.flow_delay[row.flow]);
  }
}

TEST_CASE("credit stays within its bounds on random single-port scenarios") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    auto doc = testnet::random_network(rng, {1, 8, 100000000, 0.6, true});
    auto c = load_configuration(doc.dump());
    SimScenario sc{c, ratio(3, 1000), rng(), ArrivalModel::GreedyBurst};
    auto r = simulate(sc);
    for (const auto& a : c.cbs()) {
      auto p = nc::cbs_params(c, a.port, a.priority);
      CHECK(r.credit.at({a.port, a.priority}).min >= p.cred_min);
      CHECK(r.credit.at({a.port, a.priority}).max <= p.cred_max);
    }
  }
}
