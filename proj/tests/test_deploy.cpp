#include <doctest.h>

#include <random>

#include "random_net.hpp"
#include "tsncbs/config_io.hpp"
#include "tsncbs/deploy.hpp"
#include "tsncbs/report.hpp"

using namespace tsncbs;
using namespace tsncbs::deploy;

namespace {

NetworkConfiguration illustrative() {
  return load_configuration_file(std::string(TSNCBS_CONFIG_DIR) + "/illustrative.json");
}

Rational us(long v) { return ratio(v, 1000000); }

}  // namespace

TEST_CASE("local deadline apportions the budget by class rates") {
  auto c = illustrative();
  auto a = nc::analyze(c);
  std::size_t sw0_2 = *c.find_port("SW0_2");
  auto ld = local_deadline(c, sw0_2, 0, a);
  REQUIRE(ld);
  CHECK(ld->verif_flow == *c.find_flow("f0"));
  CHECK(ld->value == (us(1000) - us(144)) / 2);
  CHECK_THROWS_AS(local_deadline(c, sw0_2, 3, a), std::invalid_argument);
  CHECK_THROWS_AS(local_deadline(c, *c.find_port("SW1_1"), 2, a), std::invalid_argument);
}

TEST_CASE("minimum idle slope is the burst over the local deadline minus latency") {
  auto c = illustrative();
  auto a = nc::analyze(c);
  std::size_t sw0_2 = *c.find_port("SW0_2");
  Rational denom = (us(1000) - us(144)) / 2 - ratio(960, 100000000);
  auto i_min = min_idle_slope(c, sw0_2, 0, 1, a);
  REQUIRE(i_min);
  CHECK(*i_min == 14400 / denom);
  auto placed = placed_idle_slope(c, sw0_2, 0, 1, a);
  REQUIRE(placed);
  CHECK(*placed == 34416827);
  auto halved = min_idle_slope(c, sw0_2, 0, ratio(1, 2), a);
  REQUIRE(halved);
  CHECK(*halved > *i_min);
  CHECK_FALSE(min_idle_slope(c, sw0_2, 0, ratio(1, 100000), a).has_value());
}

TEST_CASE("selection steps on the illustrative network") {
  auto c = illustrative();
  auto v = verify::verify_schedulability(c);
  auto unsched = v.unsched_non_shaped();
  CHECK(most_constrained_flow(c, unsched, v) == *c.find_flow("f2"));
  CHECK_THROWS_AS(most_constrained_flow(c, {}, v), std::invalid_argument);
  std::size_t sw0_2 = *c.find_port("SW0_2");
  CHECK(highest_non_shaped_priority(c, sw0_2, 1, v) == std::optional<int>(0));
  CHECK_FALSE(highest_non_shaped_priority(c, sw0_2, 0, v).has_value());
  CHECK_FALSE(highest_non_shaped_priority(c, *c.find_port("ES1_0"), 1, v).has_value());
  std::size_t sw0 = *c.find_device("SW0");
  CHECK(select_device(c, *c.find_flow("f2"), {}, v) == std::optional<std::size_t>(sw0));
  CHECK(select_device(c, *c.find_flow("f2"), {sw0}, v) ==
        std::optional<std::size_t>(*c.find_device("SW1")));
  auto ports = ordered_ports(c, sw0, 1, unsched, v);
  REQUIRE(ports.size() == 2);
  CHECK(c.ports()[ports[0]].id == "SW0_2");
  CHECK(c.ports()[ports[1]].id == "SW0_1");
}

TEST_CASE("illustrative deployment clusters both CBS on SW0") {
  auto c = illustrative();
  auto out = run_framework(c);
  REQUIRE(out.status == Status::Success);
  CHECK(out.rounds == 1);
  CHECK(out.config.tsn_device_count() == 1);
  REQUIRE(out.config.cbs().size() == 2);
  for (const auto& a : out.config.cbs()) {
    CHECK(out.config.device_of(a.port).id == "SW0");
    CHECK(a.priority == 0);
  }
  CHECK(out.verdict.all_schedulable());
  CHECK(out.config.validate().empty());
  REQUIRE(out.placement_iterations.size() == 1);
  CHECK(out.placement_iterations[0].first <= out.placement_iterations[0].second);
  CHECK(out.trace.front().action == "verify");
  CHECK(out.trace.back().action == "success");
}

TEST_CASE("framework outcomes") {
  auto c = illustrative();
  SUBCASE("already schedulable") {
    std::vector<Flow> flows = c.flows();
    for (auto& f : flows) f.deadline.reset();
    NetworkConfiguration relaxed(c.devices(), c.ports(), flows, {});
    auto out = run_framework(relaxed);
    CHECK(out.status == Status::Success);
    CHECK(out.rounds == 0);
    CHECK(out.config.cbs().empty());
  }
  SUBCASE("round budget") {
    FrameworkOptions o;
    o.max_rounds = 0;
    CHECK(run_framework(c, o).status == Status::BudgetExceeded);
  }
  SUBCASE("precondition") {
    std::vector<Flow> flows = c.flows();
    flows[*c.find_flow("f1")].deadline = us(50);
    auto out = run_framework(NetworkConfiguration(c.devices(), c.ports(), flows, {}));
    CHECK(out.status == Status::PreconditionViolated);
    CHECK(out.precondition_flows == std::vector<std::size_t>{*c.find_flow("f1")});
  }
  SUBCASE("unattainable deadline") {
    std::vector<Flow> flows = c.flows();
    flows[*c.find_flow("f4")].deadline = us(20);
    auto out = run_framework(NetworkConfiguration(c.devices(), c.ports(), flows, {}));
    CHECK(out.status == Status::Infeasible);
  }
  SUBCASE("bad options") {
    FrameworkOptions o;
    o.rho = 0;
    CHECK_THROWS_AS(run_framework(c, o), std::invalid_argument);
    o.rho = ratio(1, 20);
    o.initial_margin = ratio(3, 2);
    CHECK_THROWS_AS(run_framework(c, o), std::invalid_argument);
  }
  CHECK(std::string(status_name(Status::BudgetExceeded)) == "BUDGET_EXCEEDED");
}

TEST_CASE("full baseline shapes every deadline class prefix on switch ports") {
  auto c = illustrative();
  auto cand = full_cbs_candidates(c);
  CHECK(cand.size() == 8);
  for (const auto& [port, p] : cand) {
    CHECK(c.is_switch_port(port));
    CHECK(p <= 1);
  }
  auto base = full_cbs_baseline(c);
  CHECK(base.candidate_devices == 2);
  CHECK(base.config.validate().empty());
}

TEST_CASE("reduction percentages") {
  auto r = report::reduction(2, 7);
  CHECK(r.fraction == ratio(5, 7));
  CHECK(report::format_reduction(r) == "71% (71.4%)");
  CHECK(report::format_reduction(report::reduction(3, 34)) == "91% (91.2%)");
  CHECK(report::format_reduction(report::reduction(0, 0)) == "0% (0.0%)");
}

TEST_CASE("deployment properties on random networks") {
  std::mt19937_64 rng(17);
  std::size_t success = 0;
  for (int i = 0; i < 60; ++i) {
    auto c = load_configuration(testnet::with_deadlines(rng, testnet::random_network(rng)).dump());
    auto out = run_framework(c);
    for (const auto& [iters, initial] : out.placement_iterations) CHECK(iters <= initial);
    if (out.status != Status::Success) continue;
    ++success;
    CHECK(out.config.validate().empty());
    CHECK(out.verdict.all_schedulable());
    for (const auto& a : out.config.cbs()) CHECK(out.config.is_switch_port(a.port));
    auto again = run_framework(c);
    CHECK(again.config.cbs() == out.config.cbs());
  }
  CHECK(success > 0);
}
