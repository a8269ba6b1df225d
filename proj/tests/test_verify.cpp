#include <doctest.h>

#include "tsncbs/config_io.hpp"
#include "tsncbs/verify.hpp"

using namespace tsncbs;
using namespace tsncbs::verify;

namespace {

NetworkConfiguration illustrative() {
  return load_configuration_file(std::string(TSNCBS_CONFIG_DIR) + "/illustrative.json");
}

}  // namespace

TEST_CASE("illustrative verdicts without CBS") {
  auto c = illustrative();
  auto v = verify_schedulability(c);
  auto cls = [&](const char* id) { return v.classes[*c.find_flow(id)]; };
  CHECK(cls("f0") == FlowClass::Schedulable);
  CHECK(cls("f1") == FlowClass::Schedulable);
  CHECK(cls("f2") == FlowClass::UnschedNonShaped);
  CHECK(cls("f3") == FlowClass::UnschedNonShaped);
  CHECK(cls("f4") == FlowClass::UnschedNonShaped);
  CHECK(cls("f5") == FlowClass::BestEffort);
  CHECK(v.unsched_non_shaped().size() == 3);
  CHECK(v.unsched_shaped().empty());
  CHECK_FALSE(v.all_schedulable());
  CHECK(*v.slack[*c.find_flow("f0")] > 0);
  CHECK(*v.slack[*c.find_flow("f2")] < 0);
  CHECK_FALSE(v.slack[*c.find_flow("f5")].has_value());
  CHECK(std::string(class_name(FlowClass::UnschedNonShaped)) == "UNSCHED_NONSHAPED");
}

TEST_CASE("a flow is shaped when its class has CBS somewhere on its path") {
  auto c = illustrative();
  std::size_t sw0_2 = *c.find_port("SW0_2");
  auto s = c.with_cbs({{sw0_2, 0, 20000000}});
  CHECK(is_shaped(s, *c.find_flow("f0")));
  CHECK_FALSE(is_shaped(s, *c.find_flow("f1")));
  CHECK_FALSE(is_shaped(s, *c.find_flow("f2")));
}

TEST_CASE("a starved shaped flow is classified as unschedulable shaped") {
  auto c = illustrative();
  std::size_t sw0_2 = *c.find_port("SW0_2");
  auto s = c.with_cbs({{sw0_2, 0, 14400000}});
  auto v = verify_schedulability(s);
  CHECK(v.classes[*c.find_flow("f0")] == FlowClass::UnschedShaped);
  CHECK(v.unsched_shaped() == std::vector<std::size_t>{*c.find_flow("f0")});
}

TEST_CASE("classification is the deadline test on the bounds") {
  auto c = illustrative();
  auto a = nc::analyze(c);
  auto v = classify(c, a);
  for (std::size_t f = 0; f < c.flows().size(); ++f) {
    const auto& flow = c.flows()[f];
    if (!flow.deadline) continue;
    bool ok = a.flow_delay[f] && *a.flow_delay[f] <= *flow.deadline;
    CHECK(ok == (v.classes[f] == FlowClass::Schedulable));
  }
}

TEST_CASE("precondition flags priority-0 flows missing their deadline without CBS") {
  auto c = illustrative();
  CHECK(precondition_violations(c).empty());
  std::vector<Flow> flows = c.flows();
  flows[*c.find_flow("f0")].deadline = ratio(100, 1000000);
  flows[*c.find_flow("f2")].deadline = Rational(1, 1000000);
  NetworkConfiguration tight(c.devices(), c.ports(), flows, {});
  CHECK(precondition_violations(tight) == std::vector<std::size_t>{*c.find_flow("f0")});
  auto shaped = tight.with_cbs({{*c.find_port("SW0_2"), 0, 50000000}});
  CHECK(precondition_violations(shaped) == std::vector<std::size_t>{*c.find_flow("f0")});
}
