#include "tsncbs/config_io.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace tsncbs {

using nlohmann::json;

namespace {

std::string at(const std::string& base, const std::string& key) { return base + "." + key; }
std::string at(const std::string& base, std::size_t i) {
  return base + "[" + std::to_string(i) + "]";
}

Rational number(const json& v, const std::string& where) {
  try {
    if (v.is_number_integer()) return Rational(mpz_class(v.dump(), 10));
    if (v.is_number_float()) return from_double(v.get<double>());
    if (v.is_string()) return parse_rational(v.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where, e.what());
  }
  throw ConfigError(where, "expected a number");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string text(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ConfigError(at(where, key), "expected a string");
  return v.get<std::string>();
}

/// First of the alternative keys that is present, scaled to internal units.
std::optional<Rational> scaled(const json& obj, const std::string& where,
                               std::initializer_list<std::pair<const char*, Rational>> keys) {
  for (const auto& [key, factor] : keys) {
    auto it = obj.find(key);
    if (it != obj.end()) return number(*it, at(where, key)) * factor;
  }
  return std::nullopt;
}

DeviceKind parse_kind(std::string s, const std::string& where) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "switch" || s == "sw") return DeviceKind::Switch;
  if (s == "end_system" || s == "endsystem" || s == "es" || s == "end-system")
    return DeviceKind::EndSystem;
  throw ConfigError(where, "unknown device kind '" + s + "'");
}

std::vector<std::size_t> ports_from_json(const NetworkConfiguration& net, const json& list,
                                         const std::string& where) {
  if (!list.is_array() || list.empty()) throw ConfigError(where, "expected a non-empty port list");
  std::vector<std::size_t> path;
  for (std::size_t h = 0; h < list.size(); ++h) {
    if (!list[h].is_string()) throw ConfigError(at(where, h), "expected a port id");
    auto p = net.find_port(list[h].get<std::string>());
    if (!p) throw ConfigError(at(where, h), "unknown port '" + list[h].get<std::string>() + "'");
    path.push_back(*p);
  }
  return path;
}

std::vector<std::string> names(const json& obj, const char* one, const char* many,
                               const std::string& where) {
  std::vector<std::string> out;
  if (auto it = obj.find(one); it != obj.end()) {
    if (!it->is_string()) throw ConfigError(at(where, one), "expected a device id");
    out.push_back(it->get<std::string>());
  }
  if (auto it = obj.find(many); it != obj.end()) {
    if (!it->is_array()) throw ConfigError(at(where, many), "expected a list of device ids");
    for (std::size_t i = 0; i < it->size(); ++i) {
      if (!(*it)[i].is_string()) throw ConfigError(at(at(where, many), i), "expected a device id");
      out.push_back((*it)[i].get<std::string>());
    }
  }
  return out;
}

json rational_json(const Rational& q) {
  if (q.get_den() == 1) return json::parse(q.get_num().get_str());
  return q.get_str();
}

}  // namespace

std::vector<std::size_t> route(const NetworkConfiguration& config, std::size_t source,
                               std::size_t destination) {
  const auto& ports = config.ports();
  std::vector<std::optional<std::size_t>> via(config.devices().size());
  std::vector<bool> seen(config.devices().size(), false);
  std::deque<std::size_t> queue{source};
  seen[source] = true;
  while (!queue.empty()) {
    std::size_t d = queue.front();
    queue.pop_front();
    if (d == destination) break;
    for (std::size_t port : config.ports_of_device(d)) {
      auto next = ports[port].peer_device;
      if (!next || seen[*next]) continue;
      if (d != source && config.devices()[d].kind == DeviceKind::EndSystem) continue;
      seen[*next] = true;
      via[*next] = port;
      queue.push_back(*next);
    }
  }
  if (!seen[destination] || source == destination) return {};
  std::vector<std::size_t> path;
  for (std::size_t d = destination; d != source; d = ports[*via[d]].device) path.push_back(*via[d]);
  std::reverse(path.begin(), path.end());
  return path;
}

NetworkConfiguration load_configuration(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "top level must be an object");

  bool cbs_on_es = false;
  if (auto it = doc.find("options"); it != doc.end()) {
    if (auto o = it->find("cbs_on_end_systems"); o != it->end()) {
      if (!o->is_boolean()) throw ConfigError("options.cbs_on_end_systems", "expected a boolean");
      cbs_on_es = o->get<bool>();
    }
  }
  std::optional<Rational> default_capacity;
  if (auto it = doc.find("defaults"); it != doc.end())
    default_capacity = scaled(*it, "defaults", {{"capacity_bps", 1}, {"capacity_mbps", 1000000}});

  std::vector<Device> devices;
  const json& jdev = require(doc, "devices", "");
  if (!jdev.is_array()) throw ConfigError("devices", "expected a list");
  for (std::size_t i = 0; i < jdev.size(); ++i) {
    std::string where = at("devices", i);
    devices.push_back({text(jdev[i], "id", where),
                       parse_kind(text(jdev[i], "kind", where), at(where, "kind"))});
  }
  NetworkConfiguration skeleton(devices, {}, {}, {});

  std::vector<OutputPort> ports;
  const json& jports = require(doc, "ports", "");
  if (!jports.is_array()) throw ConfigError("ports", "expected a list");
  for (std::size_t i = 0; i < jports.size(); ++i) {
    std::string where = at("ports", i);
    const json& jp = jports[i];
    OutputPort p;
    p.id = text(jp, "id", where);
    std::string dev = text(jp, "device", where);
    auto d = skeleton.find_device(dev);
    if (!d) throw ConfigError(at(where, "device"), "unknown device '" + dev + "'");
    p.device = *d;
    if (jp.contains("to")) {
      std::string to = text(jp, "to", where);
      auto t = skeleton.find_device(to);
      if (!t) throw ConfigError(at(where, "to"), "unknown device '" + to + "'");
      p.peer_device = *t;
    }
    auto cap = scaled(jp, where, {{"capacity_bps", 1}, {"capacity_mbps", 1000000}});
    if (!cap) cap = default_capacity;
    if (!cap) throw ConfigError(where, "missing capacity_bps and no default");
    p.capacity = *cap;
    p.prop_delay = scaled(jp, where, {{"prop_delay_us", kMicro}}).value_or(Rational(0));
    ports.push_back(std::move(p));
  }
  NetworkConfiguration topology(devices, ports, {}, {});

  std::vector<Flow> flows;
  const json& jflows = require(doc, "flows", "");
  if (!jflows.is_array()) throw ConfigError("flows", "expected a list");
  for (std::size_t i = 0; i < jflows.size(); ++i) {
    std::string where = at("flows", i);
    const json& jf = jflows[i];
    Flow base;
    base.id = text(jf, "id", where);
    base.group = base.id;
    const json& prio = require(jf, "priority", where);
    if (!prio.is_number_integer()) throw ConfigError(at(where, "priority"), "expected an integer");
    base.priority = prio.get<int>();
    auto rate = scaled(jf, where, {{"rate_bps", 1}, {"rate_kBps", 8000}, {"rate_mbps", 1000000}});
    if (!rate) throw ConfigError(where, "missing rate_bps");
    base.rate = *rate;
    auto jb = jf.find("burst_bits");
    if (jb == jf.end()) jb = jf.find("burst_bytes");
    if (jb == jf.end()) throw ConfigError(where, "missing burst_bits");
    bool unbounded = jb->is_null() || (jb->is_string() && jb->get<std::string>() == "inf");
    if (!unbounded) base.burst = *scaled(jf, where, {{"burst_bits", 1}, {"burst_bytes", 8}});
    auto frame = scaled(jf, where, {{"max_frame_bits", 1}, {"max_frame_bytes", 8}});
    base.max_frame = frame ? *frame
                           : (base.burst && *base.burst > 0 ? min(*base.burst, kDefaultMaxFrameBits)
                                                            : kDefaultMaxFrameBits);
    base.deadline = scaled(jf, where, {{"deadline_us", kMicro}, {"deadline_ms", ratio(1, 1000)}});

    if (jf.contains("path")) {
      base.path = ports_from_json(topology, jf["path"], at(where, "path"));
      flows.push_back(std::move(base));
      continue;
    }
    auto sources = names(jf, "source", "sources", where);
    auto destinations = names(jf, "destination", "destinations", where);
    if (sources.empty() || destinations.empty())
      throw ConfigError(where, "flow needs a path or source and destination devices");
    bool tag_src = jf.contains("sources"), tag_dst = jf.contains("destinations");
    const json* routes = jf.contains("routes") ? &jf["routes"] : nullptr;
    const json* shared = doc.contains("routes") ? &doc["routes"] : nullptr;
    for (const auto& s : sources) {
      auto sd = topology.find_device(s);
      if (!sd) throw ConfigError(where, "unknown source device '" + s + "'");
      for (const auto& dname : destinations) {
        if (dname == s) continue;
        auto dd = topology.find_device(dname);
        if (!dd) throw ConfigError(where, "unknown destination device '" + dname + "'");
        Flow f = base;
        if (tag_src) f.id += "/" + s;
        if (tag_dst) f.id += ">" + dname;
        std::string key = s + ">" + dname;
        if (routes && routes->contains(key)) {
          f.path = ports_from_json(topology, (*routes)[key], at(at(where, "routes"), key));
        } else if (routes && !tag_src && routes->contains(dname)) {
          f.path = ports_from_json(topology, (*routes)[dname], at(at(where, "routes"), dname));
        } else if (shared && shared->contains(key)) {
          f.path = ports_from_json(topology, (*shared)[key], at("routes", key));
        } else {
          f.path = route(topology, *sd, *dd);
          if (f.path.empty()) throw ConfigError(where, "no route from " + s + " to " + dname);
        }
        flows.push_back(std::move(f));
      }
    }
  }

  std::vector<CbsAssignment> cbs;
  if (auto jc = doc.find("cbs"); jc != doc.end()) {
    if (!jc->is_array()) throw ConfigError("cbs", "expected a list");
    for (std::size_t i = 0; i < jc->size(); ++i) {
      std::string where = at("cbs", i);
      const json& e = (*jc)[i];
      CbsAssignment c;
      std::string port = text(e, "port", where);
      auto p = topology.find_port(port);
      if (!p) throw ConfigError(at(where, "port"), "unknown port '" + port + "'");
      c.port = *p;
      const json& prio = require(e, "priority", where);
      if (!prio.is_number_integer())
        throw ConfigError(at(where, "priority"), "expected an integer");
      c.priority = prio.get<int>();
      const char* key = e.contains("idleslope_bps") ? "idleslope_bps" : "idle_slope_bps";
      c.idle_slope = number(require(e, key, where), at(where, key));
      cbs.push_back(c);
    }
  }
  return NetworkConfiguration(std::move(devices), std::move(ports), std::move(flows),
                              std::move(cbs), cbs_on_es);
}

NetworkConfiguration load_configuration_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return load_configuration(ss.str());
}

std::string dump_configuration(const NetworkConfiguration& config) {
  json doc;
  doc["options"]["cbs_on_end_systems"] = config.cbs_on_end_systems();
  doc["devices"] = json::array();
  for (const auto& d : config.devices())
    doc["devices"].push_back(
        {{"id", d.id}, {"kind", d.kind == DeviceKind::Switch ? "switch" : "end_system"}});
  doc["ports"] = json::array();
  for (const auto& p : config.ports()) {
    json jp = {{"id", p.id},
               {"device", config.devices()[p.device].id},
               {"capacity_bps", rational_json(p.capacity)}};
    if (p.peer_device) jp["to"] = config.devices()[*p.peer_device].id;
    if (p.prop_delay != 0) jp["prop_delay_us"] = rational_json(us_from_seconds(p.prop_delay));
    doc["ports"].push_back(jp);
  }
  doc["flows"] = json::array();
  for (const auto& f : config.flows()) {
    json jf = {{"id", f.id},
               {"priority", f.priority},
               {"rate_bps", rational_json(f.rate)},
               {"max_frame_bits", rational_json(f.max_frame)}};
    jf["burst_bits"] = f.burst ? rational_json(*f.burst) : json("inf");
    if (f.deadline) jf["deadline_us"] = rational_json(us_from_seconds(*f.deadline));
    jf["path"] = json::array();
    for (std::size_t port : f.path) jf["path"].push_back(config.ports()[port].id);
    doc["flows"].push_back(jf);
  }
  doc["cbs"] = json::array();
  for (const auto& c : config.cbs())
    doc["cbs"].push_back({{"port", config.ports()[c.port].id},
                          {"priority", c.priority},
                          {"idle_slope_bps", rational_json(c.idle_slope)}});
  return doc.dump(2) + "\n";
}

}  // namespace tsncbs
