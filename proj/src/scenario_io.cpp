#include "gossipmon/scenario_io.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <string>

#include "gossipmon/errors.hpp"

namespace gossipmon {

namespace {

using nlohmann::json;

// View of one JSON object that remembers which keys were read, so that
// leftovers can be reported as unknown.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "scenario" : path_, "expected an object");
  }

  std::string field(std::string_view key) const {
    return path_.empty() ? std::string(key) : path_ + "." + std::string(key);
  }

  const json* get(std::string_view key) {
    used_.insert(std::string(key));
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& required(std::string_view key) {
    const json* v = get(key);
    if (!v) throw ConfigError(field(key), "missing required field");
    return *v;
  }

  template <typename T>
  T integer(std::string_view key, const json& v) const {
    if (!v.is_number_integer()) throw ConfigError(field(key), "expected an integer");
    if (v.is_number_unsigned()) {
      const auto u = v.get<std::uint64_t>();
      if (u > static_cast<std::uint64_t>(std::numeric_limits<T>::max())) {
        throw ConfigError(field(key), "value out of range");
      }
      return static_cast<T>(u);
    }
    const auto i = v.get<std::int64_t>();
    if (i < 0 && std::numeric_limits<T>::is_signed == false) throw ConfigError(field(key), "must be >= 0");
    const bool too_big = i > 0 && static_cast<std::uint64_t>(i) >
                                      static_cast<std::uint64_t>(std::numeric_limits<T>::max());
    if (too_big ||
        (std::numeric_limits<T>::is_signed && i < static_cast<std::int64_t>(std::numeric_limits<T>::min()))) {
      throw ConfigError(field(key), "value out of range");
    }
    return static_cast<T>(i);
  }

  template <typename T>
  void integer(std::string_view key, T& out) {
    if (const json* v = get(key)) out = integer<T>(key, *v);
  }

  void number(std::string_view key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void boolean(std::string_view key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void range(std::string_view key, LatencyRange& out) {
    if (const json* v = get(key)) {
      if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number() || !(*v)[1].is_number()) {
        throw ConfigError(field(key), "expected [lo, hi]");
      }
      out = {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
  }

  // Must be called once all known keys have been read.
  void reject_unknown() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!used_.contains(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> used_;
};

void parse_churn(const json& list, Scenario& s) {
  if (!list.is_array()) throw ConfigError("churn", "expected an array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section c(list[i], "churn[" + std::to_string(i) + "]");
    ChurnEvent ev;
    ev.tick = c.integer<Tick>("tick", c.required("tick"));
    const json& action = c.required("action");
    if (action == "leave") {
      ev.action = ChurnEvent::Action::leave;
      ev.vm = VmId{c.integer<std::uint32_t>("vm", c.required("vm"))};
    } else if (action == "join") {
      ev.action = ChurnEvent::Action::join;
      ev.region = RegionId{c.integer<std::uint32_t>("region", c.required("region"))};
      c.integer("profile", ev.profile);
    } else {
      throw ConfigError(c.field("action"), "expected \"join\" or \"leave\"");
    }
    c.reject_unknown();
    s.churn.push_back(ev);
  }
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  Section root(doc, "");
  Scenario s;
  s.population = root.integer<std::uint32_t>("population", root.required("population"));
  const auto regions = root.integer<std::uint32_t>("regions", root.required("regions"));
  if (regions < 1) throw ConfigError("regions", "must be >= 1");
  if (s.population < 1) throw ConfigError("population", "must be >= 1");

  const json& scheme = root.required("scheme");
  if (!scheme.is_string()) throw ConfigError("scheme", "expected a string");
  try {
    s.scheme = parse_scheme(scheme.get<std::string>());
  } catch (const InvalidInput& e) {
    throw ConfigError("scheme", e.what());
  }
  s.rounds = root.integer<std::uint32_t>("rounds", root.required("rounds"));
  s.seed = root.integer<std::uint64_t>("seed", root.required("seed"));

  if (const json* counts = root.get("region_counts")) {
    if (!counts->is_array()) throw ConfigError("region_counts", "expected an array");
    for (std::size_t i = 0; i < counts->size(); ++i) {
      s.region_counts.push_back(
          root.integer<std::uint32_t>("region_counts[" + std::to_string(i) + "]", (*counts)[i]));
    }
    if (s.region_counts.size() != regions) {
      throw ConfigError("region_counts", "must list one count per region");
    }
  } else {
    s.region_counts = split_population(s.population, regions);
  }

  if (const json* f = root.get("features")) {
    Section sec(*f, "features");
    sec.integer("profiles_per_region", s.features.profiles_per_region);
    sec.number("noise", s.features.noise);
    sec.number("tau", s.features.tau);
    sec.reject_unknown();
  }

  bool staleness_given = false;
  if (const json* p = root.get("protocol")) {
    Section sec(*p, "protocol");
    sec.integer("t_gossip", s.protocol.t_gossip);
    sec.number("beta", s.protocol.beta);
    sec.integer("f_max", s.protocol.f_max);
    sec.integer("k_group", s.protocol.k_group);
    sec.integer("k_cloud", s.protocol.k_cloud);
    staleness_given = sec.get("staleness_window") != nullptr;
    sec.integer("staleness_window", s.protocol.staleness_window);
    sec.number("epsilon_latency", s.protocol.epsilon_latency);
    sec.boolean("inter_tier", s.protocol.inter_tier);
    sec.reject_unknown();
  }
  if (!staleness_given) s.protocol.staleness_window = 10 * s.protocol.t_gossip;

  s.central.t_poll = s.protocol.t_gossip;
  if (const json* c = root.get("central")) {
    Section sec(*c, "central");
    sec.integer("t_poll", s.central.t_poll);
    sec.integer("messages_per_poll", s.central.messages_per_poll);
    sec.reject_unknown();
  }

  if (const json* l = root.get("latency")) {
    Section sec(*l, "latency");
    sec.range("intra_group", s.latency.intra_group);
    sec.range("intra_region", s.latency.intra_region);
    sec.range("inter_region", s.latency.inter_region);
    sec.number("loss_intra", s.latency.loss_intra);
    sec.reject_unknown();
  }

  if (const json* w = root.get("workload")) {
    Section sec(*w, "workload");
    if (const json* f = sec.get("freeze_tick")) {
      if (!f->is_null()) s.workload.freeze_tick = sec.integer<Tick>("freeze_tick", *f);
    }
    sec.number("step_pct", s.workload.step_pct);
    sec.number("step_net", s.workload.step_net);
    sec.number("max_net", s.workload.max_net);
    sec.reject_unknown();
  }

  if (const json* c = root.get("churn")) parse_churn(*c, s);
  root.get("description");  // free-form note, ignored
  root.reject_unknown();

  s.validate();
  return s;
}

json read_scenario_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("scenario", "cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario", path.string() + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_scenario_json(path)); }

void apply_override(json& doc, std::string_view dotted_key, std::string_view value) {
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (const json::parse_error&) {
    parsed = std::string(value);
  }
  json* node = &doc;
  std::string_view rest = dotted_key;
  while (true) {
    const auto dot = rest.find('.');
    const std::string key(rest.substr(0, dot));
    if (key.empty()) throw ConfigError(std::string(dotted_key), "empty key segment");
    if (dot == std::string_view::npos) {
      (*node)[key] = parsed;
      return;
    }
    json& child = (*node)[key];
    if (child.is_null()) child = json::object();
    if (!child.is_object()) throw ConfigError(std::string(dotted_key), "not an object");
    node = &child;
    rest = rest.substr(dot + 1);
  }
}

}  // namespace gossipmon
