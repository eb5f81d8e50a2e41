// Copyright 2026 The relay-truth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relay_truth/scenario.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "json.hpp"
#include "relay_truth/errors.h"

namespace relay_truth {
namespace {

using nlohmann::json;

[[noreturn]] void Fail(const std::string& field, const std::string& what) {
  throw ConfigError("scenario field '" + field + "': " + what);
}

void RequireObject(const json& j, const std::string& where) {
  if (!j.is_object()) Fail(where, "expected an object");
}

void CheckKeys(const json& obj, const std::string& where,
               std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      Fail(where.empty() ? key : where + "." + key, "unknown key");
    }
  }
}

std::string Path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

double Number(const json& obj, const std::string& where,
              const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number()) Fail(Path(where, key), "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) Fail(Path(where, key), "must be finite");
  return x;
}

std::optional<double> OptNumber(const json& obj, const std::string& where,
                                const std::string& key) {
  if (!obj.contains(key)) return std::nullopt;
  return Number(obj, where, key);
}

std::int64_t Integer(const json& obj, const std::string& where,
                     const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) Fail(Path(where, key), "expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t Unsigned(const json& obj, const std::string& where,
                       const std::string& key) {
  const json& v = obj.at(key);
  if (!v.is_number_unsigned()) {
    Fail(Path(where, key), "expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

// Linear SNR from either `base` (linear) or `base`_db.
std::optional<double> Snr(const json& obj, const std::string& where,
                          const std::string& base) {
  const bool linear = obj.contains(base);
  const bool db = obj.contains(base + "_db");
  if (linear && db) {
    Fail(Path(where, base), "give either linear or dB, not both");
  }
  if (db) return DbToLinear(Number(obj, where, base + "_db"));
  if (linear) {
    const double x = Number(obj, where, base);
    if (x < 0.0) Fail(Path(where, base), "must be >= 0");
    return x;
  }
  return std::nullopt;
}

ReportGrid ParseGrid(const json& j, const std::string& where,
                     ReportGrid grid) {
  RequireObject(j, where);
  CheckKeys(j, where, {"min", "max", "step"});
  if (j.contains("min")) grid.min = Number(j, where, "min");
  if (j.contains("max")) grid.max = Number(j, where, "max");
  if (j.contains("step")) grid.step = Number(j, where, "step");
  try {
    grid.Validate();
  } catch (const ArgumentError& e) {
    Fail(where, e.what());
  }
  return grid;
}

RelayInput ParseRelay(const json& j, const std::string& where) {
  RequireObject(j, where);
  CheckKeys(j, where,
            {"id", "rate", "snr_d", "snr_e", "snr_d_db", "snr_e_db"});
  if (!j.contains("id")) Fail(Path(where, "id"), "missing");
  RelayInput r;
  const std::int64_t id = Integer(j, where, "id");
  if (id < 1) Fail(Path(where, "id"), "must be >= 1");
  r.id = static_cast<int>(id);
  r.rate = OptNumber(j, where, "rate");
  r.snr_d = Snr(j, where, "snr_d");
  r.snr_e = Snr(j, where, "snr_e");
  if (r.snr_d.has_value() != r.snr_e.has_value()) {
    Fail(where, "an SNR pair needs both snr_d and snr_e");
  }
  if (r.rate && r.snr_d) Fail(where, "give either rate or an SNR pair, not both");
  if (!r.rate && !r.snr_d) Fail(where, "needs a rate or an SNR pair");
  if (r.rate && *r.rate < 0.0) Fail(Path(where, "rate"), "must be >= 0");
  return r;
}

RelaySet ParseRelayList(const json& j, const std::string& where,
                        std::string label) {
  if (!j.is_array() || j.empty()) Fail(where, "expected a non-empty array");
  RelaySet set;
  set.label = std::move(label);
  for (std::size_t i = 0; i < j.size(); ++i) {
    set.relays.push_back(ParseRelay(j[i], where + "[" + std::to_string(i) + "]"));
  }
  std::sort(set.relays.begin(), set.relays.end(),
            [](const RelayInput& a, const RelayInput& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < set.relays.size(); ++i) {
    if (set.relays[i].id != static_cast<int>(i) + 1) {
      Fail(where, "relay ids must be unique and cover 1..N");
    }
  }
  return set;
}

std::string FormatForError(double x) {
  std::ostringstream s;
  s << x;
  return s.str();
}

}  // namespace

bool RelaySet::has_snr() const {
  return std::all_of(relays.begin(), relays.end(),
                     [](const RelayInput& r) { return r.has_snr(); });
}

Scenario ParseScenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  RequireObject(root, "<root>");
  CheckKeys(root, "",
            {"schema_version", "name", "price", "k", "bandwidth", "direct_link",
             "relays", "relay_sets", "prior", "mc", "grid", "true_rate_grid",
             "mechanisms", "k_values", "focus_relay"});

  Scenario s;
  if (!root.contains("schema_version")) Fail("schema_version", "missing");
  s.schema_version = static_cast<int>(Integer(root, "", "schema_version"));
  if (s.schema_version != kScenarioSchemaVersion) {
    Fail("schema_version", "unsupported version " +
                               std::to_string(s.schema_version));
  }
  if (!root.contains("name") || !root["name"].is_string() ||
      root["name"].get<std::string>().empty()) {
    Fail("name", "expected a non-empty string");
  }
  s.name = root["name"].get<std::string>();

  if (root.contains("price")) {
    s.price = Number(root, "", "price");
    if (s.price <= 0.0) Fail("price", "must be > 0");
  }
  if (root.contains("bandwidth")) {
    s.bandwidth = Number(root, "", "bandwidth");
    if (s.bandwidth <= 0.0) Fail("bandwidth", "must be > 0");
  }
  if (root.contains("k")) {
    const json& k = root["k"];
    if (k.is_string() && k.get<std::string>() == "auto") {
      s.k = std::nullopt;
    } else if (k.is_number_integer() && k.get<std::int64_t>() >= 1) {
      s.k = static_cast<int>(k.get<std::int64_t>());
    } else {
      Fail("k", "expected a positive integer or \"auto\"");
    }
  } else {
    Fail("k", "missing");
  }

  if (root.contains("direct_link")) {
    const json& d = root["direct_link"];
    RequireObject(d, "direct_link");
    CheckKeys(d, "direct_link", {"snr_d", "snr_e", "snr_d_db", "snr_e_db"});
    const auto sd = Snr(d, "direct_link", "snr_d");
    const auto se = Snr(d, "direct_link", "snr_e");
    if (!sd || !se) Fail("direct_link", "needs both snr_d and snr_e");
    s.direct = DirectLink::FromSnr(*sd, *se);
  }

  const bool has_relays = root.contains("relays");
  const bool has_sets = root.contains("relay_sets");
  if (has_relays == has_sets) {
    Fail("relays", "give exactly one of 'relays' or 'relay_sets'");
  }
  if (has_relays) {
    s.relay_sets.push_back(ParseRelayList(root["relays"], "relays", "1"));
  } else {
    const json& sets = root["relay_sets"];
    if (!sets.is_array() || sets.empty()) {
      Fail("relay_sets", "expected a non-empty array");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string where = "relay_sets[" + std::to_string(i) + "]";
      RequireObject(sets[i], where);
      CheckKeys(sets[i], where, {"label", "relays"});
      if (!sets[i].contains("label") || !sets[i]["label"].is_string()) {
        Fail(Path(where, "label"), "expected a string");
      }
      if (!sets[i].contains("relays")) Fail(Path(where, "relays"), "missing");
      s.relay_sets.push_back(ParseRelayList(sets[i]["relays"],
                                            Path(where, "relays"),
                                            sets[i]["label"].get<std::string>()));
    }
  }

  if (root.contains("prior")) {
    const json& p = root["prior"];
    RequireObject(p, "prior");
    CheckKeys(p, "prior", {"kind"});
    if (!p.contains("kind") || p["kind"] != "exponential") {
      Fail("prior.kind", "only \"exponential\" is supported");
    }
  }

  if (root.contains("mc")) {
    const json& mc = root["mc"];
    RequireObject(mc, "mc");
    CheckKeys(mc, "mc", {"samples", "seed", "stream_id", "workers"});
    if (mc.contains("samples")) {
      s.mc.samples = Unsigned(mc, "mc", "samples");
      if (s.mc.samples < 1) Fail("mc.samples", "must be >= 1");
    }
    if (mc.contains("seed")) s.mc.seed = Unsigned(mc, "mc", "seed");
    if (mc.contains("stream_id")) s.mc.stream_id = Unsigned(mc, "mc", "stream_id");
    if (mc.contains("workers")) {
      const std::int64_t w = Integer(mc, "mc", "workers");
      if (w < 1) Fail("mc.workers", "must be >= 1");
      s.mc.workers = static_cast<int>(w);
    }
  }

  if (root.contains("grid")) s.grid = ParseGrid(root["grid"], "grid", s.grid);
  if (root.contains("true_rate_grid")) {
    s.true_rate_grid =
        ParseGrid(root["true_rate_grid"], "true_rate_grid", s.true_rate_grid);
  }

  if (root.contains("mechanisms")) {
    const json& m = root["mechanisms"];
    if (!m.is_array() || m.empty()) Fail("mechanisms", "expected a non-empty array");
    s.mechanisms.clear();
    for (const json& name : m) {
      const auto parsed =
          name.is_string() ? ParseMechanism(name.get<std::string>()) : std::nullopt;
      if (!parsed) Fail("mechanisms", "unknown mechanism " + name.dump());
      s.mechanisms.push_back(*parsed);
    }
  }

  const int n = static_cast<int>(s.relay_sets.front().relays.size());
  if (root.contains("k_values")) {
    const json& ks = root["k_values"];
    if (!ks.is_array()) Fail("k_values", "expected an array");
    for (const json& k : ks) {
      if (!k.is_number_integer() || k.get<std::int64_t>() < 1 ||
          k.get<std::int64_t>() > n) {
        Fail("k_values", "entries must be integers in 1..N");
      }
      s.k_values.push_back(static_cast<int>(k.get<std::int64_t>()));
    }
  }
  if (root.contains("focus_relay")) {
    const std::int64_t f = Integer(root, "", "focus_relay");
    if (f < 1 || f > n) Fail("focus_relay", "must be a relay id in 1..N");
    s.focus_relay = static_cast<int>(f);
  }

  for (const RelaySet& set : s.relay_sets) {
    if (s.k && *s.k > static_cast<int>(set.relays.size())) {
      Fail("k", "exceeds the relay count " +
                    std::to_string(set.relays.size()) + " of set '" +
                    set.label + "'");
    }
    if (!s.k && !set.has_snr()) {
      Fail("k", "\"auto\" needs SNR pairs on every relay");
    }
  }
  if (!s.k && !s.direct) Fail("k", "\"auto\" needs a direct_link");
  return s;
}

Scenario LoadScenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseScenario(buffer.str());
}

std::string SerializeScenario(const Scenario& s) {
  json root;
  root["schema_version"] = s.schema_version;
  root["name"] = s.name;
  root["price"] = s.price;
  if (s.k) {
    root["k"] = *s.k;
  } else {
    root["k"] = "auto";
  }
  root["bandwidth"] = s.bandwidth;
  if (s.direct) {
    root["direct_link"] = {{"snr_d", s.direct->snr_sd()},
                           {"snr_e", s.direct->snr_se()}};
  }
  json sets = json::array();
  for (const RelaySet& set : s.relay_sets) {
    json relays = json::array();
    for (const RelayInput& r : set.relays) {
      json jr = {{"id", r.id}};
      if (r.rate) jr["rate"] = *r.rate;
      if (r.snr_d) jr["snr_d"] = *r.snr_d;
      if (r.snr_e) jr["snr_e"] = *r.snr_e;
      relays.push_back(std::move(jr));
    }
    sets.push_back({{"label", set.label}, {"relays", std::move(relays)}});
  }
  root["relay_sets"] = std::move(sets);
  root["prior"] = {{"kind", "exponential"}};
  root["mc"] = {{"samples", s.mc.samples},
                {"seed", s.mc.seed},
                {"stream_id", s.mc.stream_id},
                {"workers", s.mc.workers}};
  root["grid"] = {{"min", s.grid.min}, {"max", s.grid.max}, {"step", s.grid.step}};
  root["true_rate_grid"] = {{"min", s.true_rate_grid.min},
                            {"max", s.true_rate_grid.max},
                            {"step", s.true_rate_grid.step}};
  json mechanisms = json::array();
  for (Mechanism m : s.mechanisms) mechanisms.push_back(MechanismName(m));
  root["mechanisms"] = std::move(mechanisms);
  root["k_values"] = s.k_values;
  root["focus_relay"] = s.focus_relay;
  return root.dump(2);
}

std::vector<double> TrueRates(const RelaySet& set, double bandwidth) {
  std::vector<double> rates;
  for (const RelayInput& r : set.relays) {
    if (r.rate) {
      rates.push_back(*r.rate);
    } else {
      rates.push_back(RelaySecrecyRate(
          RelayChannel::FromSnr(r.id, *r.snr_d, *r.snr_e, bandwidth)));
    }
  }
  return rates;
}

ReportVector ChannelReports(const RelaySet& set, double bandwidth) {
  std::vector<RelayChannel> channels;
  for (const RelayInput& r : set.relays) {
    if (!r.has_snr()) {
      throw ConfigError("relay " + std::to_string(r.id) + " of set '" +
                        set.label + "' has no SNR pair");
    }
    channels.push_back(RelayChannel::FromSnr(r.id, *r.snr_d, *r.snr_e, bandwidth));
  }
  return ReportVector::FromChannels(channels);
}

GameSpec ToGameSpec(const Scenario& scenario, const RelaySet& set) {
  GameSpec spec;
  spec.n = static_cast<int>(set.relays.size());
  spec.price = scenario.price;
  spec.prior = scenario.prior;
  spec.true_rates = TrueRates(set, scenario.bandwidth);
  if (scenario.k) {
    spec.k = *scenario.k;
  } else {
    if (!scenario.direct) throw ConfigError("\"auto\" K needs a direct link");
    spec.k = OptimalKSelection(*scenario.direct,
                               ChannelReports(set, scenario.bandwidth))
                 .k;
  }
  try {
    spec.Validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("scenario '") + scenario.name +
                      "' does not form a valid game: " + e.what() + " (price " +
                      FormatForError(spec.price) + ")");
  }
  return spec;
}

}  // namespace relay_truth
