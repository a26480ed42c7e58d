// Copyright 2026 The greedy-rp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "grp/io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace grp {

using nlohmann::json;

namespace {

const json& field(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw InputError(path + ": expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw InputError(path + "." + key + ": missing");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) throw InputError(path + ": expected a number");
  return v.get<double>();
}

std::int64_t integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) {
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    }
    throw InputError(path + ": expected an integer");
  }
  return v.get<std::int64_t>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& path) {
  const std::int64_t x = integer(v, path);
  if (x < 0 && !v.is_number_unsigned()) throw InputError(path + ": must be >= 0");
  return v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(x);
}

bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) throw InputError(path + ": expected true or false");
  return v.get<bool>();
}

const json& array(const json& v, const std::string& path) {
  if (!v.is_array()) throw InputError(path + ": expected an array");
  return v;
}

std::vector<double> numbers(const json& v, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) {
    out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Bundle integers(const json& v, const std::string& path) {
  Bundle out;
  for (std::size_t i = 0; i < array(v, path).size(); ++i) {
    out.push_back(integer(v[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

void check_schema(const json& doc) {
  if (doc.is_object() && doc.contains("schema_version")) {
    if (integer(doc["schema_version"], "schema_version") != kSchemaVersion) {
      throw InputError("schema_version: unsupported (expected " + std::to_string(kSchemaVersion) +
                       ")");
    }
  }
}

TruncatedNormal parse_dist(const json& v, const std::string& path, TruncatedNormal d) {
  if (!v.is_object()) throw InputError(path + ": expected an object");
  if (v.contains("mean")) d.mean = number(v["mean"], path + ".mean");
  if (v.contains("sd")) d.sd = number(v["sd"], path + ".sd");
  if (v.contains("min")) d.min = number(v["min"], path + ".min");
  if (v.contains("max")) d.max = number(v["max"], path + ".max");
  return d;
}

json dist_to_json(const TruncatedNormal& d) {
  return {{"mean", d.mean}, {"sd", d.sd}, {"min", d.min}, {"max", d.max}};
}

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

std::string fixed6(const std::optional<double>& x) { return x ? fixed6(*x) : std::string(); }

}  // namespace

MarketDocument parse_market(const json& doc) {
  check_schema(doc);
  MarketDocument m;
  const json& ask = field(doc, "ask", "$");
  m.ask.supplies = integers(field(ask, "supplies", "ask"), "ask.supplies");
  m.ask.reserve_prices = numbers(field(ask, "reserve_prices", "ask"), "ask.reserve_prices");

  const json& bids = array(field(doc, "bids", "$"), "bids");
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const std::string path = "bids[" + std::to_string(j) + "]";
    Bid b;
    const json& id = field(bids[j], "id", path);
    if (!id.is_string()) throw InputError(path + ".id: expected a string");
    b.id = id.get<std::string>();
    b.bundle = integers(field(bids[j], "bundle", path), path + ".bundle");
    b.valuation = number(field(bids[j], "valuation", path), path + ".valuation");
    m.bids.push_back(std::move(b));
  }

  try {
    validate(m.ask);
    m.config.density_exponent = 1.0;
    m.config.tie_break = TieBreak::kById;
    bool have_relativity = false;
    if (doc.contains("config")) {
      const json& cfg = doc["config"];
      if (!cfg.is_object()) throw InputError("config: expected an object");
      if (cfg.contains("relativity")) {
        m.config.relativity = numbers(cfg["relativity"], "config.relativity");
        have_relativity = true;
      }
      if (cfg.contains("q")) m.config.density_exponent = number(cfg["q"], "config.q");
      if (cfg.contains("tie_break")) {
        const json& tb = cfg["tie_break"];
        if (tb == "by_id") {
          m.config.tie_break = TieBreak::kById;
        } else if (tb == "input_order") {
          m.config.tie_break = TieBreak::kInputOrder;
        } else {
          throw InputError("config.tie_break: expected \"by_id\" or \"input_order\"");
        }
      }
    }
    for (std::size_t j = 0; j < m.bids.size(); ++j) {
      try {
        validate(m.bids[j], m.ask.types());
      } catch (const Error& e) {
        throw InputError("bids[" + std::to_string(j) + "]: " + e.what());
      }
    }
    if (!have_relativity) m.config.relativity = default_relativity(m.ask);
    validate_market(m.ask, m.bids, m.config);
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  return m;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

MarketDocument read_market(const std::filesystem::path& path) {
  return parse_market(read_json_file(path));
}

json market_to_json(const MarketDocument& m) {
  json bids = json::array();
  for (const Bid& b : m.bids) {
    bids.push_back({{"id", b.id}, {"bundle", b.bundle}, {"valuation", b.valuation}});
  }
  return {{"schema_version", kSchemaVersion},
          {"ask", {{"supplies", m.ask.supplies}, {"reserve_prices", m.ask.reserve_prices}}},
          {"bids", bids},
          {"config",
           {{"relativity", m.config.relativity},
            {"q", m.config.density_exponent},
            {"tie_break", m.config.tie_break == TieBreak::kById ? "by_id" : "input_order"}}}};
}

json outcome_to_json(const MarketDocument& market, const PricedOutcome& priced) {
  json winners = json::array();
  for (std::size_t j : priced.outcome.winners) winners.push_back(market.bids[j].id);
  json bids = json::array();
  for (std::size_t j = 0; j < market.bids.size(); ++j) {
    const Bid& b = market.bids[j];
    json entry = {{"id", b.id},
                  {"winner", priced.outcome.is_winner(j)},
                  {"payment", priced.outcome.payments[j]},
                  {"density", priced.densities[j]},
                  {"reserve_price", bundle_reserve(b.bundle, market.ask)},
                  {"competitor_density", priced.competitor_densities[j]},
                  {"critical_density", priced.critical_densities[j]}};
    entry["price_basis"] =
        priced.price_basis[j] ? json(to_string(*priced.price_basis[j])) : json(nullptr);
    bids.push_back(std::move(entry));
  }
  return {{"schema_version", kSchemaVersion},
          {"market", market_to_json(market)},
          {"winners", winners},
          {"bids", bids},
          {"revenue", priced.revenue},
          {"allocated_value", priced.allocated_value},
          {"sold", priced.outcome.sold},
          {"remaining", priced.remaining}};
}

OutcomeDocument parse_outcome(const json& doc) {
  check_schema(doc);
  OutcomeDocument out;
  out.market = parse_market(field(doc, "market", "$"));
  const auto& bids = out.market.bids;
  auto index_of = [&](const json& id, const std::string& path) {
    if (!id.is_string()) throw InputError(path + ": expected a bidder id");
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (bids[j].id == id.get<std::string>()) return j;
    }
    throw InputError(path + ": unknown bidder '" + id.get<std::string>() + "'");
  };

  const json& winners = array(field(doc, "winners", "$"), "winners");
  for (std::size_t w = 0; w < winners.size(); ++w) {
    out.outcome.winners.push_back(index_of(winners[w], "winners[" + std::to_string(w) + "]"));
  }
  out.outcome.payments.assign(bids.size(), 0.0);
  const json& per_bid = array(field(doc, "bids", "$"), "bids");
  if (per_bid.size() != bids.size()) throw InputError("bids: length differs from market.bids");
  for (std::size_t e = 0; e < per_bid.size(); ++e) {
    const std::string path = "bids[" + std::to_string(e) + "]";
    const std::size_t j = index_of(field(per_bid[e], "id", path), path + ".id");
    out.outcome.payments[j] = number(field(per_bid[e], "payment", path), path + ".payment");
  }
  out.outcome.sold = integers(field(doc, "sold", "$"), "sold");
  out.revenue = number(field(doc, "revenue", "$"), "revenue");
  out.allocated_value = number(field(doc, "allocated_value", "$"), "allocated_value");
  return out;
}

json optimal_to_json(std::span<const Bid> bids, const OptimalResult& r) {
  json winners = json::array();
  for (std::size_t j : r.winners) winners.push_back(bids[j].id);
  return {{"schema_version", kSchemaVersion},
          {"welfare", r.welfare},
          {"winners", winners},
          {"method", to_string(r.method)}};
}

json deviation_to_json(const DeviationReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"target", r.deviation.target},
          {"kind", to_string(r.deviation.kind)},
          {"declared_bundle", r.deviation.declared_bundle},
          {"declared_valuation", r.deviation.declared_valuation},
          {"deviated_wins", r.deviated_wins},
          {"deviated_payment", r.deviated_payment},
          {"truthful_utility", r.truthful_utility},
          {"deviated_utility", r.deviated_utility},
          {"profitable", r.profitable}};
}

ScenarioSpec parse_scenario(const json& doc) {
  check_schema(doc);
  if (!doc.is_object()) throw InputError("$: expected an object");
  ScenarioSpec s;
  if (doc.contains("n_buyers")) s.n_buyers = unsigned_integer(doc["n_buyers"], "n_buyers");
  if (doc.contains("k")) s.k = unsigned_integer(doc["k"], "k");
  if (doc.contains("bundle_dist")) s.bundle_dist = parse_dist(doc["bundle_dist"], "bundle_dist", s.bundle_dist);
  if (doc.contains("valuation_dist")) {
    s.valuation_dist = parse_dist(doc["valuation_dist"], "valuation_dist", s.valuation_dist);
  }
  if (doc.contains("supply_pcts")) s.supply_pcts = numbers(doc["supply_pcts"], "supply_pcts");
  if (doc.contains("supply_combos")) {
    const json& combos = array(doc["supply_combos"], "supply_combos");
    for (std::size_t c = 0; c < combos.size(); ++c) {
      s.supply_combos.push_back(numbers(combos[c], "supply_combos[" + std::to_string(c) + "]"));
    }
  }
  if (doc.contains("rp_levels")) s.rp_levels = numbers(doc["rp_levels"], "rp_levels");
  if (doc.contains("relativity")) s.relativity = numbers(doc["relativity"], "relativity");
  if (doc.contains("q")) s.q = number(doc["q"], "q");
  if (doc.contains("replications")) {
    s.replications = unsigned_integer(doc["replications"], "replications");
  }
  s.seed = unsigned_integer(field(doc, "seed", "$"), "seed");
  if (doc.contains("cost_params")) {
    s.cost_params.clear();
    const json& costs = array(doc["cost_params"], "cost_params");
    for (std::size_t c = 0; c < costs.size(); ++c) {
      const std::string path = "cost_params[" + std::to_string(c) + "]";
      s.cost_params.push_back({number(field(costs[c], "run", path), path + ".run"),
                               number(field(costs[c], "idle", path), path + ".idle")});
    }
  }
  if (doc.contains("run_oracles")) s.run_oracles = boolean(doc["run_oracles"], "run_oracles");
  if (doc.contains("record_timings")) {
    s.record_timings = boolean(doc["record_timings"], "record_timings");
  }
  if (doc.contains("dp_cell_budget")) {
    s.dp_cell_budget = unsigned_integer(doc["dp_cell_budget"], "dp_cell_budget");
  }
  try {
    validate(s);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  return s;
}

json scenario_to_json(const ScenarioSpec& s) {
  json costs = json::array();
  for (const CostParams& c : s.cost_params) costs.push_back({{"run", c.run}, {"idle", c.idle}});
  json doc = {{"schema_version", kSchemaVersion},
              {"n_buyers", s.n_buyers},
              {"k", s.k},
              {"bundle_dist", dist_to_json(s.bundle_dist)},
              {"valuation_dist", dist_to_json(s.valuation_dist)},
              {"supply_pcts", s.supply_pcts},
              {"rp_levels", s.rp_levels},
              {"q", s.q},
              {"replications", s.replications},
              {"seed", s.seed},
              {"cost_params", costs},
              {"run_oracles", s.run_oracles},
              {"record_timings", s.record_timings},
              {"dp_cell_budget", s.dp_cell_budget}};
  if (!s.supply_combos.empty()) doc["supply_combos"] = s.supply_combos;
  if (!s.relativity.empty()) doc["relativity"] = s.relativity;
  return doc;
}

std::vector<std::string> csv_columns(std::size_t k) {
  std::vector<std::string> c{"setting_id", "k"};
  for (std::size_t i = 1; i <= k; ++i) c.push_back("supply_pct_" + std::to_string(i));
  c.insert(c.end(), {"rp_level", "q", "n"});
  for (std::size_t i = 1; i <= k; ++i) c.push_back("util_" + std::to_string(i));
  c.insert(c.end(), {"util_avg", "revenue", "buyer_utility", "allocated_value", "cost_run",
                     "cost_idle", "total_cost", "seller_utility", "ratio_mkp", "ratio_mkp_rp",
                     "t_mech_ms", "t_mkp_ms", "replications", "seed", "schema_version"});
  return c;
}

void write_csv_header(std::ostream& os, std::size_t k) {
  const auto cols = csv_columns(k);
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
}

void write_csv_row(std::ostream& os, const ScenarioSpec& spec, const GridRow& row) {
  const MetricsRecord& m = row.mean;
  os << row.setting_id << ',' << spec.k;
  for (double p : row.supply_pcts) os << ',' << fixed6(p);
  os << ',' << fixed6(row.rp_level) << ',' << fixed6(spec.q) << ',' << spec.n_buyers;
  for (double u : m.utilization) os << ',' << fixed6(u);
  os << ',' << fixed6(m.util_avg) << ',' << fixed6(m.revenue) << ',' << fixed6(m.buyer_utility)
     << ',' << fixed6(m.allocated_value) << ',' << fixed6(m.cost.run) << ','
     << fixed6(m.cost.idle) << ',' << fixed6(m.total_cost) << ',' << fixed6(m.seller_utility)
     << ',' << fixed6(m.ratio_mkp) << ',' << fixed6(m.ratio_mkp_rp) << ','
     << fixed6(m.mechanism_ms) << ',' << fixed6(m.oracle_ms) << ',' << row.replications << ','
     << spec.seed << ',' << kSchemaVersion << '\n';
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw InputError("csv: no column '" + name + "'");
}

double CsvTable::number(std::size_t row, const std::string& name) const {
  const std::string& cell = rows.at(row).at(column(name));
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::logic_error&) {
    throw InputError("csv: row " + std::to_string(row) + " column '" + name +
                     "' is not a number: '" + cell + "'");
  }
}

CsvTable parse_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(is, line)) return t;
  t.header = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw InputError("csv: row " + std::to_string(t.rows.size()) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace grp
