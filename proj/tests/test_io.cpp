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

#include <doctest.h>

#include <sstream>

#include "grp/io.hpp"
#include "test_util.hpp"

using namespace grp;
using nlohmann::json;

namespace {

std::string error_of(const json& doc) {
  try {
    parse_market(doc);
  } catch (const InputError& e) {
    return e.what();
  }
  return {};
}

json table2_doc() { return read_json_file(testing::data_path("table2.json")); }

}  // namespace

TEST_CASE("market documents") {
  const MarketDocument m = testing::load("table2.json");
  CHECK(m.ask.supplies == Bundle{4, 4});
  CHECK(m.bids.size() == 5);
  CHECK(m.config.relativity == std::vector<double>{1, 2});
  CHECK(m.config.tie_break == TieBreak::kById);

  json doc = table2_doc();
  doc.erase("config");
  CHECK(parse_market(doc).config.relativity == std::vector<double>{1, 2});
  CHECK(parse_market(doc).config.density_exponent == 1.0);

  const MarketDocument back = parse_market(market_to_json(m));
  CHECK(back.bids[3].bundle == m.bids[3].bundle);
  CHECK(back.config.relativity == m.config.relativity);
}

TEST_CASE("market diagnostics name the offending field") {
  json doc = table2_doc();
  doc["bids"][2]["bundle"][1] = "two";
  CHECK(error_of(doc).find("bids[2].bundle[1]") != std::string::npos);

  doc = table2_doc();
  doc["bids"][0].erase("valuation");
  CHECK(error_of(doc).find("bids[0].valuation") != std::string::npos);

  doc = table2_doc();
  doc["bids"][1]["bundle"] = {1, 2, 3};
  CHECK_FALSE(error_of(doc).empty());

  doc = table2_doc();
  doc["bids"][4]["id"] = "b1";
  CHECK(error_of(doc).find("duplicate") != std::string::npos);

  doc = table2_doc();
  doc["config"]["tie_break"] = "random";
  CHECK(error_of(doc).find("config.tie_break") != std::string::npos);

  doc = table2_doc();
  doc["schema_version"] = 7;
  CHECK(error_of(doc).find("schema_version") != std::string::npos);

  CHECK(error_of(json::array()).find("$") != std::string::npos);
  CHECK_THROWS_AS(read_json_file(testing::data_path("missing.json")), InputError);
}

TEST_CASE("outcome documents round-trip and re-validate") {
  for (const char* name : {"table2.json", "table5.json"}) {
    for (double q : {1.0, 0.5}) {
      MarketDocument m = testing::load(name);
      m.config.density_exponent = q;
      const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
      const json doc = outcome_to_json(m, p);
      const OutcomeDocument back = parse_outcome(json::parse(doc.dump()));
      CHECK(back.outcome.winners == p.outcome.winners);
      CHECK(back.outcome.payments == p.outcome.payments);
      CHECK(back.outcome.sold == p.outcome.sold);
      CHECK(back.revenue == p.revenue);
      CHECK(outcome_violations(back.market.ask, back.market.bids, back.outcome).empty());
    }
  }
  const MarketDocument m = testing::load("table2.json");
  const json doc = outcome_to_json(m, run_auction(m.ask, m.bids, m.config));
  CHECK(doc["winners"] == json({"b4", "b1", "b2"}));
  CHECK(doc["bids"][0]["price_basis"] == "reserve");
  CHECK(doc["bids"][3]["price_basis"] == "competitor");
  CHECK(doc["bids"][4]["price_basis"].is_null());
  CHECK(doc["schema_version"] == kSchemaVersion);
}

TEST_CASE("scenario documents") {
  json doc = {{"n_buyers", 20}, {"k", 2}, {"seed", 5}, {"supply_pcts", {50, 100}}};
  const ScenarioSpec s = parse_scenario(doc);
  CHECK(s.n_buyers == 20);
  CHECK(s.seed == 5);
  CHECK(s.cost_params.size() == 4);
  const ScenarioSpec back = parse_scenario(scenario_to_json(s));
  CHECK(back.supply_pcts == s.supply_pcts);
  CHECK(back.rp_levels == s.rp_levels);

  doc.erase("seed");
  CHECK_THROWS_AS(parse_scenario(doc), InputError);
  CHECK_THROWS_AS(parse_scenario({{"seed", 1}, {"k", 2}, {"supply_combos", {{50}}}}), InputError);
  CHECK_THROWS_AS(parse_scenario({{"seed", 1}, {"cost_params", {{{"run", 1}}}}}), InputError);
}

TEST_CASE("results table columns") {
  const auto cols = csv_columns(2);
  const std::vector<std::string> expected{
      "setting_id", "k", "supply_pct_1", "supply_pct_2", "rp_level", "q", "n", "util_1",
      "util_2", "util_avg", "revenue", "buyer_utility", "allocated_value", "cost_run",
      "cost_idle", "total_cost", "seller_utility", "ratio_mkp", "ratio_mkp_rp", "t_mech_ms",
      "t_mkp_ms", "replications", "seed", "schema_version"};
  CHECK(cols == expected);
  CHECK(csv_columns(3).size() == expected.size() + 2);
}

TEST_CASE("results rows parse back") {
  ScenarioSpec spec;
  spec.k = 2;
  spec.seed = 3;
  GridRow row;
  row.setting_id = 7;
  row.supply_pcts = {50, 75};
  row.rp_level = 0.3;
  row.replications = 4;
  row.mean.utilization = {1.0, 0.5};
  row.mean.util_avg = 0.75;
  row.mean.revenue = 1.0 / 3.0;
  row.mean.ratio_mkp = 0.9;

  std::stringstream ss;
  write_csv_header(ss, 2);
  write_csv_row(ss, spec, row);
  const std::string text = ss.str();
  CHECK(text.find(",0.333333,") != std::string::npos);
  CHECK(text.find(",0.900000,,,,4,3,1\n") != std::string::npos);

  const CsvTable t = parse_csv(ss);
  REQUIRE(t.rows.size() == 1);
  CHECK(t.number(0, "setting_id") == 7);
  CHECK(t.number(0, "util_2") == 0.5);
  CHECK(t.rows[0][t.column("ratio_mkp_rp")].empty());
  CHECK_THROWS_AS(t.number(0, "ratio_mkp_rp"), InputError);
  CHECK_THROWS_AS(t.column("nope"), InputError);

  std::istringstream ragged("a,b\n1\n");
  CHECK_THROWS_AS(parse_csv(ragged), InputError);
}
