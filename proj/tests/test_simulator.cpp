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

#include <algorithm>
#include <sstream>

#include "grp/io.hpp"
#include "grp/simulator.hpp"
#include "test_util.hpp"

using namespace grp;

namespace {

ScenarioSpec small_spec() {
  ScenarioSpec s;
  s.n_buyers = 12;
  s.k = 2;
  s.supply_pcts = {50, 100};
  s.rp_levels = {0.0, 0.4, 0.8};
  s.replications = 6;
  s.seed = 42;
  return s;
}

std::string csv_of(const ScenarioSpec& spec, std::size_t jobs) {
  std::ostringstream os;
  write_csv_header(os, spec.k);
  GridOptions o;
  o.jobs = jobs;
  o.on_row = [&](const GridRow& r) { write_csv_row(os, spec, r); };
  run_grid(spec, o);
  return os.str();
}

}  // namespace

TEST_CASE("truncated normal samples stay in range with the right mean") {
  const ScenarioSpec spec;
  std::mt19937_64 rng(1);
  double sum = 0.0, lo = 1e9, hi = -1e9;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = spec.bundle_dist.sample(rng);
    sum += x;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  CHECK(sum / n == doctest::Approx(2.5).epsilon(0.02 / 2.5));
  CHECK(lo >= 0.0);
  CHECK(hi <= 5.0);

  sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = spec.valuation_dist.sample(rng);
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
    sum += x;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01 / 0.5));
}

TEST_CASE("generated bids") {
  ScenarioSpec spec;
  spec.k = 3;
  spec.n_buyers = 500;
  auto rng = replication_stream(9, 0);
  const auto bids = generate_bids(spec, rng);
  REQUIRE(bids.size() == 500);
  CHECK(bids.front().id == "b001");
  CHECK(bids.back().id == "b500");
  const std::vector<double> f{1, 2, 4};
  for (const Bid& b : bids) {
    CHECK(std::any_of(b.bundle.begin(), b.bundle.end(), [](std::int64_t x) { return x > 0; }));
    for (std::int64_t r : b.bundle) CHECK((r >= 0 && r <= 5));
    const double unit = b.valuation / bundle_weight(b.bundle, f);
    CHECK((unit >= 0.0 && unit <= 1.0));
  }
  auto again = replication_stream(9, 0);
  const auto same = generate_bids(spec, again);
  for (std::size_t j = 0; j < bids.size(); ++j) {
    CHECK(same[j].bundle == bids[j].bundle);
    CHECK(same[j].valuation == bids[j].valuation);
  }
  auto other = replication_stream(9, 1);
  CHECK(generate_bids(spec, other)[0].valuation != bids[0].valuation);
}

TEST_CASE("default relativity is 1:2:4 truncated to k") {
  ScenarioSpec s;
  s.k = 2;
  CHECK(scenario_relativity(s) == std::vector<double>{1, 2});
  s.k = 3;
  CHECK(scenario_relativity(s) == std::vector<double>{1, 2, 4});
}

TEST_CASE("derive_ask") {
  std::vector<Bid> bids{{"a", {60, 70}, 1}, {"b", {40, 50}, 1}};
  const std::vector<double> f{1, 2};
  const Ask ask = derive_ask(bids, std::vector<double>{50, 75}, 0.3, f);
  CHECK(ask.supplies == Bundle{50, 90});
  CHECK(ask.reserve_prices[0] == doctest::Approx(0.3));
  CHECK(ask.reserve_prices[1] == doctest::Approx(0.6));
  CHECK(derive_ask(bids, std::vector<double>{100, 100}, 0, f).supplies == Bundle{100, 120});
  // Half units round up.
  std::vector<Bid> odd{{"a", {3}, 1}};
  CHECK(derive_ask(odd, std::vector<double>{50}, 0, std::vector<double>{1}).supplies == Bundle{2});
  CHECK_THROWS_AS(derive_ask(std::vector<Bid>{}, std::vector<double>{50}, 0, std::vector<double>{1}),
                  PreconditionError);
}

TEST_CASE("cost of the table2 outcome") {
  const MarketDocument m = testing::load("table2.json");
  const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
  const MetricsRecord r =
      compute_metrics(m.ask, m.bids, p, {}, CostParams{0.125, 0.0625}, m.config.relativity);
  CHECK(r.total_cost == doctest::Approx(1.25).epsilon(1e-12));
  CHECK(r.utilization == std::vector<double>{1.0, 0.5});
  CHECK(r.util_avg == 0.75);
  CHECK(r.reserve_paid == 64.0);
  CHECK(r.buyer_utility + r.revenue == doctest::Approx(r.allocated_value));
  CHECK(r.seller_utility == doctest::Approx(r.revenue - 1.25));
  CHECK_FALSE(r.ratio_mkp.has_value());

  const MetricsRecord flat =
      compute_metrics(m.ask, m.bids, p, {111.0, 88.0}, CostParams{0.1, 0.1}, m.config.relativity);
  CHECK(flat.total_cost == doctest::Approx(0.1 * 12));
  CHECK(*flat.ratio_mkp_rp == doctest::Approx(80.0 / 88.0));
  CHECK(*flat.ratio_mkp == doctest::Approx(80.0 / 111.0));
}

TEST_CASE("grid size") {
  ScenarioSpec s;
  s.k = 2;
  s.cost_params = {CostParams{}};
  CHECK(total_settings(s) == 250);
  CHECK(supply_settings(s).front() == std::vector<double>{50, 50});
  CHECK(supply_settings(s)[1] == std::vector<double>{50, 75});
  s.k = 1;
  CHECK(total_settings(s) == 50);
  s.k = 3;
  CHECK(total_settings(s) == 1250);
  s.supply_combos = {{50, 50, 50}, {100, 75, 75}};
  CHECK(total_settings(s) == 20);
}

TEST_CASE("zero replications produce a header-only table") {
  ScenarioSpec s = small_spec();
  s.replications = 0;
  const std::string csv = csv_of(s, 1);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("grid output does not depend on the worker count") {
  const ScenarioSpec s = small_spec();
  const std::string one = csv_of(s, 1);
  CHECK(one == csv_of(s, 3));
  CHECK(one == csv_of(s, 1));
}

TEST_CASE("grid identities and trends") {
  ScenarioSpec s = small_spec();
  s.n_buyers = 20;
  s.replications = 10;
  const auto rows = run_grid(s);
  REQUIRE(rows.size() == total_settings(s));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const GridRow& r = rows[i];
    CHECK(r.setting_id == i);
    const MetricsRecord& m = r.mean;
    CHECK(m.buyer_utility + m.revenue == doctest::Approx(m.allocated_value).epsilon(1e-9));
    CHECK(m.revenue >= m.reserve_paid - 1e-9);
    CHECK(m.seller_utility == doctest::Approx(m.revenue - m.total_cost).epsilon(1e-9));
    CHECK(*m.ratio_mkp_rp <= 1.0 + 1e-9);
    CHECK(*m.ratio_mkp <= *m.ratio_mkp_rp + 1e-9);
    for (double u : m.utilization) CHECK((u >= 0.0 && u <= 1.0));
    CHECK_FALSE(m.mechanism_ms.has_value());
  }
  // Rows are ordered rp-major within a supply setting, cost fastest.
  const std::size_t costs = s.cost_params.size();
  for (std::size_t c = 0; c < supply_settings(s).size(); ++c) {
    for (std::size_t r = 1; r < s.rp_levels.size(); ++r) {
      const auto& lo = rows[(c * s.rp_levels.size() + r - 1) * costs].mean;
      const auto& hi = rows[(c * s.rp_levels.size() + r) * costs].mean;
      CHECK(hi.util_avg <= lo.util_avg + 1e-12);
    }
  }
}

TEST_CASE("zero reserve price reduces to plain greedy") {
  ScenarioSpec s = small_spec();
  s.rp_levels = {0.0};
  s.replications = 1;
  auto rng = replication_stream(s.seed, 0);
  const auto bids = generate_bids(s, rng);
  const Ask ask = derive_ask(bids, std::vector<double>{100, 100}, 0.0, std::vector<double>{1, 2});
  for (const Bid& b : bids) CHECK(satisfies_rpc(b, ask));
}

TEST_CASE("an under-supplied type throttles the other one") {
  ScenarioSpec s;
  s.n_buyers = 50;
  s.k = 2;
  s.supply_combos = {{75, 125}};
  s.rp_levels = {0.0};
  s.cost_params = {CostParams{}};
  s.replications = 10;
  s.seed = 8;
  s.run_oracles = false;
  const auto rows = run_grid(s);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].mean.utilization[1] < 1.0);
  CHECK(rows[0].mean.utilization[0] > rows[0].mean.utilization[1]);
  CHECK_FALSE(rows[0].mean.ratio_mkp.has_value());
}

TEST_CASE("oracles are skipped past the cell budget") {
  ScenarioSpec s = small_spec();
  s.dp_cell_budget = 10;
  const auto rows = run_grid(s);
  for (const GridRow& r : rows) {
    CHECK_FALSE(r.mean.ratio_mkp.has_value());
    CHECK_FALSE(r.mean.ratio_mkp_rp.has_value());
  }
}

TEST_CASE("timings are recorded on request") {
  ScenarioSpec s = small_spec();
  s.record_timings = true;
  const auto rows = run_grid(s);
  CHECK(rows.front().mean.mechanism_ms.has_value());
  CHECK(*rows.front().mean.oracle_ms >= 0.0);
}

TEST_CASE("scenario validation") {
  ScenarioSpec s = small_spec();
  s.cost_params = {{0.1, 0.2}};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = small_spec();
  s.supply_pcts = {0};
  CHECK_THROWS_AS(validate(s), ValidationError);
  s = small_spec();
  s.supply_combos = {{50}};
  CHECK_THROWS_AS(validate(s), DimensionError);
  s = small_spec();
  s.bundle_dist.sd = 0;
  CHECK_THROWS_AS(validate(s), ValidationError);
}

TEST_CASE("mismatched relativity is rejected before any work starts") {
  ScenarioSpec s = small_spec();
  s.relativity = {1};
  CHECK_THROWS(run_grid(s, GridOptions{3, 0, {}, {}}));
}
