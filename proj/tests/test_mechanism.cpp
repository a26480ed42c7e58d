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
#include <cmath>

#include "grp/mechanism.hpp"
#include "grp/strategy.hpp"
#include "test_util.hpp"

using namespace grp;
using grp::testing::index_of;
using grp::testing::winner_ids;

namespace {

MarketDocument table2(double q) {
  MarketDocument m = testing::load("table2.json");
  m.config.density_exponent = q;
  return m;
}

}  // namespace

TEST_CASE("table2 allocation, linear density") {
  const MarketDocument m = table2(1.0);
  const Allocation a = grp_allocate(m.ask, m.bids, m.config);
  CHECK(winner_ids(m.bids, a.winners) == std::vector<std::string>{"b4", "b1", "b2"});
  CHECK(winner_ids(m.bids, a.trace.sorted_order) ==
        std::vector<std::string>{"b4", "b1", "b3", "b2", "b5"});
  CHECK(a.trace.decisions == std::vector<Decision>{Decision::kGranted, Decision::kGranted,
                                                   Decision::kDeniedArc, Decision::kGranted,
                                                   Decision::kDeniedRpc});
  CHECK(a.trace.remaining.back() == Bundle{0, 2});
}

TEST_CASE("table2 pricing, linear density") {
  const MarketDocument m = table2(1.0);
  const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
  const auto b1 = index_of(m.bids, "b1"), b2 = index_of(m.bids, "b2"), b4 = index_of(m.bids, "b4");
  // b4's competitor after its removal is b3 at 59/6.
  CHECK(p.outcome.payments[b4] == doctest::Approx(295.0 / 6.0).epsilon(1e-12));
  CHECK(p.competitor_densities[b4] == doctest::Approx(59.0 / 6.0).epsilon(1e-12));
  CHECK(*p.price_basis[b4] == PriceBasis::kCompetitor);
  CHECK(p.outcome.payments[b1] == 8.0);
  CHECK(p.outcome.payments[b2] == 16.0);
  CHECK(*p.price_basis[b1] == PriceBasis::kReserve);
  CHECK(*p.price_basis[b2] == PriceBasis::kReserve);
  CHECK(p.outcome.payments[index_of(m.bids, "b3")] == 0.0);
  CHECK(p.outcome.payments[index_of(m.bids, "b5")] == 0.0);
  CHECK_FALSE(p.price_basis[index_of(m.bids, "b5")].has_value());
  CHECK(p.revenue == doctest::Approx(295.0 / 6.0 + 24.0));
  CHECK(p.allocated_value == 80.0);
  CHECK(p.outcome.sold == Bundle{4, 2});
}

TEST_CASE("table2, square-root density") {
  const MarketDocument m = table2(0.5);
  const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
  // b1 <1,0> still fits after b3 and b2 take <2,3>.
  CHECK(winner_ids(m.bids, p.outcome.winners) == std::vector<std::string>{"b3", "b2", "b1"});
  const auto b3 = index_of(m.bids, "b3");
  CHECK(p.outcome.payments[b3] == doctest::Approx(51.0 * std::sqrt(1.2)).epsilon(1e-12));
  CHECK(*p.price_basis[b3] == PriceBasis::kCompetitor);
  CHECK(p.outcome.payments[index_of(m.bids, "b2")] == doctest::Approx(16.0));
  CHECK(p.outcome.payments[index_of(m.bids, "b1")] == doctest::Approx(8.0));
  CHECK(reserve_density(m.bids[b3], m.ask, m.config) == doctest::Approx(48.0 / std::sqrt(6.0)));
}

TEST_CASE("table5 outcome") {
  const MarketDocument m = testing::load("table5.json");
  const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
  CHECK(winner_ids(m.bids, p.outcome.winners) == std::vector<std::string>{"b2", "b1"});
  CHECK(p.outcome.payments[0] == doctest::Approx(5.4).epsilon(1e-12));
  CHECK(p.outcome.payments[1] == doctest::Approx(8.4).epsilon(1e-12));
  CHECK(p.outcome.payments[2] == 0.0);
  CHECK(p.competitor_densities[0] == doctest::Approx(1.5));
  CHECK(p.competitor_densities[1] == doctest::Approx(1.5));
  CHECK(p.revenue == doctest::Approx(13.8));
}

TEST_CASE("empty market") {
  const Ask ask{{4, 4}, {1, 2}};
  const PricedOutcome p = run_auction(ask, std::vector<Bid>{}, MechanismConfig{{1, 2}});
  CHECK(p.outcome.winners.empty());
  CHECK(p.outcome.sold == Bundle{0, 0});
  CHECK(p.revenue == 0.0);
}

TEST_CASE("ties go to the smaller id unless input order is requested") {
  const Ask ask{{1}, {0}};
  const std::vector<Bid> bids{{"b10", {1}, 5}, {"b09", {1}, 5}};
  MechanismConfig c{{1}, 1.0, TieBreak::kById};
  CHECK(winner_ids(bids, grp_allocate(ask, bids, c).winners) == std::vector<std::string>{"b09"});
  c.tie_break = TieBreak::kInputOrder;
  CHECK(winner_ids(bids, grp_allocate(ask, bids, c).winners) == std::vector<std::string>{"b10"});
}

TEST_CASE("grp_price rejects a foreign winner set") {
  const MarketDocument m = table2(1.0);
  const std::vector<std::size_t> wrong{0};
  CHECK_THROWS_AS(grp_price(m.ask, m.bids, m.config, wrong), PreconditionError);
  // Same set in another order is accepted.
  const std::vector<std::size_t> shuffled{1, 0, 3};
  CHECK_NOTHROW(grp_price(m.ask, m.bids, m.config, shuffled));
}

TEST_CASE("random outcomes satisfy ARC, RPC and IR") {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 500; ++t) {
    const MarketDocument m = testing::random_market(rng);
    const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
    const auto v = outcome_violations(m.ask, m.bids, p.outcome);
    CHECK_MESSAGE(v.empty(), (v.empty() ? "" : v.front()));
    for (std::size_t i = 0; i < m.ask.types(); ++i) {
      CHECK(p.remaining[i] == m.ask.supplies[i] - p.outcome.sold[i]);
    }
    for (std::size_t j = 0; j < m.bids.size(); ++j) {
      if (!satisfies_rpc(m.bids[j], m.ask)) CHECK_FALSE(p.outcome.is_winner(j));
    }
  }
}

TEST_CASE("the walk never stops early") {
  // b2 is too big for what b1 leaves, b3 still fits behind it.
  const Ask ask{{3}, {0}};
  const std::vector<Bid> bids{{"b1", {2}, 20}, {"b2", {2}, 18}, {"b3", {1}, 8}};
  const Allocation a = grp_allocate(ask, bids, MechanismConfig{{1}});
  CHECK(winner_ids(bids, a.winners) == std::vector<std::string>{"b1", "b3"});
}

TEST_CASE("outcome does not depend on input order under id tie-break") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 200; ++t) {
    const MarketDocument m = testing::random_market(rng);
    std::vector<Bid> shuffled = m.bids;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const PricedOutcome a = run_auction(m.ask, m.bids, m.config);
    const PricedOutcome b = run_auction(m.ask, shuffled, m.config);
    for (std::size_t j = 0; j < m.bids.size(); ++j) {
      const std::size_t k = index_of(shuffled, m.bids[j].id);
      CHECK(a.outcome.is_winner(j) == b.outcome.is_winner(k));
      CHECK(a.outcome.payments[j] == b.outcome.payments[k]);
    }
  }
}

TEST_CASE("a winner's payment does not move with its own bid") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const MarketDocument m = testing::random_market(rng);
    const PricedOutcome p = run_auction(m.ask, m.bids, m.config);
    for (std::size_t j : p.outcome.winners) {
      std::vector<Bid> raised = m.bids;
      raised[j].valuation *= 1.5;
      const PricedOutcome q = run_auction(m.ask, raised, m.config);
      REQUIRE(q.outcome.is_winner(j));
      CHECK(q.outcome.payments[j] == doctest::Approx(p.outcome.payments[j]).epsilon(1e-9));
    }
  }
}
