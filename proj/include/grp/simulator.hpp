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

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "grp/market.hpp"
#include "grp/mechanism.hpp"
#include "grp/oracle.hpp"

namespace grp {

/// Normal distribution truncated to [min, max] by redrawing out-of-range
/// values.
struct TruncatedNormal {
  double mean = 0.0;
  double sd = 1.0;
  double min = 0.0;
  double max = 1.0;

  double sample(std::mt19937_64& rng) const;
};

/// Running and idle cost per weighted resource unit.
struct CostParams {
  Money run = 0.125;
  Money idle = 0.0625;

  /// ς_run = 25% of the mean unit valuation (0.5), ς_idle at 25/50/75/100%
  /// of ς_run.
  static std::vector<CostParams> standard();
};

struct ScenarioSpec {
  std::size_t n_buyers = 50;
  std::size_t k = 2;
  TruncatedNormal bundle_dist{2.5, 0.833, 0.0, 5.0};
  TruncatedNormal valuation_dist{0.5, 0.166, 0.0, 1.0};
  /// Per-type supply levels (% of realized demand); the grid takes the
  /// k-fold cross product unless `supply_combos` lists settings explicitly.
  std::vector<double> supply_pcts{50, 75, 100, 125, 150};
  std::vector<std::vector<double>> supply_combos;
  std::vector<double> rp_levels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  /// Empty means 1:2:4 truncated to k.
  std::vector<double> relativity;
  double q = 1.0;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::vector<CostParams> cost_params = CostParams::standard();
  bool run_oracles = true;
  bool record_timings = false;
  std::uint64_t dp_cell_budget = kDefaultDpCellBudget;
};

void validate(const ScenarioSpec& spec);

std::vector<double> scenario_relativity(const ScenarioSpec& spec);

/// Supply settings in grid order.
std::vector<std::vector<double>> supply_settings(const ScenarioSpec& spec);

/// Independent generator for one replication, derived from (seed,
/// replication) through SplitMix64 so that work can be scheduled in any
/// order.
std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t replication);

/// n single-minded bids: integer bundle entries drawn per type from the
/// bundle distribution (all-zero bundles redrawn), valuation = unit value
/// from the valuation distribution times the bundle's weighted size.
std::vector<Bid> generate_bids(const ScenarioSpec& spec, std::mt19937_64& rng);

/// s_i = round-half-up(pct_i/100 · Σ_j r_ij), o_i = rp_level · f_i.
Ask derive_ask(std::span<const Bid> bids, std::span<const double> supply_pcts, double rp_level,
               std::span<const double> relativity);

struct OracleWelfare {
  std::optional<Money> mkp;
  std::optional<Money> mkp_rp;
};

struct MetricsRecord {
  std::vector<double> utilization;
  double util_avg = 0.0;
  Money revenue = 0.0;
  Money buyer_utility = 0.0;
  Money allocated_value = 0.0;
  Money reserve_paid = 0.0;  // Σ ô(d_j) over winners
  CostParams cost;
  Money total_cost = 0.0;
  Money seller_utility = 0.0;
  std::optional<double> ratio_mkp;
  std::optional<double> ratio_mkp_rp;
  std::optional<double> mechanism_ms;
  std::optional<double> oracle_ms;
};

MetricsRecord compute_metrics(const Ask& ask, std::span<const Bid> bids,
                              const PricedOutcome& priced, const OracleWelfare& oracle,
                              const CostParams& cost, std::span<const double> relativity);

/// One CSV row: a setting aggregated (mean) over replications.
struct GridRow {
  std::size_t setting_id = 0;
  std::vector<double> supply_pcts;
  double rp_level = 0.0;
  MetricsRecord mean;
  std::size_t replications = 0;
};

struct GridOptions {
  std::size_t jobs = 1;
  /// Supply settings before this index are skipped (resume).
  std::size_t first_supply_setting = 0;
  std::function<void(const GridRow&)> on_row;
  std::function<void(std::size_t done, std::size_t total)> on_progress;
};

std::size_t settings_per_supply(const ScenarioSpec& spec);
std::size_t total_settings(const ScenarioSpec& spec);

/// Runs supply settings × RP levels × cost parameters, each over all
/// replications, and emits rows in setting_id order. Output is a function
/// of the spec alone; `jobs` only changes wall time.
std::vector<GridRow> run_grid(const ScenarioSpec& spec, const GridOptions& options = {});

}  // namespace grp
