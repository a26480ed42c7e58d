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

#include "grp/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace grp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void validate_dist(const TruncatedNormal& d, const char* name, double lower_bound) {
  const std::string n = name;
  if (!(d.sd > 0.0) || !std::isfinite(d.sd)) throw ValidationError(n + ".sd: must be > 0");
  if (!(d.min < d.max)) throw ValidationError(n + ": min must be below max");
  if (d.min < lower_bound) throw ValidationError(n + ".min: must be >= 0");
  if (d.mean < d.min || d.mean > d.max) throw ValidationError(n + ".mean: outside [min, max]");
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

// Per-replication results for one supply setting, indexed [rp][cost].
using ReplicationResult = std::vector<std::vector<MetricsRecord>>;

ReplicationResult run_replication(const ScenarioSpec& spec, const std::vector<double>& pcts,
                                  std::size_t replication, std::span<const double> f) {
  std::mt19937_64 rng = replication_stream(spec.seed, replication);
  const std::vector<Bid> bids = generate_bids(spec, rng);
  MechanismConfig config{std::vector<double>(f.begin(), f.end()), spec.q, TieBreak::kById};

  // MKP is independent of the reserve level.
  std::optional<Money> mkp;
  std::optional<double> mkp_ms;
  if (spec.run_oracles) {
    const Ask base = derive_ask(bids, pcts, 0.0, f);
    if (dp_cells(base, bids) <= spec.dp_cell_budget) {
      const auto t0 = std::chrono::steady_clock::now();
      mkp = mkp_optimal(base, bids, spec.dp_cell_budget).welfare;
      mkp_ms = elapsed_ms(t0);
    }
  }

  ReplicationResult out;
  out.reserve(spec.rp_levels.size());
  for (double rp : spec.rp_levels) {
    const Ask ask = derive_ask(bids, pcts, rp, f);
    const auto t0 = std::chrono::steady_clock::now();
    const PricedOutcome priced = run_auction(ask, bids, config);
    const double mech_ms = elapsed_ms(t0);

    OracleWelfare oracle;
    if (mkp) {
      oracle.mkp = mkp;
      oracle.mkp_rp = mkp_rp_optimal(ask, bids, spec.dp_cell_budget).welfare;
    }
    std::vector<MetricsRecord> per_cost;
    per_cost.reserve(spec.cost_params.size());
    for (const CostParams& c : spec.cost_params) {
      MetricsRecord m = compute_metrics(ask, bids, priced, oracle, c, f);
      if (spec.record_timings) {
        m.mechanism_ms = mech_ms;
        m.oracle_ms = mkp_ms;
      }
      per_cost.push_back(std::move(m));
    }
    out.push_back(std::move(per_cost));
  }
  return out;
}

void accumulate_optional(std::optional<double>& acc, const std::optional<double>& x,
                         bool& absent) {
  if (!x) {
    absent = true;
    return;
  }
  acc = acc.value_or(0.0) + *x;
}

MetricsRecord mean_of(const std::vector<const MetricsRecord*>& recs) {
  MetricsRecord m;
  if (recs.empty()) return m;
  const double n = static_cast<double>(recs.size());
  m.cost = recs.front()->cost;
  m.utilization.assign(recs.front()->utilization.size(), 0.0);
  bool no_mkp = false, no_mkp_rp = false, no_mech = false, no_oracle = false;
  for (const MetricsRecord* r : recs) {
    for (std::size_t i = 0; i < m.utilization.size(); ++i) m.utilization[i] += r->utilization[i];
    m.util_avg += r->util_avg;
    m.revenue += r->revenue;
    m.buyer_utility += r->buyer_utility;
    m.allocated_value += r->allocated_value;
    m.reserve_paid += r->reserve_paid;
    m.total_cost += r->total_cost;
    m.seller_utility += r->seller_utility;
    accumulate_optional(m.ratio_mkp, r->ratio_mkp, no_mkp);
    accumulate_optional(m.ratio_mkp_rp, r->ratio_mkp_rp, no_mkp_rp);
    accumulate_optional(m.mechanism_ms, r->mechanism_ms, no_mech);
    accumulate_optional(m.oracle_ms, r->oracle_ms, no_oracle);
  }
  for (double& u : m.utilization) u /= n;
  m.util_avg /= n;
  m.revenue /= n;
  m.buyer_utility /= n;
  m.allocated_value /= n;
  m.reserve_paid /= n;
  m.total_cost /= n;
  m.seller_utility /= n;
  auto finish = [n](std::optional<double>& x, bool absent) {
    if (absent) {
      x.reset();
    } else if (x) {
      *x /= n;
    }
  };
  finish(m.ratio_mkp, no_mkp);
  finish(m.ratio_mkp_rp, no_mkp_rp);
  finish(m.mechanism_ms, no_mech);
  finish(m.oracle_ms, no_oracle);
  return m;
}

}  // namespace

double TruncatedNormal::sample(std::mt19937_64& rng) const {
  std::normal_distribution<double> normal(mean, sd);
  for (;;) {
    const double x = normal(rng);
    if (x >= min && x <= max) return x;
  }
}

std::vector<CostParams> CostParams::standard() {
  constexpr Money kRun = 0.25 * 0.5;
  return {{kRun, 0.25 * kRun}, {kRun, 0.5 * kRun}, {kRun, 0.75 * kRun}, {kRun, kRun}};
}

void validate(const ScenarioSpec& spec) {
  if (spec.n_buyers == 0) throw ValidationError("n_buyers: must be >= 1");
  if (spec.k == 0) throw ValidationError("k: must be >= 1");
  validate_dist(spec.bundle_dist, "bundle_dist", 0.0);
  validate_dist(spec.valuation_dist, "valuation_dist", 0.0);
  if (spec.bundle_dist.max < 0.5) {
    throw ValidationError("bundle_dist.max: must allow at least one unit");
  }
  for (double p : spec.supply_pcts) {
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("supply_pcts: must be positive");
  }
  for (const auto& combo : spec.supply_combos) {
    if (combo.size() != spec.k) throw DimensionError("supply_combos: each entry needs k values");
    for (double p : combo) {
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw ValidationError("supply_combos: must be positive");
      }
    }
  }
  for (double rp : spec.rp_levels) {
    if (!(rp >= 0.0) || !std::isfinite(rp)) throw ValidationError("rp_levels: must be >= 0");
  }
  MechanismConfig config{scenario_relativity(spec), spec.q, TieBreak::kById};
  validate(config, spec.k);
  for (const CostParams& c : spec.cost_params) {
    if (!(c.idle >= 0.0) || !(c.idle <= c.run) || !std::isfinite(c.run)) {
      throw ValidationError("cost_params: need 0 <= idle <= run");
    }
  }
}

std::vector<double> scenario_relativity(const ScenarioSpec& spec) {
  if (!spec.relativity.empty()) return spec.relativity;
  static constexpr double kDefault[] = {1.0, 2.0, 4.0};
  if (spec.k > std::size(kDefault)) {
    throw ValidationError("relativity: required for more than 3 VM types");
  }
  return {kDefault, kDefault + spec.k};
}

std::vector<std::vector<double>> supply_settings(const ScenarioSpec& spec) {
  if (!spec.supply_combos.empty()) return spec.supply_combos;
  std::vector<std::vector<double>> out;
  if (spec.supply_pcts.empty() || spec.k == 0) return out;
  std::vector<std::size_t> idx(spec.k, 0);
  for (;;) {
    std::vector<double> combo(spec.k);
    for (std::size_t i = 0; i < spec.k; ++i) combo[i] = spec.supply_pcts[idx[i]];
    out.push_back(std::move(combo));
    std::size_t i = spec.k;
    while (i-- > 0) {
      if (++idx[i] < spec.supply_pcts.size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::mt19937_64 replication_stream(std::uint64_t seed, std::uint64_t replication) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= replication * 0xD1B54A32D192ED03ULL;
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

std::vector<Bid> generate_bids(const ScenarioSpec& spec, std::mt19937_64& rng) {
  const std::vector<double> f = scenario_relativity(spec);
  const std::size_t width = std::to_string(spec.n_buyers).size();
  std::vector<Bid> bids;
  bids.reserve(spec.n_buyers);
  for (std::size_t j = 0; j < spec.n_buyers; ++j) {
    Bid b;
    std::string num = std::to_string(j + 1);
    b.id = "b" + std::string(width - num.size(), '0') + num;
    b.bundle.assign(spec.k, 0);
    while (std::all_of(b.bundle.begin(), b.bundle.end(), [](std::int64_t x) { return x == 0; })) {
      for (std::size_t i = 0; i < spec.k; ++i) {
        b.bundle[i] = static_cast<std::int64_t>(std::round(spec.bundle_dist.sample(rng)));
      }
    }
    const double unit_value = spec.valuation_dist.sample(rng);
    b.valuation = unit_value * bundle_weight(b.bundle, f);
    bids.push_back(std::move(b));
  }
  return bids;
}

Ask derive_ask(std::span<const Bid> bids, std::span<const double> supply_pcts, double rp_level,
               std::span<const double> relativity) {
  if (bids.empty()) throw PreconditionError("derive_ask: needs at least one bid");
  const std::size_t k = supply_pcts.size();
  if (relativity.size() != k) throw DimensionError("derive_ask: relativity length");
  Ask ask;
  ask.supplies.assign(k, 0);
  ask.reserve_prices.assign(k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::int64_t demand = 0;
    for (const Bid& b : bids) {
      if (b.bundle.size() != k) throw DimensionError("derive_ask: bundle length");
      demand += b.bundle[i];
    }
    ask.supplies[i] = static_cast<std::int64_t>(
        std::floor(supply_pcts[i] * static_cast<double>(demand) / 100.0 + 0.5));
    ask.reserve_prices[i] = rp_level * relativity[i];
  }
  return ask;
}

MetricsRecord compute_metrics(const Ask& ask, std::span<const Bid> bids,
                              const PricedOutcome& priced, const OracleWelfare& oracle,
                              const CostParams& cost, std::span<const double> relativity) {
  const std::size_t k = ask.types();
  MetricsRecord m;
  m.cost = cost;
  m.utilization.assign(k, 0.0);
  Money running = 0.0;
  Money idle = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const auto sold = static_cast<double>(priced.outcome.sold[i]);
    const auto supply = static_cast<double>(ask.supplies[i]);
    m.utilization[i] = supply > 0.0 ? sold / supply : 0.0;
    m.util_avg += m.utilization[i];
    running += sold * relativity[i];
    idle += (supply - sold) * relativity[i];
  }
  m.util_avg /= static_cast<double>(k);

  for (std::size_t j : priced.outcome.winners) {
    m.revenue += priced.outcome.payments[j];
    m.allocated_value += bids[j].valuation;
    m.buyer_utility += bids[j].valuation - priced.outcome.payments[j];
    m.reserve_paid += bundle_reserve(bids[j].bundle, ask);
  }
  m.total_cost = cost.run * running + cost.idle * idle;
  m.seller_utility = m.revenue - m.total_cost;

  auto ratio = [&](const std::optional<Money>& opt) -> std::optional<double> {
    if (!opt) return std::nullopt;
    if (*opt <= 0.0) return 1.0;
    return m.allocated_value / *opt;
  };
  m.ratio_mkp = ratio(oracle.mkp);
  m.ratio_mkp_rp = ratio(oracle.mkp_rp);
  return m;
}

std::size_t settings_per_supply(const ScenarioSpec& spec) {
  return spec.rp_levels.size() * spec.cost_params.size();
}

std::size_t total_settings(const ScenarioSpec& spec) {
  return supply_settings(spec).size() * settings_per_supply(spec);
}

std::vector<GridRow> run_grid(const ScenarioSpec& spec, const GridOptions& options) {
  validate(spec);
  const std::vector<double> f = scenario_relativity(spec);
  const auto supplies = supply_settings(spec);
  const std::size_t per_supply = settings_per_supply(spec);
  const std::size_t jobs = std::max<std::size_t>(1, options.jobs);

  std::vector<GridRow> rows;
  for (std::size_t c = options.first_supply_setting; c < supplies.size(); ++c) {
    std::vector<ReplicationResult> reps(spec.replications);
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::exception_ptr failure;
    auto worker = [&] {
      try {
        for (std::size_t r = next++; r < spec.replications; r = next++) {
          reps[r] = run_replication(spec, supplies[c], r, f);
        }
      } catch (...) {
        next = spec.replications;
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    };
    if (jobs == 1 || spec.replications < 2) {
      worker();
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < std::min(jobs, spec.replications); ++t) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    if (spec.replications > 0) {
      for (std::size_t r = 0; r < spec.rp_levels.size(); ++r) {
        for (std::size_t h = 0; h < spec.cost_params.size(); ++h) {
          std::vector<const MetricsRecord*> recs;
          recs.reserve(reps.size());
          for (const ReplicationResult& rep : reps) recs.push_back(&rep[r][h]);
          GridRow row;
          row.setting_id = c * per_supply + r * spec.cost_params.size() + h;
          row.supply_pcts = supplies[c];
          row.rp_level = spec.rp_levels[r];
          row.mean = mean_of(recs);
          row.replications = spec.replications;
          if (options.on_row) options.on_row(row);
          rows.push_back(std::move(row));
        }
      }
    }
    if (options.on_progress) options.on_progress(c + 1, supplies.size());
  }
  return rows;
}

}  // namespace grp
