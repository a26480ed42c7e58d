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

#include "grp/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace grp {

namespace {

std::size_t index_of(std::span<const Bid> bids, const BidderId& id) {
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (bids[j].id == id) return j;
  }
  throw PreconditionError("unknown bidder '" + id + "'");
}

bool wins(const PricedOutcome& o, std::size_t j) { return o.outcome.is_winner(j); }

std::vector<Bid> with_declared(std::span<const Bid> bids, std::size_t j, Bundle bundle,
                               Money valuation) {
  std::vector<Bid> out(bids.begin(), bids.end());
  out[j].bundle = std::move(bundle);
  out[j].valuation = valuation;
  return out;
}

std::string describe(const Deviation& d) {
  std::ostringstream os;
  os << d.target << " declares <";
  for (std::size_t i = 0; i < d.declared_bundle.size(); ++i) {
    os << (i ? "," : "") << d.declared_bundle[i];
  }
  os << "> at " << d.declared_valuation << " (" << to_string(d.kind) << ")";
  return os.str();
}

DeviationReport score(const Ask& ask, std::span<const Bid> bids, const MechanismConfig& config,
                      std::size_t target, Money truthful_utility, const Deviation& dev,
                      const Mechanism& mechanism) {
  const Bid& truth = bids[target];
  validate(Bid{truth.id, dev.declared_bundle, dev.declared_valuation}, ask.types());
  const std::vector<Bid> declared =
      with_declared(bids, target, dev.declared_bundle, dev.declared_valuation);
  const PricedOutcome o = mechanism(ask, declared, config);

  DeviationReport r;
  r.deviation = dev;
  r.truthful_utility = truthful_utility;
  r.deviated_wins = wins(o, target);
  r.deviated_payment = o.outcome.payments[target];
  r.deviated_utility =
      single_minded_utility(truth, dev.declared_bundle, r.deviated_wins, r.deviated_payment);
  r.profitable = r.deviated_utility > r.truthful_utility + kEpsilon;
  return r;
}

Money truthful_utility_of(std::span<const Bid> bids, const PricedOutcome& o, std::size_t j) {
  return single_minded_utility(bids[j], bids[j].bundle, wins(o, j), o.outcome.payments[j]);
}

std::vector<Bundle> bundle_steps(const Bundle& d, const Bundle& supplies) {
  std::vector<Bundle> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] + 1 <= supplies[i]) {
      Bundle up = d;
      ++up[i];
      out.push_back(std::move(up));
    }
    if (d[i] >= 1) {
      Bundle down = d;
      --down[i];
      if (std::any_of(down.begin(), down.end(), [](std::int64_t x) { return x > 0; })) {
        out.push_back(std::move(down));
      }
    }
  }
  return out;
}

}  // namespace

Mechanism greedy_rp() {
  return [](const Ask& a, std::span<const Bid> b, const MechanismConfig& c) {
    return run_auction(a, b, c);
  };
}

const char* to_string(DeviationKind k) {
  switch (k) {
    case DeviationKind::kTruthful:
      return "truthful";
    case DeviationKind::kValueUp:
      return "value_up";
    case DeviationKind::kValueDown:
      return "value_down";
    case DeviationKind::kBundleSuperset:
      return "bundle_superset";
    case DeviationKind::kBundleSubset:
      return "bundle_subset";
    case DeviationKind::kJoint:
      return "joint";
  }
  return "?";
}

DeviationKind classify(const Bid& truth, const Bundle& bundle, Money valuation) {
  if (bundle == truth.bundle) {
    if (valuation == truth.valuation) return DeviationKind::kTruthful;
    return valuation > truth.valuation ? DeviationKind::kValueUp : DeviationKind::kValueDown;
  }
  if (valuation != truth.valuation || bundle.size() != truth.bundle.size()) {
    return DeviationKind::kJoint;
  }
  if (bundle_subset(truth.bundle, bundle)) return DeviationKind::kBundleSuperset;
  if (bundle_subset(bundle, truth.bundle)) return DeviationKind::kBundleSubset;
  return DeviationKind::kJoint;
}

Deviation make_deviation(const Bid& truth, Bundle bundle, Money valuation) {
  const DeviationKind kind = classify(truth, bundle, valuation);
  return Deviation{truth.id, std::move(bundle), valuation, kind};
}

Money single_minded_utility(const Bid& truth, const Bundle& granted, bool won, Money payment) {
  if (!won || !bundle_subset(truth.bundle, granted)) return 0.0;
  return truth.valuation - payment;
}

DeviationReport evaluate_deviation(const Ask& ask, std::span<const Bid> bids,
                                   const MechanismConfig& config, const Deviation& deviation,
                                   const Mechanism& mechanism) {
  const std::size_t target = index_of(bids, deviation.target);
  const PricedOutcome truthful = mechanism(ask, bids, config);
  return score(ask, bids, config, target, truthful_utility_of(bids, truthful, target), deviation,
               mechanism);
}

SweepSpec SweepSpec::standard() {
  SweepSpec s;
  s.value_multipliers = {0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.5, 2.0, 4.0};
  s.boundary_probes = true;
  s.bundle_steps = true;
  s.joint_multipliers = {0.5, 2.0};
  return s;
}

std::optional<Money> critical_value(const Ask& ask, std::span<const Bid> bids,
                                    const MechanismConfig& config, std::size_t target,
                                    const Mechanism& mechanism) {
  const Bid& b = bids[target];
  if (!fits(b.bundle, ask.supplies)) return std::nullopt;

  double top = 0.0;
  for (const Bid& other : bids) top = std::max(top, bid_density(other, config));
  const double weight_q = std::pow(bundle_weight(b.bundle, config), config.density_exponent);
  // Dense enough to be examined first.
  const Money high = (2.0 * top + 1.0) * weight_q + bundle_reserve(b.bundle, ask) + 1.0;

  const std::vector<Bid> declared = with_declared(bids, target, b.bundle, high);
  const PricedOutcome o = mechanism(ask, declared, config);
  if (!wins(o, target)) return std::nullopt;
  return o.outcome.payments[target];
}

std::vector<DeviationReport> sweep_deviations(const Ask& ask, std::span<const Bid> bids,
                                              const MechanismConfig& config,
                                              const BidderId& target, const SweepSpec& spec,
                                              const Mechanism& mechanism) {
  const std::size_t t = index_of(bids, target);
  const Bid& truth = bids[t];

  std::vector<Deviation> grid;
  for (const Deviation& d : spec.explicit_deviations) {
    if (d.target == target) grid.push_back(d);
  }
  for (double m : spec.value_multipliers) {
    grid.push_back(make_deviation(truth, truth.bundle, truth.valuation * m));
  }
  if (spec.boundary_probes) {
    if (const auto crit = critical_value(ask, bids, config, t, mechanism)) {
      grid.push_back(make_deviation(truth, truth.bundle, *crit + kCriticalDelta));
      if (*crit - kCriticalDelta >= 0.0) {
        grid.push_back(make_deviation(truth, truth.bundle, *crit - kCriticalDelta));
      }
    }
  }
  const std::vector<Bundle> steps = bundle_steps(truth.bundle, ask.supplies);
  if (spec.bundle_steps) {
    for (const Bundle& d : steps) grid.push_back(make_deviation(truth, d, truth.valuation));
  }
  for (const Bundle& d : steps) {
    for (double m : spec.joint_multipliers) {
      grid.push_back(make_deviation(truth, d, truth.valuation * m));
    }
  }
  if (spec.random_samples > 0) {
    std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ULL * (t + 1)));
    std::uniform_real_distribution<double> mult(0.0, 4.0);
    for (std::size_t s = 0; s < spec.random_samples; ++s) {
      Bundle d(ask.types(), 0);
      while (std::all_of(d.begin(), d.end(), [](std::int64_t x) { return x == 0; })) {
        for (std::size_t i = 0; i < d.size(); ++i) {
          std::uniform_int_distribution<std::int64_t> units(0, std::max<std::int64_t>(ask.supplies[i], 1));
          d[i] = units(rng);
        }
      }
      grid.push_back(make_deviation(truth, std::move(d), truth.valuation * mult(rng)));
    }
  }

  std::vector<DeviationReport> out;
  if (grid.empty()) return out;
  const PricedOutcome truthful = mechanism(ask, bids, config);
  const Money base = truthful_utility_of(bids, truthful, t);
  out.reserve(grid.size());
  for (const Deviation& d : grid) out.push_back(score(ask, bids, config, t, base, d, mechanism));
  return out;
}

void CheckResult::fail(std::string what, std::optional<Deviation> dev) {
  if (passed) {
    detail = std::move(what);
    counterexample = std::move(dev);
  }
  passed = false;
}

CheckResult check_monotone_deviation(const Ask& ask, std::span<const Bid> bids,
                                     const MechanismConfig& config, const Deviation& deviation) {
  const std::size_t t = index_of(bids, deviation.target);
  const Bid& truth = bids[t];
  validate(Bid{truth.id, deviation.declared_bundle, deviation.declared_valuation}, ask.types());

  const auto base = grp_allocate(ask, bids, config).winners;
  const bool won = std::find(base.begin(), base.end(), t) != base.end();
  const bool smaller = bundle_subset(deviation.declared_bundle, truth.bundle) &&
                       deviation.declared_valuation >= truth.valuation;
  const bool larger = bundle_subset(truth.bundle, deviation.declared_bundle) &&
                      deviation.declared_valuation <= truth.valuation;
  if ((won && !smaller) || (!won && !larger)) {
    throw ValidationError("not a monotonicity probe: " + describe(deviation));
  }

  const std::vector<Bid> declared =
      with_declared(bids, t, deviation.declared_bundle, deviation.declared_valuation);
  const auto w = grp_allocate(ask, declared, config).winners;
  const bool now = std::find(w.begin(), w.end(), t) != w.end();

  CheckResult r;
  r.checks = 1;
  if (now != won) {
    r.fail(std::string(won ? "winner lost" : "loser won") + " after " + describe(deviation),
           deviation);
  }
  return r;
}

CheckResult check_monotonicity(const Ask& ask, std::span<const Bid> bids,
                               const MechanismConfig& config, std::size_t samples,
                               std::uint64_t seed) {
  CheckResult r;
  if (bids.empty()) return r;
  const auto base = grp_allocate(ask, bids, config).winners;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, bids.size() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t t = pick(rng);
    const Bid& truth = bids[t];
    const bool won = std::find(base.begin(), base.end(), t) != base.end();
    Bundle d = truth.bundle;
    Money v;
    if (won) {
      v = truth.valuation * (1.0 + unit(rng));
      for (std::size_t i = 0; i < d.size(); ++i) {
        std::uniform_int_distribution<std::int64_t> cut(0, d[i]);
        const std::int64_t c = cut(rng);
        d[i] -= c;
        if (std::all_of(d.begin(), d.end(), [](std::int64_t x) { return x == 0; })) d[i] += c;
      }
    } else {
      v = truth.valuation * unit(rng);
      for (std::size_t i = 0; i < d.size(); ++i) {
        std::uniform_int_distribution<std::int64_t> add(0, 2);
        d[i] += add(rng);
      }
    }
    const CheckResult one =
        check_monotone_deviation(ask, bids, config, make_deviation(truth, std::move(d), v));
    r.checks += one.checks;
    if (!one.passed) r.fail(one.detail, one.counterexample);
  }
  return r;
}

CheckResult check_critical_value(const Ask& ask, std::span<const Bid> bids,
                                 const MechanismConfig& config, const Mechanism& mechanism,
                                 double delta) {
  CheckResult r;
  const PricedOutcome base = mechanism(ask, bids, config);
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const Money p = base.outcome.payments[j];
    ++r.checks;
    if (!wins(base, j)) {
      if (p != 0.0) r.fail("loser '" + bids[j].id + "' pays " + std::to_string(p));
      continue;
    }
    const Deviation above = make_deviation(bids[j], bids[j].bundle, p + delta);
    if (!wins(mechanism(ask, with_declared(bids, j, bids[j].bundle, p + delta), config), j)) {
      r.fail("winner loses just above its payment: " + describe(above), above);
    }
    if (p - delta >= 0.0) {
      ++r.checks;
      const Deviation below = make_deviation(bids[j], bids[j].bundle, p - delta);
      if (wins(mechanism(ask, with_declared(bids, j, bids[j].bundle, p - delta), config), j)) {
        r.fail("winner still wins just below its payment: " + describe(below), below);
      }
    }
  }
  return r;
}

CheckResult check_outcome(const Ask& ask, std::span<const Bid> bids,
                          const MechanismConfig& config, const Mechanism& mechanism) {
  CheckResult r;
  const PricedOutcome o = mechanism(ask, bids, config);
  r.checks = 1;
  for (const std::string& v : outcome_violations(ask, bids, o.outcome)) r.fail(v);
  return r;
}

TruthfulnessResult check_truthfulness(const Ask& ask, std::span<const Bid> bids,
                                      const MechanismConfig& config, const SweepSpec& spec,
                                      const Mechanism& mechanism) {
  TruthfulnessResult out;
  for (const Bid& b : bids) {
    std::vector<DeviationReport> reps = sweep_deviations(ask, bids, config, b.id, spec, mechanism);
    for (DeviationReport& rep : reps) {
      ++out.check.checks;
      if (rep.profitable) {
        std::ostringstream os;
        os << "profitable deviation: " << describe(rep.deviation) << " yields "
           << rep.deviated_utility << " > truthful " << rep.truthful_utility;
        out.check.fail(os.str(), rep.deviation);
      }
      out.reports.push_back(std::move(rep));
    }
  }
  return out;
}

}  // namespace grp
