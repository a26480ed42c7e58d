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
#include <span>
#include <string>
#include <vector>

#include "grp/market.hpp"
#include "grp/mechanism.hpp"

namespace grp {

/// Any allocation+pricing rule with run_auction's signature. The checks
/// below default to Greedy-RP but accept a replacement so that faulty
/// mechanisms can be shown to fail them.
using Mechanism =
    std::function<PricedOutcome(const Ask&, std::span<const Bid>, const MechanismConfig&)>;

Mechanism greedy_rp();

/// Probe offset, in money units, for critical-value boundary checks.
inline constexpr double kCriticalDelta = 1e-6;

enum class DeviationKind {
  kTruthful,
  kValueUp,
  kValueDown,
  kBundleSuperset,
  kBundleSubset,
  kJoint
};

const char* to_string(DeviationKind k);

/// Classifies a declared type relative to the true one.
DeviationKind classify(const Bid& truth, const Bundle& bundle, Money valuation);

struct Deviation {
  BidderId target;
  Bundle declared_bundle;
  Money declared_valuation = 0.0;
  DeviationKind kind = DeviationKind::kTruthful;
};

Deviation make_deviation(const Bid& truth, Bundle bundle, Money valuation);

struct DeviationReport {
  Deviation deviation;
  Money truthful_utility = 0.0;
  Money deviated_utility = 0.0;
  bool profitable = false;
  bool deviated_wins = false;
  Money deviated_payment = 0.0;
};

/// Single-minded utility: v_true − p when the bid wins a bundle that covers
/// the true bundle, 0 otherwise.
Money single_minded_utility(const Bid& truth, const Bundle& granted, bool won, Money payment);

/// Replace the target's bid by the deviation, run the mechanism and score
/// the result against the target's true type.
DeviationReport evaluate_deviation(const Ask& ask, std::span<const Bid> bids,
                                   const MechanismConfig& config, const Deviation& deviation,
                                   const Mechanism& mechanism = greedy_rp());

/// Deviation grid around a truthful report.
struct SweepSpec {
  std::vector<Deviation> explicit_deviations;
  std::vector<double> value_multipliers;
  bool boundary_probes = false;
  bool bundle_steps = false;
  std::vector<double> joint_multipliers;
  std::size_t random_samples = 0;
  std::uint64_t seed = 0;

  /// Multipliers {0.25, 0.5, 0.75, 0.9, 1, 1.1, 1.5, 2, 4}, critical
  /// boundary probes, ±1 unit per type, and joint bundle/value moves.
  static SweepSpec standard();
};

/// Reports in grid order: explicit, multipliers, boundary probes, bundle
/// steps, joint moves, random samples.
std::vector<DeviationReport> sweep_deviations(const Ask& ask, std::span<const Bid> bids,
                                              const MechanismConfig& config,
                                              const BidderId& target, const SweepSpec& spec,
                                              const Mechanism& mechanism = greedy_rp());

/// The lowest valuation at which the bundle still wins, with all other bids
/// fixed, or nullopt when it cannot win at any valuation.
std::optional<Money> critical_value(const Ask& ask, std::span<const Bid> bids,
                                    const MechanismConfig& config, std::size_t target,
                                    const Mechanism& mechanism = greedy_rp());

struct CheckResult {
  bool passed = true;
  std::size_t checks = 0;
  std::optional<Deviation> counterexample;
  std::string detail;

  void fail(std::string what, std::optional<Deviation> dev = std::nullopt);
};

/// One monotonicity probe: a winner that asks for less (d' ⊆ d) and offers
/// more (v' ≥ v) must still win; a loser that asks for more and offers less
/// must still lose. Pairs that are neither are rejected with
/// ValidationError.
CheckResult check_monotone_deviation(const Ask& ask, std::span<const Bid> bids,
                                     const MechanismConfig& config,
                                     const Deviation& deviation);

/// `samples` random monotone probes drawn with `seed`.
CheckResult check_monotonicity(const Ask& ask, std::span<const Bid> bids,
                               const MechanismConfig& config, std::size_t samples,
                               std::uint64_t seed);

/// Every winner wins at p + δ and loses at p − δ (skipped when p − δ < 0);
/// every loser pays 0.
CheckResult check_critical_value(const Ask& ask, std::span<const Bid> bids,
                                 const MechanismConfig& config,
                                 const Mechanism& mechanism = greedy_rp(),
                                 double delta = kCriticalDelta);

/// Exactness, participation, individual rationality and ARC on one outcome.
CheckResult check_outcome(const Ask& ask, std::span<const Bid> bids,
                          const MechanismConfig& config,
                          const Mechanism& mechanism = greedy_rp());

struct TruthfulnessResult {
  CheckResult check;
  std::vector<DeviationReport> reports;
};

/// Sweeps every bidder; a deviation is a violation when its utility exceeds
/// the truthful utility by more than kEpsilon.
TruthfulnessResult check_truthfulness(const Ask& ask, std::span<const Bid> bids,
                                      const MechanismConfig& config, const SweepSpec& spec,
                                      const Mechanism& mechanism = greedy_rp());

}  // namespace grp
