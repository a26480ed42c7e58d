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

#include <optional>
#include <span>
#include <vector>

#include "grp/market.hpp"

namespace grp {

enum class Decision { kGranted, kDeniedArc, kDeniedRpc };

const char* to_string(Decision d);

/// Diagnostic record of one greedy pass. `decisions[i]` belongs to bid
/// `sorted_order[i]`; `remaining` holds the capacity left after each decision.
struct AllocationTrace {
  std::vector<std::size_t> sorted_order;
  std::vector<Decision> decisions;
  std::vector<Bundle> remaining;
};

struct Allocation {
  std::vector<std::size_t> winners;  // bid indices in the order granted
  AllocationTrace trace;
};

enum class PriceBasis { kCompetitor, kReserve };

const char* to_string(PriceBasis b);

/// Allocation plus critical-value payments. All per-bid vectors are indexed
/// like the input bid list; losers carry zeros and no price basis.
struct PricedOutcome {
  AuctionOutcome outcome;
  std::vector<double> densities;
  std::vector<double> competitor_densities;
  std::vector<double> critical_densities;
  std::vector<std::optional<PriceBasis>> price_basis;
  Bundle remaining;
  Money revenue = 0.0;
  Money allocated_value = 0.0;
};

/// Bid indices sorted by non-increasing density under the configured tie
/// break. Inputs must already be validated.
std::vector<std::size_t> density_order(std::span<const Bid> bids,
                                       std::span<const double> densities,
                                       TieBreak tie_break);

/// Greedy allocation: walk bids in density order and grant each one whose
/// bundle fits the remaining supply and whose valuation covers its bundle
/// reserve. Denied bids consume nothing and the walk never stops early.
Allocation grp_allocate(const Ask& ask, std::span<const Bid> bids,
                        const MechanismConfig& config);

/// Critical-value pricing for the winners of grp_allocate. For each winner
/// the allocation is re-run without it; the densest bid that becomes a new
/// winner sets the competitor density, and the payment is
/// max(competitor, reserve density) scaled back by d̂(d)^q.
///
/// Throws PreconditionError if `winners` is not the set grp_allocate returns.
PricedOutcome grp_price(const Ask& ask, std::span<const Bid> bids,
                        const MechanismConfig& config,
                        std::span<const std::size_t> winners);

/// grp_allocate followed by grp_price.
PricedOutcome run_auction(const Ask& ask, std::span<const Bid> bids,
                          const MechanismConfig& config);

}  // namespace grp
