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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace grp {

using Money = double;
using BidderId = std::string;
/// VM counts per instance type.
using Bundle = std::vector<std::int64_t>;

/// Equality tolerance for money and densities. Constraint checks (ARC, RPC)
/// compare raw values exactly.
inline constexpr double kEpsilon = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DegenerateBidError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// The seller's offer: supplied VM counts and per-unit reserve prices.
struct Ask {
  Bundle supplies;
  std::vector<Money> reserve_prices;

  std::size_t types() const { return supplies.size(); }
};

/// A single-minded bid: the bidder wants exactly `bundle` (or a superset)
/// and values it at `valuation`.
struct Bid {
  BidderId id;
  Bundle bundle;
  Money valuation = 0.0;
};

enum class TieBreak {
  kById,       // equal densities ordered by ascending bidder id
  kInputOrder  // equal densities ordered by position in the bid list
};

struct MechanismConfig {
  std::vector<double> relativity;
  double density_exponent = 1.0;
  TieBreak tie_break = TieBreak::kById;
};

/// Winners, payments and per-type sold amounts. `payments` is indexed like
/// the bid list the outcome was computed from.
struct AuctionOutcome {
  std::vector<std::size_t> winners;  // bid indices in the order granted
  std::vector<Money> payments;
  Bundle sold;

  bool is_winner(std::size_t bid_index) const;
};

// Validation. Each throws ValidationError (or DimensionError for length
// mismatches) with a message naming the offending field.
void validate(const Ask& ask);
void validate(const Bid& bid, std::size_t types);
void validate(const MechanismConfig& config, std::size_t types);
void validate_market(const Ask& ask, std::span<const Bid> bids,
                     const MechanismConfig& config);

/// f_i = o_i / o_1. Throws ValidationError when any reserve price is zero.
std::vector<double> default_relativity(const Ask& ask);

/// d̂(d) = Σ r_i f_i
double bundle_weight(const Bundle& bundle, std::span<const double> relativity);
inline double bundle_weight(const Bundle& bundle, const MechanismConfig& c) {
  return bundle_weight(bundle, c.relativity);
}

/// e(b) = v / d̂(d)^q. Throws DegenerateBidError for a zero-weight bundle.
double bid_density(const Bid& bid, const MechanismConfig& config);

/// ô(d) = Σ r_i o_i, the smallest lawful payment for the bundle.
Money bundle_reserve(const Bundle& bundle, const Ask& ask);

/// e_res(b) = ô(d) / d̂(d)^q
double reserve_density(const Bid& bid, const Ask& ask,
                       const MechanismConfig& config);

/// Reserve price constraint: v ≥ ô(d).
bool satisfies_rpc(const Bid& bid, const Ask& ask);

/// Element-wise a ≤ b.
bool bundle_subset(const Bundle& a, const Bundle& b);

/// True if the bundle fits inside `capacity` in every type.
bool fits(const Bundle& bundle, const Bundle& capacity);

/// Outcome invariants: losers pay 0, ô(d_j) ≤ p_j ≤ v_j for winners (with
/// kEpsilon slack on the price bounds), sold within supply and equal to the
/// sum of winning bundles. Returns one message per violation.
std::vector<std::string> outcome_violations(const Ask& ask,
                                            std::span<const Bid> bids,
                                            const AuctionOutcome& outcome);

}  // namespace grp
