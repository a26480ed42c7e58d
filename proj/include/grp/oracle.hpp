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
#include <span>
#include <vector>

#include "grp/market.hpp"

namespace grp {

class CapacityError : public Error {
 public:
  using Error::Error;
};

enum class OracleMethod { kDp, kEnumeration };

const char* to_string(OracleMethod m);

/// Welfare-maximizing winner set under the supply constraint. Among equally
/// good sets the lexicographically smallest sorted id list is returned;
/// zero-valuation bids are never included.
struct OptimalResult {
  Money welfare = 0.0;
  std::vector<std::size_t> winners;  // bid indices, ascending by bidder id
  OracleMethod method = OracleMethod::kDp;
};

/// Largest DP table the oracle will build, in cells of
/// (candidate bids + 1) × Π(s_i + 1).
inline constexpr std::uint64_t kDefaultDpCellBudget = 100'000'000;

/// Enumeration refuses lists longer than this.
inline constexpr std::size_t kMaxEnumerationBids = 25;

/// Cells the DP would need for this instance (after dropping bids that
/// cannot contribute).
std::uint64_t dp_cells(const Ask& ask, std::span<const Bid> bids);

/// Exact multidimensional knapsack over the supply grid; ignores reserve
/// prices. Throws CapacityError when the table would exceed `cell_budget`.
OptimalResult mkp_optimal(const Ask& ask, std::span<const Bid> bids,
                          std::uint64_t cell_budget = kDefaultDpCellBudget);

/// mkp_optimal restricted to bids that satisfy the reserve price constraint.
/// Winner indices refer to the original bid list.
OptimalResult mkp_rp_optimal(const Ask& ask, std::span<const Bid> bids,
                             std::uint64_t cell_budget = kDefaultDpCellBudget);

/// Exhaustive subset search with capacity pruning. Ignores reserve prices.
/// Throws CapacityError for more than kMaxEnumerationBids bids.
OptimalResult enumerate_optimal(const Ask& ask, std::span<const Bid> bids);

/// Indices of bids satisfying the reserve price constraint.
std::vector<std::size_t> rpc_feasible(const Ask& ask, std::span<const Bid> bids);

}  // namespace grp
