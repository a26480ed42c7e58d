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

#include "grp/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace grp {

namespace {

void validate_instance(const Ask& ask, std::span<const Bid> bids) {
  validate(ask);
  for (const Bid& b : bids) validate(b, ask.types());
}

// Bids that can appear in a canonical optimal set, sorted by bidder id.
std::vector<std::size_t> candidates(const Ask& ask, std::span<const Bid> bids) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (bids[j].valuation > 0.0 && fits(bids[j].bundle, ask.supplies)) out.push_back(j);
  }
  std::sort(out.begin(), out.end(),
            [&](std::size_t a, std::size_t b) { return bids[a].id < bids[b].id; });
  return out;
}

std::uint64_t grid_cells(const Ask& ask) {
  constexpr std::uint64_t kCap = std::numeric_limits<std::uint64_t>::max() / 4;
  std::uint64_t cells = 1;
  for (std::int64_t s : ask.supplies) {
    const auto dim = static_cast<std::uint64_t>(s) + 1;
    if (cells > kCap / dim) return kCap;
    cells *= dim;
  }
  return cells;
}

Money welfare_of(std::span<const Bid> bids, const std::vector<std::size_t>& winners) {
  Money w = 0.0;
  for (std::size_t j : winners) w += bids[j].valuation;
  return w;
}

void sort_by_id(std::span<const Bid> bids, std::vector<std::size_t>& v) {
  std::sort(v.begin(), v.end(),
            [&](std::size_t a, std::size_t b) { return bids[a].id < bids[b].id; });
}

struct Enumerator {
  std::span<const Bid> bids;
  const std::vector<std::size_t>& items;
  Bundle remaining;
  std::vector<std::size_t> current;
  Money current_value = 0.0;
  std::vector<std::size_t> best;
  Money best_value = 0.0;

  // Include-first DFS with strict improvements keeps the lexicographically
  // smallest optimum.
  void run(std::size_t pos) {
    if (pos == items.size()) {
      if (current_value > best_value) {
        best_value = current_value;
        best = current;
      }
      return;
    }
    const Bid& b = bids[items[pos]];
    if (fits(b.bundle, remaining)) {
      for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] -= b.bundle[i];
      current.push_back(items[pos]);
      const Money saved = current_value;
      current_value += b.valuation;
      run(pos + 1);
      current_value = saved;
      current.pop_back();
      for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] += b.bundle[i];
    }
    run(pos + 1);
  }
};

}  // namespace

const char* to_string(OracleMethod m) {
  return m == OracleMethod::kDp ? "dp" : "enumeration";
}

std::uint64_t dp_cells(const Ask& ask, std::span<const Bid> bids) {
  const std::uint64_t grid = grid_cells(ask);
  const std::uint64_t rows = candidates(ask, bids).size() + 1;
  if (grid > std::numeric_limits<std::uint64_t>::max() / rows) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return grid * rows;
}

std::vector<std::size_t> rpc_feasible(const Ask& ask, std::span<const Bid> bids) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (satisfies_rpc(bids[j], ask)) out.push_back(j);
  }
  return out;
}

OptimalResult mkp_optimal(const Ask& ask, std::span<const Bid> bids,
                          std::uint64_t cell_budget) {
  validate_instance(ask, bids);
  const std::uint64_t cells = dp_cells(ask, bids);
  if (cells > cell_budget) {
    throw CapacityError("DP table needs " + std::to_string(cells) + " cells, budget is " +
                        std::to_string(cell_budget) +
                        "; use enumeration for small bid lists");
  }

  const std::vector<std::size_t> items = candidates(ask, bids);
  const std::size_t k = ask.types();
  const std::size_t m = items.size();
  const auto grid = static_cast<std::size_t>(grid_cells(ask));

  std::vector<std::size_t> stride(k);
  for (std::size_t i = 0, s = 1; i < k; ++i) {
    stride[i] = s;
    s *= static_cast<std::size_t>(ask.supplies[i]) + 1;
  }

  const std::size_t words = (grid + 63) / 64;
  std::vector<std::uint64_t> take(m * words, 0);
  std::vector<Money> best(grid, 0.0);
  std::vector<std::int64_t> coord(k);

  // best[c] holds the optimum over items[j..m) with capacity c; processed
  // from the last item back so reconstruction can run forward in id order.
  for (std::size_t jj = m; jj-- > 0;) {
    const Bid& b = bids[items[jj]];
    std::size_t offset = 0;
    for (std::size_t i = 0; i < k; ++i) offset += static_cast<std::size_t>(b.bundle[i]) * stride[i];
    std::uint64_t* bits = take.data() + jj * words;

    for (std::size_t i = 0; i < k; ++i) coord[i] = ask.supplies[i];
    for (std::size_t idx = grid; idx-- > 0;) {
      bool ok = true;
      for (std::size_t i = 0; i < k; ++i) {
        if (coord[i] < b.bundle[i]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        const Money with = best[idx - offset] + b.valuation;
        if (with >= best[idx]) {
          best[idx] = with;
          bits[idx / 64] |= std::uint64_t{1} << (idx % 64);
        }
      }
      for (std::size_t i = 0; i < k; ++i) {
        if (coord[i] > 0) {
          --coord[i];
          break;
        }
        coord[i] = ask.supplies[i];
      }
    }
  }

  OptimalResult out;
  out.method = OracleMethod::kDp;
  std::size_t idx = grid - 1;
  for (std::size_t jj = 0; jj < m; ++jj) {
    const std::uint64_t* bits = take.data() + jj * words;
    if ((bits[idx / 64] >> (idx % 64)) & 1U) {
      const Bid& b = bids[items[jj]];
      out.winners.push_back(items[jj]);
      for (std::size_t i = 0; i < k; ++i) idx -= static_cast<std::size_t>(b.bundle[i]) * stride[i];
    }
  }
  out.welfare = welfare_of(bids, out.winners);
  return out;
}

OptimalResult mkp_rp_optimal(const Ask& ask, std::span<const Bid> bids,
                             std::uint64_t cell_budget) {
  validate_instance(ask, bids);
  const std::vector<std::size_t> keep = rpc_feasible(ask, bids);
  std::vector<Bid> filtered;
  filtered.reserve(keep.size());
  for (std::size_t j : keep) filtered.push_back(bids[j]);

  OptimalResult r = mkp_optimal(ask, filtered, cell_budget);
  for (std::size_t& w : r.winners) w = keep[w];
  sort_by_id(bids, r.winners);
  return r;
}

OptimalResult enumerate_optimal(const Ask& ask, std::span<const Bid> bids) {
  validate_instance(ask, bids);
  if (bids.size() > kMaxEnumerationBids) {
    throw CapacityError("enumeration supports at most " + std::to_string(kMaxEnumerationBids) +
                        " bids, got " + std::to_string(bids.size()));
  }
  std::vector<std::size_t> items;
  for (std::size_t j = 0; j < bids.size(); ++j) {
    if (bids[j].valuation > 0.0) items.push_back(j);
  }
  sort_by_id(bids, items);

  Enumerator e{bids, items, ask.supplies, {}, 0.0, {}, 0.0};
  e.run(0);

  OptimalResult out;
  out.method = OracleMethod::kEnumeration;
  out.winners = std::move(e.best);
  out.welfare = welfare_of(bids, out.winners);
  return out;
}

}  // namespace grp
