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

#include "grp/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace grp {

namespace {

struct Prepared {
  std::vector<double> densities;
  std::vector<Money> reserves;
  std::vector<bool> rpc_ok;
  std::vector<std::size_t> order;
};

Prepared prepare(const Ask& ask, std::span<const Bid> bids, const MechanismConfig& config) {
  Prepared p;
  p.densities.reserve(bids.size());
  p.reserves.reserve(bids.size());
  p.rpc_ok.reserve(bids.size());
  for (const Bid& b : bids) {
    p.densities.push_back(bid_density(b, config));
    p.reserves.push_back(bundle_reserve(b.bundle, ask));
    p.rpc_ok.push_back(b.valuation >= p.reserves.back());
  }
  p.order = density_order(bids, p.densities, config.tie_break);
  return p;
}

// One greedy pass over `order`, ignoring bid `skip` (pass bids.size() to
// skip nothing). Returns granted indices in grant order.
std::vector<std::size_t> greedy_pass(const Ask& ask, std::span<const Bid> bids,
                                     const Prepared& p, std::size_t skip,
                                     AllocationTrace* trace) {
  Bundle remaining = ask.supplies;
  std::vector<std::size_t> winners;
  for (std::size_t j : p.order) {
    if (j == skip) continue;
    Decision d;
    if (!p.rpc_ok[j]) {
      d = Decision::kDeniedRpc;
    } else if (!fits(bids[j].bundle, remaining)) {
      d = Decision::kDeniedArc;
    } else {
      d = Decision::kGranted;
      for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] -= bids[j].bundle[i];
      winners.push_back(j);
    }
    if (trace != nullptr) {
      trace->sorted_order.push_back(j);
      trace->decisions.push_back(d);
      trace->remaining.push_back(remaining);
    }
  }
  return winners;
}

}  // namespace

const char* to_string(Decision d) {
  switch (d) {
    case Decision::kGranted:
      return "granted";
    case Decision::kDeniedArc:
      return "denied_arc";
    case Decision::kDeniedRpc:
      return "denied_rpc";
  }
  return "?";
}

const char* to_string(PriceBasis b) {
  return b == PriceBasis::kCompetitor ? "competitor" : "reserve";
}

std::vector<std::size_t> density_order(std::span<const Bid> bids,
                                       std::span<const double> densities,
                                       TieBreak tie_break) {
  std::vector<std::size_t> order(bids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (densities[a] != densities[b]) return densities[a] > densities[b];
    if (tie_break == TieBreak::kById && bids[a].id != bids[b].id) return bids[a].id < bids[b].id;
    return a < b;
  });
  return order;
}

Allocation grp_allocate(const Ask& ask, std::span<const Bid> bids,
                        const MechanismConfig& config) {
  validate_market(ask, bids, config);
  const Prepared p = prepare(ask, bids, config);
  Allocation out;
  out.winners = greedy_pass(ask, bids, p, bids.size(), &out.trace);
  return out;
}

PricedOutcome grp_price(const Ask& ask, std::span<const Bid> bids,
                        const MechanismConfig& config,
                        std::span<const std::size_t> winners) {
  validate_market(ask, bids, config);
  const Prepared p = prepare(ask, bids, config);
  const std::size_t n = bids.size();
  const std::size_t k = ask.types();
  const double q = config.density_exponent;

  const std::vector<std::size_t> fresh = greedy_pass(ask, bids, p, n, nullptr);
  std::vector<bool> in_w(n, false);
  {
    std::vector<std::size_t> a(winners.begin(), winners.end());
    std::vector<std::size_t> b = fresh;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw PreconditionError("winners do not match a fresh allocation");
    for (std::size_t j : fresh) in_w[j] = true;
  }

  PricedOutcome out;
  out.outcome.winners = fresh;
  out.outcome.payments.assign(n, 0.0);
  out.outcome.sold.assign(k, 0);
  out.densities = p.densities;
  out.competitor_densities.assign(n, 0.0);
  out.critical_densities.assign(n, 0.0);
  out.price_basis.assign(n, std::nullopt);

  for (std::size_t j : fresh) {
    // Bids that enter once j is withdrawn.
    const std::vector<std::size_t> counterfactual = greedy_pass(ask, bids, p, j, nullptr);
    double comp = 0.0;
    for (std::size_t h : counterfactual) {
      if (!in_w[h]) comp = std::max(comp, p.densities[h]);
    }
    const double weight_q = std::pow(bundle_weight(bids[j].bundle, config), q);
    const double res = p.reserves[j] / weight_q;

    out.competitor_densities[j] = comp;
    if (comp > res) {
      out.critical_densities[j] = comp;
      out.price_basis[j] = PriceBasis::kCompetitor;
      out.outcome.payments[j] = comp * weight_q;
    } else {
      out.critical_densities[j] = res;
      out.price_basis[j] = PriceBasis::kReserve;
      out.outcome.payments[j] = p.reserves[j];
    }

    for (std::size_t i = 0; i < k; ++i) out.outcome.sold[i] += bids[j].bundle[i];
    out.revenue += out.outcome.payments[j];
    out.allocated_value += bids[j].valuation;
  }

  out.remaining = ask.supplies;
  for (std::size_t i = 0; i < k; ++i) out.remaining[i] -= out.outcome.sold[i];
  return out;
}

PricedOutcome run_auction(const Ask& ask, std::span<const Bid> bids,
                          const MechanismConfig& config) {
  const Allocation a = grp_allocate(ask, bids, config);
  return grp_price(ask, bids, config, a.winners);
}

}  // namespace grp
