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

#include "grp/market.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace grp {

namespace {

void require_length(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    std::ostringstream os;
    os << what << ": expected " << want << " entries, got " << got;
    throw DimensionError(os.str());
  }
}

bool finite_non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

bool AuctionOutcome::is_winner(std::size_t bid_index) const {
  return std::find(winners.begin(), winners.end(), bid_index) != winners.end();
}

void validate(const Ask& ask) {
  if (ask.supplies.empty()) throw ValidationError("ask.supplies: need at least one VM type");
  require_length(ask.reserve_prices.size(), ask.supplies.size(), "ask.reserve_prices");
  for (std::size_t i = 0; i < ask.types(); ++i) {
    if (ask.supplies[i] < 0) {
      throw ValidationError("ask.supplies[" + std::to_string(i) + "]: negative supply");
    }
    if (!finite_non_negative(ask.reserve_prices[i])) {
      throw ValidationError("ask.reserve_prices[" + std::to_string(i) +
                            "]: must be finite and >= 0");
    }
  }
}

void validate(const Bid& bid, std::size_t types) {
  const std::string where = "bid '" + bid.id + "'";
  require_length(bid.bundle.size(), types, (where + " bundle").c_str());
  bool any = false;
  for (std::size_t i = 0; i < types; ++i) {
    if (bid.bundle[i] < 0) {
      throw ValidationError(where + " bundle[" + std::to_string(i) + "]: negative amount");
    }
    any = any || bid.bundle[i] > 0;
  }
  if (!any) throw ValidationError(where + " bundle: all-zero bundle");
  if (!finite_non_negative(bid.valuation)) {
    throw ValidationError(where + " valuation: must be finite and >= 0");
  }
}

void validate(const MechanismConfig& config, std::size_t types) {
  require_length(config.relativity.size(), types, "config.relativity");
  for (std::size_t i = 0; i < types; ++i) {
    const double f = config.relativity[i];
    if (!std::isfinite(f) || f <= 0.0) {
      throw ValidationError("config.relativity[" + std::to_string(i) + "]: must be > 0");
    }
    if (i > 0 && f < config.relativity[i - 1]) {
      throw ValidationError("config.relativity: must be non-decreasing (f_1 <= ... <= f_k)");
    }
  }
  if (!std::isfinite(config.density_exponent) || config.density_exponent <= 0.0) {
    throw ValidationError("config.q: must be > 0");
  }
}

void validate_market(const Ask& ask, std::span<const Bid> bids,
                     const MechanismConfig& config) {
  validate(ask);
  validate(config, ask.types());
  std::set<BidderId> seen;
  for (const Bid& b : bids) {
    validate(b, ask.types());
    if (!seen.insert(b.id).second) throw ValidationError("duplicate bidder id '" + b.id + "'");
  }
}

std::vector<double> default_relativity(const Ask& ask) {
  validate(ask);
  std::vector<double> f(ask.types());
  for (std::size_t i = 0; i < ask.types(); ++i) {
    if (ask.reserve_prices[i] <= 0.0) {
      throw ValidationError(
          "config.relativity: required when any reserve price is zero");
    }
    f[i] = ask.reserve_prices[i] / ask.reserve_prices[0];
  }
  return f;
}

double bundle_weight(const Bundle& bundle, std::span<const double> relativity) {
  require_length(bundle.size(), relativity.size(), "bundle");
  double w = 0.0;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    w += static_cast<double>(bundle[i]) * relativity[i];
  }
  return w;
}

double bid_density(const Bid& bid, const MechanismConfig& config) {
  const double w = bundle_weight(bid.bundle, config);
  if (!(w > 0.0)) throw DegenerateBidError("bid '" + bid.id + "': zero-weight bundle");
  return bid.valuation / std::pow(w, config.density_exponent);
}

Money bundle_reserve(const Bundle& bundle, const Ask& ask) {
  require_length(bundle.size(), ask.reserve_prices.size(), "bundle");
  Money r = 0.0;
  for (std::size_t i = 0; i < bundle.size(); ++i) {
    r += static_cast<double>(bundle[i]) * ask.reserve_prices[i];
  }
  return r;
}

double reserve_density(const Bid& bid, const Ask& ask, const MechanismConfig& config) {
  const double w = bundle_weight(bid.bundle, config);
  if (!(w > 0.0)) throw DegenerateBidError("bid '" + bid.id + "': zero-weight bundle");
  return bundle_reserve(bid.bundle, ask) / std::pow(w, config.density_exponent);
}

bool satisfies_rpc(const Bid& bid, const Ask& ask) {
  return bid.valuation >= bundle_reserve(bid.bundle, ask);
}

bool bundle_subset(const Bundle& a, const Bundle& b) {
  require_length(a.size(), b.size(), "bundle");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
  }
  return true;
}

bool fits(const Bundle& bundle, const Bundle& capacity) {
  return bundle_subset(bundle, capacity);
}

std::vector<std::string> outcome_violations(const Ask& ask, std::span<const Bid> bids,
                                            const AuctionOutcome& outcome) {
  std::vector<std::string> out;
  const std::size_t k = ask.types();
  if (outcome.payments.size() != bids.size()) {
    out.push_back("payments: expected " + std::to_string(bids.size()) + " entries");
    return out;
  }
  std::vector<bool> won(bids.size(), false);
  for (std::size_t w : outcome.winners) {
    if (w >= bids.size()) {
      out.push_back("winner index out of range");
      return out;
    }
    if (won[w]) out.push_back("bid '" + bids[w].id + "' listed twice as winner");
    won[w] = true;
  }

  Bundle total(k, 0);
  for (std::size_t j = 0; j < bids.size(); ++j) {
    const Bid& b = bids[j];
    const Money p = outcome.payments[j];
    if (!won[j]) {
      if (p != 0.0) out.push_back("loser '" + b.id + "' pays " + std::to_string(p));
      continue;
    }
    for (std::size_t i = 0; i < k; ++i) total[i] += b.bundle[i];
    const Money reserve = bundle_reserve(b.bundle, ask);
    if (p < reserve - kEpsilon) {
      out.push_back("winner '" + b.id + "' pays " + std::to_string(p) +
                    " below bundle reserve " + std::to_string(reserve));
    }
    if (p > b.valuation + kEpsilon) {
      out.push_back("winner '" + b.id + "' pays " + std::to_string(p) +
                    " above valuation " + std::to_string(b.valuation) + " (IR)");
    }
  }
  if (outcome.sold.size() != k) {
    out.push_back("sold: expected " + std::to_string(k) + " entries");
    return out;
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (outcome.sold[i] != total[i]) {
      out.push_back("sold[" + std::to_string(i) + "] differs from sum of winning bundles");
    }
    if (total[i] > ask.supplies[i]) {
      out.push_back("type " + std::to_string(i) + " allocated beyond supply (ARC)");
    }
  }
  return out;
}

}  // namespace grp
