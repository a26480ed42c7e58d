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

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "grp/market.hpp"
#include "grp/mechanism.hpp"
#include "grp/oracle.hpp"
#include "grp/simulator.hpp"
#include "grp/strategy.hpp"

namespace grp {

inline constexpr int kSchemaVersion = 1;

/// Malformed or invalid input document. The message names the offending
/// field (or line/column for syntax errors).
class InputError : public Error {
 public:
  using Error::Error;
};

struct MarketDocument {
  Ask ask;
  std::vector<Bid> bids;
  MechanismConfig config;
};

/// Parses {"ask": {...}, "bids": [...], "config": {...}}. When
/// config.relativity is absent it defaults to o_i / o_1. Everything is
/// validated; failures throw InputError.
MarketDocument parse_market(const nlohmann::json& doc);
MarketDocument read_market(const std::filesystem::path& path);
nlohmann::json market_to_json(const MarketDocument& market);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Outcome document: per-bid results plus totals, with the market echoed so
/// the document can be re-validated on its own.
nlohmann::json outcome_to_json(const MarketDocument& market, const PricedOutcome& priced);

struct OutcomeDocument {
  MarketDocument market;
  AuctionOutcome outcome;
  Money revenue = 0.0;
  Money allocated_value = 0.0;
};

OutcomeDocument parse_outcome(const nlohmann::json& doc);

nlohmann::json optimal_to_json(std::span<const Bid> bids, const OptimalResult& r);

nlohmann::json deviation_to_json(const DeviationReport& r);

ScenarioSpec parse_scenario(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioSpec& spec);

// Results CSV.

std::vector<std::string> csv_columns(std::size_t k);
void write_csv_header(std::ostream& os, std::size_t k);
void write_csv_row(std::ostream& os, const ScenarioSpec& spec, const GridRow& row);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  double number(std::size_t row, const std::string& name) const;
};

CsvTable parse_csv(std::istream& is);

}  // namespace grp
