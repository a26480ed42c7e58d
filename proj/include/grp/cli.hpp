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
#include <optional>
#include <string>
#include <vector>

#include "grp/io.hpp"
#include "grp/strategy.hpp"

namespace grp::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kInputError = 2 };

/// Environment variable naming the directory used when --out is omitted.
inline constexpr const char* kOutDirEnv = "GRP_OUT_DIR";

enum class Format { kJson, kCsv, kTable };

struct VerifySuites {
  bool truthfulness = true;
  bool monotonicity = true;
  bool critical_value = true;
  bool outcome = true;
};

struct VerifyOptions {
  VerifySuites suites;
  SweepSpec sweep = SweepSpec::standard();
  std::size_t monotonicity_samples = 200;
  std::uint64_t seed = 1;
  Mechanism mechanism = greedy_rp();
};

struct VerifySummary {
  std::size_t instances = 0;
  std::size_t deviations = 0;
  std::size_t violations = 0;
};

/// Runs the selected checks, writes one JSON line per deviation report and
/// a final summary line to `report`, and describes any counterexample on
/// `err`. Returns kOk or kViolation.
int cmd_verify(const MarketDocument& market, const VerifyOptions& options,
               std::ostream& report, std::ostream& err, VerifySummary* summary = nullptr);

/// Parses explicit deviations: [{"target": id, "bundle": [...], "valuation": x}, ...].
std::vector<Deviation> parse_deviations(const nlohmann::json& doc, const MarketDocument& market);

/// Human-readable outcome table.
void print_outcome_table(std::ostream& os, const MarketDocument& market,
                         const PricedOutcome& priced);

/// Entry point shared by the `grp` binary and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace grp::cli
