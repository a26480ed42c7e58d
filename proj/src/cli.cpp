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

#include "grp/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace grp::cli {

using nlohmann::json;

namespace {

class OutputError : public Error {
 public:
  using Error::Error;
};

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw InputError(what + ": '" + item + "' is not a number");
    }
  }
  return out;
}

// Where a subcommand's output goes: --out, else $GRP_OUT_DIR/<name>, else
// stdout (empty path).
std::filesystem::path output_path(const std::string& flag, const char* default_name) {
  if (!flag.empty()) return flag;
  if (const char* dir = std::getenv(kOutDirEnv); dir != nullptr && *dir != '\0') {
    return std::filesystem::path(dir) / default_name;
  }
  return {};
}

void emit(const std::filesystem::path& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw OutputError(path.string() + ": cannot open for writing");
  f << text;
  if (!f) throw OutputError(path.string() + ": write failed");
}

Format parse_format(const std::string& s) {
  if (s == "json") return Format::kJson;
  if (s == "csv") return Format::kCsv;
  if (s == "table") return Format::kTable;
  throw InputError("--format: expected json, csv or table");
}

void apply_overrides(MarketDocument& m, const std::string& q, const std::string& relativity) {
  if (!q.empty()) {
    const auto v = parse_list(q, "--q");
    if (v.size() != 1) throw InputError("--q: expected one number");
    m.config.density_exponent = v[0];
  }
  if (!relativity.empty()) m.config.relativity = parse_list(relativity, "--relativity");
  try {
    validate_market(m.ask, m.bids, m.config);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

std::string bundle_text(const Bundle& b) {
  std::ostringstream os;
  os << '<';
  for (std::size_t i = 0; i < b.size(); ++i) os << (i ? "," : "") << b[i];
  os << '>';
  return os.str();
}

json summary_json(const VerifySummary& s, const std::vector<std::string>& failures) {
  return {{"schema_version", kSchemaVersion},
          {"summary",
           {{"instances", s.instances},
            {"deviations", s.deviations},
            {"violations", s.violations},
            {"failures", failures}}}};
}

void record(const CheckResult& c, const char* suite, std::vector<std::string>& failures,
            VerifySummary& s, std::ostream& err) {
  if (c.passed) return;
  ++s.violations;
  std::string line = std::string(suite) + ": " + c.detail;
  err << "violation " << line << '\n';
  if (c.counterexample) {
    const Deviation& d = *c.counterexample;
    err << "  counterexample: " << json{{"target", d.target},
                                        {"bundle", d.declared_bundle},
                                        {"valuation", d.declared_valuation},
                                        {"kind", to_string(d.kind)}}
                                       .dump()
        << '\n';
  }
  failures.push_back(std::move(line));
}

int do_auction(const std::string& input, const std::string& q, const std::string& rel,
               const std::string& out_flag, const std::string& format, std::ostream& out) {
  MarketDocument m = read_market(input);
  apply_overrides(m, q, rel);
  const Format f = parse_format(format);
  if (f == Format::kCsv) throw InputError("--format: auction supports json or table");
  const PricedOutcome priced = run_auction(m.ask, m.bids, m.config);
  std::ostringstream text;
  if (f == Format::kTable) {
    print_outcome_table(text, m, priced);
  } else {
    text << outcome_to_json(m, priced).dump(2) << '\n';
  }
  emit(output_path(out_flag, "outcome.json"), text.str(), out);
  return kOk;
}

int do_oracle(const std::string& input, const std::string& method, const std::string& out_flag,
              const std::string& format, std::ostream& out) {
  const MarketDocument m = read_market(input);
  const Format f = parse_format(format);
  if (f == Format::kCsv) throw InputError("--format: oracle supports json or table");
  OptimalResult mkp, mkp_rp;
  if (method == "dp") {
    mkp = mkp_optimal(m.ask, m.bids);
    mkp_rp = mkp_rp_optimal(m.ask, m.bids);
  } else if (method == "enumeration") {
    mkp = enumerate_optimal(m.ask, m.bids);
    const auto keep = rpc_feasible(m.ask, m.bids);
    std::vector<Bid> filtered;
    for (std::size_t j : keep) filtered.push_back(m.bids[j]);
    mkp_rp = enumerate_optimal(m.ask, filtered);
    for (std::size_t& w : mkp_rp.winners) w = keep[w];
  } else {
    throw InputError("--method: expected dp or enumeration");
  }
  std::ostringstream text;
  if (f == Format::kTable) {
    auto line = [&](const char* name, const OptimalResult& r) {
      text << std::left << std::setw(8) << name << " welfare " << r.welfare << "  winners";
      for (std::size_t j : r.winners) text << ' ' << m.bids[j].id;
      text << "  (" << to_string(r.method) << ")\n";
    };
    line("MKP", mkp);
    line("MKP-RP", mkp_rp);
  } else {
    const json doc = {{"schema_version", kSchemaVersion},
                      {"mkp", optimal_to_json(m.bids, mkp)},
                      {"mkp_rp", optimal_to_json(m.bids, mkp_rp)}};
    text << doc.dump(2) << '\n';
  }
  emit(output_path(out_flag, "optimal.json"), text.str(), out);
  return kOk;
}

struct GridFlags {
  std::string input;
  std::string out;
  std::string q;
  std::string relativity;
  std::string rp;
  std::string cost_run;
  std::string cost_idle;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 0;
  bool resume = false;
  bool timings = false;
  bool no_oracles = false;
  bool verbose = false;
};

int do_grid(const GridFlags& g, std::ostream& out, std::ostream& err) {
  ScenarioSpec spec = parse_scenario(read_json_file(g.input));
  if (g.seed) spec.seed = *g.seed;
  if (!g.q.empty()) {
    const auto v = parse_list(g.q, "--q");
    if (v.size() != 1) throw InputError("--q: expected one number");
    spec.q = v[0];
  }
  if (!g.relativity.empty()) spec.relativity = parse_list(g.relativity, "--relativity");
  if (!g.rp.empty()) spec.rp_levels = parse_list(g.rp, "--rp");
  if (!g.cost_run.empty() || !g.cost_idle.empty()) {
    const Money run = g.cost_run.empty() ? CostParams{}.run : parse_list(g.cost_run, "--cost-run").at(0);
    if (g.cost_idle.empty()) {
      spec.cost_params = {{run, 0.25 * run}, {run, 0.5 * run}, {run, 0.75 * run}, {run, run}};
    } else {
      spec.cost_params = {{run, parse_list(g.cost_idle, "--cost-idle").at(0)}};
    }
  }
  if (g.timings) spec.record_timings = true;
  if (g.no_oracles) spec.run_oracles = false;
  try {
    validate(spec);
  } catch (const Error& e) {
    throw InputError(e.what());
  }

  GridOptions opts;
  opts.jobs = g.jobs > 0 ? g.jobs : std::max(1U, std::thread::hardware_concurrency());
  const std::filesystem::path path = output_path(g.out, "results.csv");
  const std::size_t per_supply = settings_per_supply(spec);

  std::ofstream file;
  std::ostream* sink = &out;
  if (path.empty()) {
    if (g.resume) throw InputError("--resume: needs an output file (--out or $GRP_OUT_DIR)");
    write_csv_header(out, spec.k);
  } else {
    std::vector<std::string> kept;
    if (g.resume && std::filesystem::exists(path)) {
      std::ifstream in(path);
      std::string line;
      std::getline(in, line);
      std::ostringstream expected;
      write_csv_header(expected, spec.k);
      if (line + "\n" != expected.str()) throw InputError(path.string() + ": header does not match scenario");
      for (std::size_t row = 0; std::getline(in, line); ++row) {
        if (line.empty()) break;
        if (line.rfind(std::to_string(row) + ",", 0) != 0) break;
        kept.push_back(line);
      }
      if (per_supply > 0) kept.resize(kept.size() / per_supply * per_supply);
      opts.first_supply_setting = per_supply > 0 ? kept.size() / per_supply : 0;
    }
    file.open(path, std::ios::binary | std::ios::trunc);
    if (!file) throw OutputError(path.string() + ": cannot open for writing");
    write_csv_header(file, spec.k);
    for (const std::string& l : kept) file << l << '\n';
    sink = &file;
  }

  opts.on_row = [&](const GridRow& row) { write_csv_row(*sink, spec, row); };
  opts.on_progress = [&](std::size_t done, std::size_t total) {
    sink->flush();
    if (g.verbose) err << "[grid] supply setting " << done << "/" << total << '\n';
  };
  if (g.verbose && opts.first_supply_setting > 0) {
    err << "[grid] resuming after " << opts.first_supply_setting * per_supply << " settings\n";
  }
  run_grid(spec, opts);
  sink->flush();
  if (file.is_open() && !file) throw OutputError(path.string() + ": write failed");
  return kOk;
}

struct VerifyFlags {
  std::string input;
  std::string out;
  std::string suites = "all";
  std::string deviations;
  std::string format = "json";
  std::size_t samples = 200;
  std::size_t random = 0;
  std::uint64_t seed = 1;
};

int do_verify(const VerifyFlags& v, std::ostream& out, std::ostream& err) {
  const MarketDocument m = read_market(v.input);
  VerifyOptions opts;
  opts.monotonicity_samples = v.samples;
  opts.seed = v.seed;
  opts.sweep.random_samples = v.random;
  opts.sweep.seed = v.seed;
  if (!v.deviations.empty()) {
    opts.sweep.explicit_deviations = parse_deviations(read_json_file(v.deviations), m);
  }
  if (v.suites != "all") {
    opts.suites = VerifySuites{false, false, false, false};
    std::stringstream ss(v.suites);
    std::string s;
    while (std::getline(ss, s, ',')) {
      if (s == "truthfulness") {
        opts.suites.truthfulness = true;
      } else if (s == "monotonicity") {
        opts.suites.monotonicity = true;
      } else if (s == "critical") {
        opts.suites.critical_value = true;
      } else if (s == "outcome") {
        opts.suites.outcome = true;
      } else {
        throw InputError("--suite: unknown suite '" + s + "'");
      }
    }
  }
  const Format f = parse_format(v.format);
  std::ostringstream report;
  VerifySummary summary;
  const int rc = cmd_verify(m, opts, report, err, &summary);
  if (f == Format::kTable) {
    std::ostringstream t;
    t << "instances " << summary.instances << "  deviations " << summary.deviations
      << "  violations " << summary.violations << "  => " << (rc == kOk ? "PASS" : "FAIL")
      << '\n';
    emit(output_path(v.out, "verify.txt"), t.str(), out);
  } else {
    emit(output_path(v.out, "verify.jsonl"), report.str(), out);
  }
  return rc;
}

}  // namespace

std::vector<Deviation> parse_deviations(const json& doc, const MarketDocument& market) {
  if (!doc.is_array()) throw InputError("deviations: expected an array");
  std::vector<Deviation> out;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "deviations[" + std::to_string(i) + "]";
    const json& d = doc[i];
    if (!d.is_object() || !d.contains("target") || !d.contains("bundle") ||
        !d.contains("valuation") || !d["target"].is_string() || !d["valuation"].is_number()) {
      throw InputError(path + ": expected {target, bundle, valuation}");
    }
    const std::string target = d["target"].get<std::string>();
    const Bid* truth = nullptr;
    for (const Bid& b : market.bids) {
      if (b.id == target) truth = &b;
    }
    if (truth == nullptr) throw InputError(path + ".target: unknown bidder '" + target + "'");
    Bundle bundle;
    for (const json& x : d["bundle"]) {
      if (!x.is_number_integer()) throw InputError(path + ".bundle: expected integers");
      bundle.push_back(x.get<std::int64_t>());
    }
    try {
      validate(Bid{target, bundle, d["valuation"].get<double>()}, market.ask.types());
    } catch (const Error& e) {
      throw InputError(path + ": " + e.what());
    }
    out.push_back(make_deviation(*truth, std::move(bundle), d["valuation"].get<double>()));
  }
  return out;
}

int cmd_verify(const MarketDocument& m, const VerifyOptions& options, std::ostream& report,
               std::ostream& err, VerifySummary* summary_out) {
  VerifySummary s;
  s.instances = 1;
  std::vector<std::string> failures;

  if (options.suites.outcome) {
    record(check_outcome(m.ask, m.bids, m.config, options.mechanism), "outcome", failures, s,
           err);
  }
  if (options.suites.critical_value) {
    record(check_critical_value(m.ask, m.bids, m.config, options.mechanism), "critical_value",
           failures, s, err);
  }
  if (options.suites.monotonicity) {
    record(check_monotonicity(m.ask, m.bids, m.config, options.monotonicity_samples,
                              options.seed),
           "monotonicity", failures, s, err);
  }
  if (options.suites.truthfulness) {
    const TruthfulnessResult t =
        check_truthfulness(m.ask, m.bids, m.config, options.sweep, options.mechanism);
    for (const DeviationReport& r : t.reports) report << deviation_to_json(r).dump() << '\n';
    s.deviations = t.reports.size();
    for (const DeviationReport& r : t.reports) {
      if (r.profitable) ++s.violations;
    }
    if (!t.check.passed) {
      err << "violation truthfulness: " << t.check.detail << '\n';
      failures.push_back("truthfulness: " + t.check.detail);
    }
  }
  report << summary_json(s, failures).dump() << '\n';
  if (summary_out != nullptr) *summary_out = s;
  return s.violations == 0 ? kOk : kViolation;
}

void print_outcome_table(std::ostream& os, const MarketDocument& m, const PricedOutcome& p) {
  os << std::left << std::setw(10) << "bid" << std::setw(14) << "bundle" << std::right
     << std::setw(11) << "valuation" << std::setw(11) << "density" << std::setw(8) << "winner"
     << std::setw(12) << "payment" << "  basis\n";
  os << std::fixed << std::setprecision(4);
  for (std::size_t j = 0; j < m.bids.size(); ++j) {
    const Bid& b = m.bids[j];
    os << std::left << std::setw(10) << b.id << std::setw(14) << bundle_text(b.bundle)
       << std::right << std::setw(11) << b.valuation << std::setw(11) << p.densities[j]
       << std::setw(8) << (p.outcome.is_winner(j) ? "yes" : "no") << std::setw(12)
       << p.outcome.payments[j] << "  "
       << (p.price_basis[j] ? to_string(*p.price_basis[j]) : "-") << '\n';
  }
  os << "revenue " << p.revenue << "  allocated value " << p.allocated_value << "  sold "
     << bundle_text(p.outcome.sold) << "  remaining " << bundle_text(p.remaining) << '\n';
  os << std::defaultfloat;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Greedy-RP truthful combinatorial auction for cloud VM allocation", "grp"};
  app.require_subcommand(1);

  std::string input, out_flag, q, rel, format = "json", method = "dp";

  auto* auction = app.add_subcommand("auction", "Run one auction on a market document");
  auction->add_option("market", input, "Market document (JSON)")->required();
  auction->add_option("--q", q, "Density exponent override");
  auction->add_option("--relativity", rel, "Relativity override, e.g. 1,2,4");
  auction->add_option("--out", out_flag, "Output path");
  auction->add_option("--format", format, "json or table");

  VerifyFlags vf;
  auto* verify = app.add_subcommand("verify", "Check truthfulness properties on a market");
  verify->add_option("market", vf.input, "Market document (JSON)")->required();
  verify->add_option("--suite", vf.suites,
                     "Comma list of truthfulness,monotonicity,critical,outcome (default all)");
  verify->add_option("--deviations", vf.deviations, "Extra explicit deviations (JSON array)");
  verify->add_option("--samples", vf.samples, "Monotonicity probes");
  verify->add_option("--random", vf.random, "Random deviations per bidder");
  verify->add_option("--seed", vf.seed, "RNG seed for sampled checks");
  verify->add_option("--out", vf.out, "Output path (JSON lines)");
  verify->add_option("--format", vf.format, "json or table");

  GridFlags gf;
  std::uint64_t seed = 0;
  auto* grid = app.add_subcommand("grid", "Run an experiment grid and write the results CSV");
  grid->add_option("scenario", gf.input, "Scenario document (JSON)")->required();
  grid->add_option("--out", gf.out, "Output CSV path");
  auto* seed_opt = grid->add_option("--seed", seed, "Seed override");
  grid->add_option("--jobs", gf.jobs, "Worker threads (default: all cores)");
  grid->add_option("--q", gf.q, "Density exponent override");
  grid->add_option("--relativity", gf.relativity, "Relativity override");
  grid->add_option("--rp", gf.rp, "Reserve-price levels override, e.g. 0,0.3");
  grid->add_option("--cost-run", gf.cost_run, "Running cost per weighted unit");
  grid->add_option("--cost-idle", gf.cost_idle, "Idle cost per weighted unit");
  grid->add_option("--format", format, "csv");
  grid->add_flag("--resume", gf.resume, "Continue a partially written CSV");
  grid->add_flag("--timings", gf.timings, "Record t_mech_ms / t_mkp_ms");
  grid->add_flag("--no-oracles", gf.no_oracles, "Skip MKP / MKP-RP");
  grid->add_flag("-v,--verbose", gf.verbose, "Progress on stderr");

  auto* oracle = app.add_subcommand("oracle", "Exact MKP and MKP-RP optima for a market");
  oracle->add_option("market", input, "Market document (JSON)")->required();
  oracle->add_option("--method", method, "dp or enumeration");
  oracle->add_option("--out", out_flag, "Output path");
  oracle->add_option("--format", format, "json or table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kInputError;
  }

  try {
    if (*auction) return do_auction(input, q, rel, out_flag, format, out);
    if (*oracle) return do_oracle(input, method, out_flag, format, out);
    if (*verify) return do_verify(vf, out, err);
    if (*grid) {
      if (format != "json" && format != "csv") throw InputError("--format: grid writes csv");
      if (*seed_opt) gf.seed = seed;
      return do_grid(gf, out, err);
    }
  } catch (const OutputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}

}  // namespace grp::cli
