// Command-line surface over the optsample library: simulation traces as CSV,
// numeric verification of the closed-form bounds, exact small-instance
// search, and a loopback publisher/subscriber demo.

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "optsample/optsample.hpp"

namespace {

bool verbose_logging() {
  const char* level = std::getenv("OPTSAMPLE_LOG");
  return level != nullptr && *level != '\0' && std::string_view(level) != "0";
}

void vlog(const std::string& line) {
  if (verbose_logging()) {
    std::cerr << "[optsample] " << line << "\n";
  }
}

optsample::EvalFn parse_eval_fn(const std::string& name) {
  if (name == "natural-log") return optsample::EvalFn::NaturalLog;
  if (name == "log2") return optsample::EvalFn::Log2;
  if (name == "sqrt") return optsample::EvalFn::Sqrt;
  if (name == "arctan") return optsample::EvalFn::Arctan;
  throw CLI::ValidationError("--eval-fn",
                             "expected one of natural-log, log2, sqrt, arctan");
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) {
      parts.push_back(item);
    }
  }
  return parts;
}

std::vector<std::uint64_t> parse_capacities(const std::string& text) {
  std::vector<std::uint64_t> capacities;
  for (const std::string& part : split_csv(text)) {
    const long long value = std::stoll(part);
    if (value < 1) {
      throw CLI::ValidationError("--capacities", "capacities must be >= 1");
    }
    capacities.push_back(static_cast<std::uint64_t>(value));
  }
  if (capacities.empty()) {
    throw CLI::ValidationError("--capacities", "list must not be empty");
  }
  return capacities;
}

optsample::DisruptionSchedule parse_windows(const std::vector<std::string>& entries) {
  std::vector<optsample::DisruptionWindow> windows;
  for (const std::string& entry : entries) {
    const auto colon = entry.find(':');
    if (colon == std::string::npos) {
      throw CLI::ValidationError("--window", "expected START:END");
    }
    optsample::DisruptionWindow w;
    w.first = std::stoull(entry.substr(0, colon));
    w.last = std::stoull(entry.substr(colon + 1));
    windows.push_back(w);
  }
  return optsample::DisruptionSchedule(std::move(windows));
}

struct SimulateConfig {
  std::uint64_t capacity = 10;
  std::uint64_t arrivals = 100;
  std::string eval_fn = "natural-log";
  std::string policies = "drop-oldest,2-sample,optsample,oracle";
  bool drain = false;
  std::string out_path;
};

int cmd_simulate(const SimulateConfig& cfg) {
  optsample::Scenario scenario;
  scenario.capacity = cfg.capacity;
  scenario.arrivals = cfg.arrivals;
  scenario.eval_fn = parse_eval_fn(cfg.eval_fn);
  scenario.policies = split_csv(cfg.policies);
  scenario.drain = cfg.drain;
  const auto result = optsample::run(scenario);
  if (cfg.out_path.empty()) {
    optsample::emit_csv(result.rows, std::cout);
  } else {
    std::ofstream out(cfg.out_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot open " << cfg.out_path << " for writing\n";
      return 1;
    }
    optsample::emit_csv(result.rows, out);
  }
  return 0;
}

struct VerifyConfig {
  std::string capacities = "1,2,4,8,16";
  std::uint64_t t_max = 1024;
  std::uint64_t sandwich_arrivals = 11;
  std::uint64_t seed = 12345;
  bool corrupt = false;  // hidden negative control
};

int cmd_verify(const VerifyConfig& cfg) {
  const std::vector<std::uint64_t> capacities = parse_capacities(cfg.capacities);
  for (const std::uint64_t l : capacities) {
    if (l > cfg.t_max) {
      throw CLI::ValidationError("--t-max", "must be >= every capacity");
    }
  }
  bool all_ok = true;

  // policy-ordering and ratio-floor grid
  auto report = optsample::verify_bounds(capacities, cfg.t_max);
  std::printf("bounds grid: checks=%" PRIu64 " failures=%" PRIu64
              " worst_ratio=%.6f floor(min capacity)=%.6f\n",
              report.checks, report.failures, report.worst_ratio,
              optsample::oracle_ratio_floor(
                  *std::min_element(capacities.begin(), capacities.end())));
  if (!report.ok()) {
    all_ok = false;
    const auto& f = *report.first_failure;
    std::printf("  first counterexample: T=%" PRIu64 " L=%" PRIu64 " (%s)\n", f.arrivals,
                f.capacity, f.what.c_str());
  }

  // simulated profits against the closed forms
  double worst_err = 0.0;
  std::uint64_t worst_t = 0;
  std::uint64_t worst_l = 0;
  std::string worst_policy;
  for (const std::uint64_t capacity : capacities) {
    vlog("closed-form sweep at capacity " + std::to_string(capacity));
    auto deviation = optsample::compare_with_formulas(capacity, cfg.t_max);
    if (cfg.corrupt && capacity == capacities.front()) {
      deviation.max_abs_error += 0.1;  // simulated formula corruption
      deviation.worst_arrival = capacity;
      deviation.worst_policy = "drop-oldest";
    }
    if (deviation.max_abs_error > worst_err) {
      worst_err = deviation.max_abs_error;
      worst_t = deviation.worst_arrival;
      worst_l = capacity;
      worst_policy = deviation.worst_policy;
    }
  }
  std::printf("closed-form equality: max |simulated - formula| = %.3e (tolerance 1e-9)\n",
              worst_err);
  if (worst_err > 1e-9) {
    all_ok = false;
    std::printf("  first counterexample: T=%" PRIu64 " L=%" PRIu64 " policy=%s\n", worst_t,
                worst_l, worst_policy.c_str());
  }

  // exact-search sandwich on small instances
  bool sandwich_ok = true;
  for (std::uint64_t capacity = 1; capacity <= 3 && sandwich_ok; ++capacity) {
    for (std::uint64_t arrivals = capacity; arrivals <= cfg.sandwich_arrivals;
         ++arrivals) {
      optsample::Scenario scenario;
      scenario.capacity = capacity;
      scenario.arrivals = arrivals;
      scenario.policies = {"optsample"};
      const double simulated = optsample::run(scenario).rows.back().profit;
      const auto feasible = optsample::brute_force_optimal(arrivals, capacity);
      const auto unconstrained = optsample::exhaustive_subset_optimum(arrivals, capacity);
      const double relaxed = optsample::profit_oracle(arrivals, capacity);
      if (!(simulated <= feasible.best_profit + 1e-9 &&
            feasible.best_profit <= unconstrained.best_profit + 1e-9 &&
            unconstrained.best_profit <= relaxed + 1e-9)) {
        sandwich_ok = false;
        std::printf("  sandwich counterexample: T=%" PRIu64 " L=%" PRIu64 "\n", arrivals,
                    capacity);
        break;
      }
    }
  }
  std::printf("search sandwich (L<=3, T<=%" PRIu64 "): %s\n", cfg.sandwich_arrivals,
              sandwich_ok ? "ok" : "FAILED");
  all_ok = all_ok && sandwich_ok;

  // no-refind audit over a fresh simulation
  optsample::Scenario audit;
  audit.capacity = 10;
  audit.arrivals = std::min<std::uint64_t>(cfg.t_max, 200);
  audit.policies = {"drop-oldest", "2-sample", "optsample"};
  const auto audit_run = optsample::run(audit);
  bool audit_ok = true;
  for (const auto& [policy, log] : audit_run.snapshots) {
    if (!optsample::satisfies_no_refind_sampled(log, cfg.seed)) {
      audit_ok = false;
      std::printf("  no-refind counterexample: policy=%s\n", policy.c_str());
    }
  }
  std::printf("no-refind audit (100 sampled pairs, seed %" PRIu64 "): %s\n", cfg.seed,
              audit_ok ? "ok" : "FAILED");
  all_ok = all_ok && audit_ok;

  std::printf("result: %s\n", all_ok ? "PASS" : "FAIL");
  return all_ok ? 0 : 1;
}

struct BruteForceConfig {
  std::uint64_t capacity = 2;
  std::uint64_t arrivals = 5;
  std::string eval_fn = "natural-log";
};

int cmd_brute_force(const BruteForceConfig& cfg) {
  const auto fn = parse_eval_fn(cfg.eval_fn);
  const auto feasible = optsample::brute_force_optimal(cfg.arrivals, cfg.capacity, fn);
  const auto unconstrained =
      optsample::exhaustive_subset_optimum(cfg.arrivals, cfg.capacity, fn);
  auto print = [](const char* label, const optsample::SearchResult& r) {
    std::printf("%s: profit=%.9f nodes=%" PRIu64 " sequence=", label, r.best_profit,
                r.nodes_explored);
    const auto& members = r.best_sequence.members();
    for (std::size_t i = 0; i < members.size(); ++i) {
      std::printf("%s%" PRIu64, i == 0 ? "" : ",", members[i]);
    }
    std::printf("\n");
  };
  print("feasible-optimal", feasible);
  print("subset-optimal", unconstrained);
  return 0;
}

struct DemoPubConfig {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  std::string policy = "optsample";
  std::uint64_t capacity = 20;
  std::uint64_t count = 100;
  std::string input_path;
  std::vector<std::string> windows;
};

int cmd_demo_pub(const DemoPubConfig& cfg) {
  std::vector<std::string> payloads;
  if (!cfg.input_path.empty()) {
    std::ifstream in(cfg.input_path);
    if (!in) {
      std::cerr << "cannot open " << cfg.input_path << "\n";
      return 1;
    }
    std::string line;
    while (std::getline(in, line)) {
      payloads.push_back(line);
    }
  } else {
    payloads.reserve(cfg.count);
    for (std::uint64_t i = 1; i <= cfg.count; ++i) {
      payloads.push_back("msg-" + std::to_string(i));
    }
  }
  const auto schedule = parse_windows(cfg.windows);
  vlog("publishing " + std::to_string(payloads.size()) + " messages via " + cfg.policy);
  const auto summary = optsample::publish(cfg.host, cfg.port, cfg.policy,
                                          cfg.capacity, schedule, payloads);
  std::printf("published=%" PRIu64 " dropped=%" PRIu64 " sent=%" PRIu64 "\n",
              summary.published, summary.dropped, summary.sent);
  return 0;
}

struct DemoSubConfig {
  std::uint16_t port = 0;
  std::string port_file;
};

int cmd_demo_sub(const DemoSubConfig& cfg) {
  optsample::Subscriber subscriber(cfg.port);
  vlog("listening on port " + std::to_string(subscriber.port()));
  if (!cfg.port_file.empty()) {
    std::ofstream out(cfg.port_file);
    out << subscriber.port() << "\n";
  }
  const auto report = subscriber.run();
  std::printf("received=%zu max_gap=%" PRIu64 " profit=%.9f\n",
              report.received_seqs.size(), report.max_gap, report.achieved_profit);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"OptSample resilient buffer management: simulator, verifier and demo"};
  app.require_subcommand(1);

  SimulateConfig sim;
  auto* simulate = app.add_subcommand("simulate", "emit per-arrival profit traces as CSV");
  simulate->add_option("--capacity,-L", sim.capacity, "buffer capacity")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  simulate->add_option("--arrivals,-T", sim.arrivals, "number of arrivals")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  simulate->add_option("--eval-fn", sim.eval_fn,
                       "natural-log, log2, sqrt or arctan");
  simulate->add_option("--policies", sim.policies,
                       "comma list of drop-oldest, 2-sample, optsample, oracle, oracle-analytic");
  simulate->add_flag("--drain", sim.drain, "dequeue after every fourth arrival");
  simulate->add_option("--out", sim.out_path, "write CSV here instead of stdout");

  VerifyConfig ver;
  auto* verify = app.add_subcommand("verify", "check bounds, closed forms and search sandwich");
  verify->add_option("--capacities", ver.capacities, "comma list of buffer capacities");
  verify->add_option("--t-max", ver.t_max, "largest arrival count per capacity")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  verify->add_option("--sandwich-arrivals", ver.sandwich_arrivals,
                     "largest arrival count for the exact-search sandwich");
  verify->add_option("--seed", ver.seed, "seed for the sampled no-refind audit");
  verify->add_flag("--self-test-corrupt", ver.corrupt)->group("");

  BruteForceConfig bf;
  auto* brute = app.add_subcommand("brute-force", "exact optimum on a small instance");
  brute->add_option("--capacity,-L", bf.capacity, "buffer capacity")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  brute->add_option("--arrivals,-T", bf.arrivals, "number of arrivals")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  brute->add_option("--eval-fn", bf.eval_fn, "natural-log, log2, sqrt or arctan");

  DemoPubConfig pub;
  auto* demo_pub = app.add_subcommand("demo-pub", "publish messages through a policy buffer");
  demo_pub->add_option("--host", pub.host, "subscriber host");
  demo_pub->add_option("--port", pub.port, "subscriber port")->required();
  demo_pub->add_option("--policy", pub.policy, "drop-oldest, 2-sample or optsample");
  demo_pub->add_option("--capacity,-L", pub.capacity, "buffer capacity")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  demo_pub->add_option("--count", pub.count, "synthetic message count");
  demo_pub->add_option("--input", pub.input_path, "newline-delimited payload file");
  demo_pub->add_option("--window", pub.windows,
                       "disruption window START:END in arrival counts (repeatable)");

  DemoSubConfig sub;
  auto* demo_sub = app.add_subcommand("demo-sub", "receive messages and report the gaps");
  demo_sub->add_option("--port", sub.port, "listen port (0 picks a free one)");
  demo_sub->add_option("--port-file", sub.port_file, "write the bound port here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (verify->parsed()) return cmd_verify(ver);
    if (brute->parsed()) return cmd_brute_force(bf);
    if (demo_pub->parsed()) return cmd_demo_pub(pub);
    if (demo_sub->parsed()) return cmd_demo_sub(sub);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
