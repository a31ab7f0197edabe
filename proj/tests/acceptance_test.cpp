// Acceptance suite: one check per release criterion, each printing a
// single PASS/FAIL line. Two checks pin externally supplied constants that
// the mathematics contradicts (see the notes at criteria 3 and 6); they are
// kept as pinned and are expected to fail until the pins are corrected.

#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "optsample/optsample.hpp"

namespace optsample {
namespace {

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void report(int criterion, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s — %s\n", criterion, pass ? "PASS" : "FAIL",
              detail.c_str());
  std::fflush(stdout);
}

// 1. Drain-free simulated profit equals the closed forms for drop-oldest,
//    2-sample and optsample at every T in [L, 2000], within 1e-9.
TEST(Acceptance, Criterion1ClosedFormEquality) {
  const Timer timer;
  double worst = 0.0;
  std::string worst_at;
  for (const std::uint64_t capacity : {1u, 2u, 4u, 8u, 10u, 16u}) {
    const FormulaDeviation deviation = compare_with_formulas(capacity, 2000);
    if (deviation.max_abs_error > worst) {
      worst = deviation.max_abs_error;
      std::ostringstream os;
      os << "L=" << capacity << " T=" << deviation.worst_arrival << " "
         << deviation.worst_policy;
      worst_at = os.str();
    }
  }
  const double elapsed = timer.seconds();
  const bool pass = worst <= 1e-9 && elapsed < 10.0;
  std::ostringstream os;
  os << "closed-form equality, max |sim - formula| = " << worst << " (" << worst_at
     << "), " << elapsed << "s";
  report(1, pass, os.str());
  EXPECT_LE(worst, 1e-9) << worst_at;
  EXPECT_LT(elapsed, 10.0);
}

// 2. Desk-scale reproduction of the L=10 profit curves: orderings hold for
//    every T >= 10, optsample touches the discrete oracle at some T > 10,
//    and the CSV is byte-stable against the golden file.
TEST(Acceptance, Criterion2FigureReproduction) {
  Scenario scenario;
  scenario.capacity = 10;
  scenario.arrivals = 100;
  const RunResult result = run(scenario);

  std::map<std::string, std::map<std::uint64_t, double>> by_policy;
  for (const TraceRow& row : result.rows) {
    by_policy[row.policy][row.arrival] = row.profit;
  }
  bool orderings = true;
  for (std::uint64_t t = 10; t <= 100; ++t) {
    const double opt = by_policy["optsample"][t];
    orderings = orderings && by_policy["drop-oldest"][t] <= opt + 1e-12 &&
                by_policy["2-sample"][t] <= opt + 1e-12 &&
                opt <= profit_oracle(t, 10) + 1e-9;
  }
  bool touches = false;
  for (std::uint64_t t = 11; t <= 100; ++t) {
    if (std::abs(by_policy["optsample"][t] - by_policy["oracle"][t]) <= 1e-9) {
      touches = true;
      break;
    }
  }

  std::ostringstream csv;
  emit_csv(result.rows, csv);
  std::ifstream golden_file(std::string(OPTSAMPLE_TEST_DATA) + "/fig4_golden.csv",
                            std::ios::binary);
  std::stringstream golden;
  golden << golden_file.rdbuf();
  const bool stable = golden_file.good() && csv.str() == golden.str();

  const bool pass = orderings && touches && stable;
  std::ostringstream os;
  os << "L=10 curve reproduction (orderings " << (orderings ? "ok" : "violated")
     << ", oracle touch " << (touches ? "found" : "missing") << ", golden CSV "
     << (stable ? "stable" : "mismatch") << ")";
  report(2, pass, os.str());
  EXPECT_TRUE(orderings);
  EXPECT_TRUE(touches);
  EXPECT_TRUE(stable);
}

// 3. Bounds grid for L in 1..32, T in [L, 4096], plus the pinned value of
//    the ratio-floor constant. The grid holds; the pin requires
//    2 - ln 2 + ln ln 2 to equal 0.9400 +/- 0.0001, but the exact value is
//    0.940340 (the published approximation is the looser "~0.94"), so the
//    pinned check fails and is reported honestly rather than loosened.
TEST(Acceptance, Criterion3BoundsGridAndConstant) {
  const Timer timer;
  std::vector<std::uint64_t> capacities(32);
  std::iota(capacities.begin(), capacities.end(), 1);
  const BoundsReport grid = verify_bounds(capacities, 4096);
  const double constant = oracle_ratio_constant();
  const bool constant_pinned = std::abs(constant - 0.9400) <= 0.0001;
  const double elapsed = timer.seconds();
  const bool pass = grid.ok() && constant_pinned && elapsed < 30.0;
  std::ostringstream os;
  os << "bounds grid " << grid.checks << " checks, " << grid.failures
     << " failures, worst ratio " << grid.worst_ratio << "; constant = " << constant
     << (constant_pinned ? " within" : " OUTSIDE") << " pinned 0.9400±0.0001, "
     << elapsed << "s";
  report(3, pass, os.str());
  EXPECT_TRUE(grid.ok());
  EXPECT_LT(elapsed, 30.0);
  EXPECT_NEAR(constant, 0.9400, 0.0001)
      << "exact value is 2 - ln 2 + ln ln 2 = " << constant
      << "; the pinned 4-digit target conflicts with it";
}

// 4. Randomized evaluation-function properties, 1e4 cases with gaps up to
//    1e6: superadditivity and balance preference, strict for natural-log,
//    sqrt and arctan; log2 weakens to equality exactly at (1, 1).
TEST(Acceptance, Criterion4EvaluationFunctionProperties) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::uint64_t> dist(1, 1'000'000);
  const double quarter_pi = std::numbers::pi / 4.0;
  bool ok = true;
  std::string first_failure;
  auto fail = [&](const std::string& what) {
    ok = false;
    if (first_failure.empty()) {
      first_failure = what;
    }
  };

  for (int i = 0; i < 10000 && ok; ++i) {
    const std::uint64_t d1 = dist(rng);
    const std::uint64_t d2 = dist(rng);
    for (const EvalFn fn : {EvalFn::NaturalLog, EvalFn::Sqrt, EvalFn::Arctan}) {
      if (!(eval(fn, d1) + eval(fn, d2) > eval(fn, d1 + d2))) {
        fail("superadditivity " + std::string(eval_fn_name(fn)));
      }
    }
    const double l2 = eval(EvalFn::Log2, d1) + eval(EvalFn::Log2, d2);
    const double r2 = eval(EvalFn::Log2, d1 + d2);
    if (d1 == 1 && d2 == 1 ? l2 != r2 : !(l2 > r2)) {
      fail("superadditivity log2");
    }
  }
  if (eval(EvalFn::Log2, 1) + eval(EvalFn::Log2, 1) != eval(EvalFn::Log2, 2)) {
    fail("log2 equality case at (1,1)");
  }

  for (int i = 0; i < 10000 && ok; ++i) {
    std::uint64_t d3 = dist(rng);
    std::uint64_t d4 = dist(rng);
    if (d3 > d4) {
      std::swap(d3, d4);
    }
    if (d4 - d3 < 2) {
      continue;
    }
    std::uniform_int_distribution<std::uint64_t> shift(1, (d4 - d3) / 2);
    const std::uint64_t k = shift(rng);
    const std::uint64_t d1 = d3 + k;
    const std::uint64_t d2 = d4 - k;
    for (const EvalFn fn : {EvalFn::NaturalLog, EvalFn::Log2, EvalFn::Sqrt}) {
      if (!(eval(fn, d1) + eval(fn, d2) > eval(fn, d3) + eval(fn, d4))) {
        fail("balance preference " + std::string(eval_fn_name(fn)));
      }
    }
    // arctan margins sink below double resolution for large nearly-equal
    // gaps; the angle-difference identity computes the same margin stably
    const double a1 = static_cast<double>(d1);
    const double a2 = static_cast<double>(d2);
    const double a3 = static_cast<double>(d3);
    const double a4 = static_cast<double>(d4);
    const double margin = (std::atan((a1 - a3) / (1.0 + a1 * a3)) +
                           std::atan((a2 - a4) / (1.0 + a2 * a4))) /
                          quarter_pi;
    if (!(margin > 0.0)) {
      fail("balance preference arctan");
    }
  }

  report(4, ok, ok ? "evaluation-function properties, 10^4 randomized cases each"
                   : "evaluation-function properties: " + first_failure);
  EXPECT_TRUE(ok) << first_failure;
}

// 5. Exact-search sandwich on every small instance, and the pinned
//    even-spacing sequences.
TEST(Acceptance, Criterion5SearchSandwich) {
  const Timer timer;
  bool sandwich = true;
  std::string counterexample;
  for (std::uint64_t capacity = 1; capacity <= 3 && sandwich; ++capacity) {
    for (std::uint64_t arrivals = capacity; arrivals <= 11; ++arrivals) {
      Scenario scenario;
      scenario.capacity = capacity;
      scenario.arrivals = arrivals;
      scenario.policies = {"optsample"};
      const double simulated = run(scenario).rows.back().profit;
      const SearchResult feasible = brute_force_optimal(arrivals, capacity);
      const SearchResult unconstrained = exhaustive_subset_optimum(arrivals, capacity);
      const double relaxed = profit_oracle(arrivals, capacity);
      if (!(simulated <= feasible.best_profit + 1e-9 &&
            feasible.best_profit <= unconstrained.best_profit + 1e-9 &&
            unconstrained.best_profit <= relaxed + 1e-9)) {
        sandwich = false;
        std::ostringstream os;
        os << "T=" << arrivals << " L=" << capacity;
        counterexample = os.str();
        break;
      }
    }
  }
  const bool spacing_a =
      oracle_sequence(9, 4).members() == std::vector<std::uint64_t>{2, 4, 6, 8};
  const bool spacing_b =
      oracle_sequence(14, 4).members() == std::vector<std::uint64_t>{3, 6, 9, 12};
  const double elapsed = timer.seconds();
  const bool pass = sandwich && spacing_a && spacing_b && elapsed < 60.0;
  std::ostringstream os;
  os << "search sandwich on L<=3, T<=11 "
     << (sandwich ? "holds" : "fails at " + counterexample) << "; pinned spacings "
     << (spacing_a && spacing_b ? "exact" : "wrong") << ", " << elapsed << "s";
  report(5, pass, os.str());
  EXPECT_TRUE(sandwich) << counterexample;
  EXPECT_TRUE(spacing_a);
  EXPECT_TRUE(spacing_b);
  EXPECT_LT(elapsed, 60.0);
}

// 6. Transport resilience on the loopback: 200 messages, L=20, one window
//    covering arrivals 41..160. The optsample clauses hold. The drop-oldest
//    gap is pinned at exactly 121, but a 120-arrival outage against a
//    20-slot buffer evicts exactly 100 messages, so the wire shows a gap of
//    101 (= dropped + 1, which is also what the pub/sub reports assert
//    elsewhere in this suite's unit tests). The pinned 121 therefore fails
//    and is reported honestly rather than re-derived.
TEST(Acceptance, Criterion6TransportResilience) {
  const Timer timer;
  std::vector<std::string> payloads;
  for (int i = 1; i <= 200; ++i) {
    payloads.push_back("msg-" + std::to_string(i));
  }
  auto run_pair = [&](const char* policy) {
    Subscriber subscriber(0);
    auto receiver = std::async(std::launch::async, [&] { return subscriber.run(); });
    publish("127.0.0.1", subscriber.port(), policy, 20, DisruptionSchedule({{41, 160}}),
            payloads);
    return receiver.get();
  };
  const ReceiverReport drop = run_pair("drop-oldest");
  const ReceiverReport opt = run_pair("optsample");
  const double elapsed = timer.seconds();

  const bool drop_gap_pinned = drop.max_gap == 121;
  const bool opt_gap = opt.max_gap <= 24;
  const bool profit_order = opt.achieved_profit > drop.achieved_profit;
  const bool pass = drop_gap_pinned && opt_gap && profit_order && elapsed < 5.0;
  std::ostringstream os;
  os << "transport resilience (drop-oldest gap " << drop.max_gap
     << " vs pinned 121; optsample gap " << opt.max_gap << " <= 24 "
     << (opt_gap ? "ok" : "violated") << "; profit " << opt.achieved_profit << " > "
     << drop.achieved_profit << " " << (profit_order ? "ok" : "violated") << "), "
     << elapsed << "s";
  report(6, pass, os.str());
  EXPECT_EQ(drop.max_gap, 121u)
      << "a 120-arrival window with capacity 20 drops 100 messages, giving a gap of "
      << drop.max_gap << "; the pinned 121 conflicts with that arithmetic";
  EXPECT_LE(opt.max_gap, 24u);
  EXPECT_GT(opt.achieved_profit, drop.achieved_profit);
  EXPECT_LT(elapsed, 5.0);
}

// 7. No-refind audit: buffer snapshots never regain a discarded message,
//    checked over 100 random (T1, T2) pairs per policy and scenario.
TEST(Acceptance, Criterion7NoRefindAudit) {
  bool ok = true;
  std::string failure;
  std::uint64_t seed = 20240801;
  for (const std::uint64_t capacity : {4u, 10u}) {
    Scenario scenario;
    scenario.capacity = capacity;
    scenario.arrivals = 100;
    scenario.policies = {"drop-oldest", "2-sample", "optsample"};
    const RunResult result = run(scenario);
    for (const auto& [policy, log] : result.snapshots) {
      if (!satisfies_no_refind_sampled(log, seed++, 100)) {
        ok = false;
        failure = policy + " at L=" + std::to_string(capacity);
      }
    }
  }
  report(7, ok, ok ? "no-refind audit, 100 sampled pairs per policy and scenario"
                   : "no-refind audit failed for " + failure);
  EXPECT_TRUE(ok) << failure;
}

}  // namespace
}  // namespace optsample
