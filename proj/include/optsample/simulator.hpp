#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "optsample/analytic.hpp"
#include "optsample/policies.hpp"
#include "optsample/profit.hpp"

namespace optsample {

/// One sample of a policy's state after an arrival.
struct TraceRow {
  std::uint64_t arrival = 0;  // T
  std::string policy;
  double profit = 0.0;
  std::uint64_t rate = 1;
  std::uint64_t occupancy = 0;
};

/// A drain-free run feeds arrivals 1..arrivals into each policy and scores
/// the buffer after every arrival. With drain set, one dequeue follows every
/// fourth arrival, slow enough that buffers still overflow but exercising
/// the sampling-rate recovery path.
struct Scenario {
  std::uint64_t capacity = 10;
  std::uint64_t arrivals = 100;
  EvalFn eval_fn = EvalFn::NaturalLog;
  std::vector<std::string> policies = {"drop-oldest", "2-sample", "optsample", "oracle"};
  bool drain = false;
};

using SnapshotLog = std::vector<std::vector<std::uint64_t>>;  // index T-1 -> kept seqs

struct RunResult {
  std::vector<TraceRow> rows;
  std::map<std::string, SnapshotLog> snapshots;
};

inline RunResult run(const Scenario& scenario) {
  if (scenario.capacity == 0 || scenario.arrivals == 0) {
    throw std::invalid_argument("scenario requires capacity >= 1 and arrivals >= 1");
  }
  if (scenario.policies.empty()) {
    throw std::invalid_argument("scenario requires at least one policy");
  }
  RunResult result;
  for (const std::string& name : scenario.policies) {
    if (name == "oracle") {
      SnapshotLog& log = result.snapshots[name];
      for (std::uint64_t t = 1; t <= scenario.arrivals; ++t) {
        const std::uint64_t effective = std::min<std::uint64_t>(scenario.capacity, t);
        SequenceView view = oracle_sequence(t, effective);
        result.rows.push_back(
            {t, name, profit(view, scenario.eval_fn), 1, view.size()});
        log.push_back(view.members());
      }
    } else if (name == "oracle-analytic") {
      for (std::uint64_t t = 1; t <= scenario.arrivals; ++t) {
        const double p = t < scenario.capacity ? static_cast<double>(t + 1)
                                               : profit_oracle(t, scenario.capacity);
        result.rows.push_back(
            {t, name, p, 1, std::min<std::uint64_t>(scenario.capacity, t)});
      }
    } else {
      auto policy = make_policy(name, scenario.capacity);
      SnapshotLog& log = result.snapshots[name];
      for (std::uint64_t t = 1; t <= scenario.arrivals; ++t) {
        policy->enqueue({t, "", {}});
        if (scenario.drain && t % 4 == 0) {
          policy->dequeue();
        }
        SequenceView view = policy->contents(t);
        result.rows.push_back(
            {t, name, profit(view, scenario.eval_fn), policy->rate(), view.size()});
        log.push_back(view.members());
      }
    }
  }
  return result;
}

/// Writes "T,policy,profit,rate,occupancy" rows, profit with nine fractional
/// digits, LF line endings. Returns the number of bytes written.
inline std::uint64_t emit_csv(const std::vector<TraceRow>& rows, std::ostream& sink) {
  if (rows.empty()) {
    throw std::invalid_argument("emit_csv: no rows to write");
  }
  std::uint64_t bytes = 0;
  auto write = [&](const std::string& line) {
    sink << line << '\n';
    bytes += line.size() + 1;
  };
  write("T,policy,profit,rate,occupancy");
  char buf[160];
  for (const TraceRow& row : rows) {
    const int n = std::snprintf(buf, sizeof(buf), "%llu,%s,%.9f,%llu,%llu",
                                static_cast<unsigned long long>(row.arrival),
                                row.policy.c_str(), row.profit,
                                static_cast<unsigned long long>(row.rate),
                                static_cast<unsigned long long>(row.occupancy));
    if (n < 0 || static_cast<std::size_t>(n) >= sizeof(buf)) {
      throw std::runtime_error("emit_csv: row formatting failed");
    }
    write(std::string(buf, static_cast<std::size_t>(n)));
  }
  if (sink.fail()) {
    throw std::runtime_error("emit_csv: sink write failure");
  }
  return bytes;
}

namespace detail {

// snapshot[t2] restricted to 1..t1 must be contained in snapshot[t1]
inline bool no_refind_pair(const SnapshotLog& log, std::size_t t1_index,
                           std::size_t t2_index) {
  const std::vector<std::uint64_t>& early = log[t1_index];
  const std::vector<std::uint64_t>& late = log[t2_index];
  const std::uint64_t horizon = static_cast<std::uint64_t>(t1_index) + 1;
  for (const std::uint64_t seq : late) {
    if (seq > horizon) {
      break;
    }
    if (!std::binary_search(early.begin(), early.end(), seq)) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Checks that a policy never restores a message it already discarded:
/// for every T1 < T2, the late snapshot's members within 1..T1 are a subset
/// of the early snapshot. All pairs.
inline bool satisfies_no_refind(const SnapshotLog& log) {
  for (std::size_t t1 = 0; t1 < log.size(); ++t1) {
    for (std::size_t t2 = t1 + 1; t2 < log.size(); ++t2) {
      if (!detail::no_refind_pair(log, t1, t2)) {
        return false;
      }
    }
  }
  return true;
}

/// Same property over a fixed number of randomly drawn (T1, T2) pairs.
inline bool satisfies_no_refind_sampled(const SnapshotLog& log, std::uint64_t seed,
                                        std::size_t pairs = 100) {
  if (log.size() < 2) {
    return true;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> dist(0, log.size() - 1);
  for (std::size_t i = 0; i < pairs; ++i) {
    std::size_t a = dist(rng);
    std::size_t b = dist(rng);
    if (a == b) {
      continue;
    }
    if (!detail::no_refind_pair(log, std::min(a, b), std::max(a, b))) {
      return false;
    }
  }
  return true;
}

struct FormulaDeviation {
  double max_abs_error = 0.0;
  std::uint64_t worst_arrival = 0;
  std::string worst_policy;
};

/// Largest |simulated - closed form| across drop-oldest, 2-sample and
/// optsample for T in [L, max_arrivals], drain-free. The strongest
/// cross-check in the project: it pins the policy semantics to the formulas.
inline FormulaDeviation compare_with_formulas(std::uint64_t capacity,
                                              std::uint64_t max_arrivals) {
  Scenario scenario;
  scenario.capacity = capacity;
  scenario.arrivals = max_arrivals;
  scenario.policies = {"drop-oldest", "2-sample", "optsample"};
  const RunResult result = run(scenario);
  FormulaDeviation deviation;
  for (const TraceRow& row : result.rows) {
    if (row.arrival < capacity) {
      continue;
    }
    double expected = 0.0;
    if (row.policy == "drop-oldest") {
      expected = profit_drop_oldest(row.arrival, capacity);
    } else if (row.policy == "2-sample") {
      expected = profit_two_sample(row.arrival, capacity);
    } else {
      expected = profit_optsample(row.arrival, capacity);
    }
    const double err = std::abs(row.profit - expected);
    if (err > deviation.max_abs_error) {
      deviation.max_abs_error = err;
      deviation.worst_arrival = row.arrival;
      deviation.worst_policy = row.policy;
    }
  }
  return deviation;
}

}  // namespace optsample
