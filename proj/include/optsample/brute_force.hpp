#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optsample/profit.hpp"

namespace optsample {

struct SearchResult {
  double best_profit = 0.0;
  SequenceView best_sequence;
  std::uint64_t nodes_explored = 0;
};

namespace detail {

constexpr std::uint64_t kSearchBudget = 10'000'000;

// (capacity + 1)^(arrivals - capacity), saturating at the budget cap.
inline std::uint64_t branch_count(std::uint64_t arrivals, std::uint64_t capacity) {
  std::uint64_t branches = 1;
  for (std::uint64_t i = capacity; i < arrivals; ++i) {
    if (branches > kSearchBudget) {
      return kSearchBudget + 1;
    }
    branches *= capacity + 1;
  }
  return branches;
}

inline std::uint64_t choose_count(std::uint64_t n, std::uint64_t k) {
  k = std::min(k, n - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    if (result > kSearchBudget) {
      return kSearchBudget + 1;
    }
    result = result * (n - k + i) / i;
  }
  return result;
}

struct FeasibleSearcher {
  std::uint64_t arrivals;
  std::uint64_t capacity;
  EvalFn fn;
  std::uint64_t nodes = 0;
  // memo key: next arrival + exact buffer content; collapses branches that
  // reach the same state through different eviction orders
  std::map<std::pair<std::uint64_t, std::vector<std::uint64_t>>,
           std::pair<double, std::vector<std::uint64_t>>>
      memo;

  std::pair<double, std::vector<std::uint64_t>> best(std::uint64_t next,
                                                     std::vector<std::uint64_t> buffer) {
    ++nodes;
    if (next > arrivals) {
      double p = profit(SequenceView(buffer, arrivals), fn);
      return {p, std::move(buffer)};
    }
    auto key = std::make_pair(next, buffer);
    if (auto it = memo.find(key); it != memo.end()) {
      return it->second;
    }
    // reject the newcomer
    auto result = best(next + 1, buffer);
    // or evict one buffered message to admit it
    for (std::size_t victim = 0; victim < buffer.size(); ++victim) {
      std::vector<std::uint64_t> candidate;
      candidate.reserve(buffer.size());
      for (std::size_t i = 0; i < buffer.size(); ++i) {
        if (i != victim) {
          candidate.push_back(buffer[i]);
        }
      }
      candidate.push_back(next);
      auto branch = best(next + 1, std::move(candidate));
      if (branch.first > result.first ||
          (branch.first == result.first &&
           std::lexicographical_compare(branch.second.begin(), branch.second.end(),
                                        result.second.begin(), result.second.end()))) {
        result = std::move(branch);
      }
    }
    memo.emplace(std::move(key), result);
    return result;
  }
};

}  // namespace detail

/// Exact optimum over every feasible online schedule: the buffer fills with
/// messages 1..L, then each later arrival forces discarding either the
/// newcomer or one buffered message. Discarded messages never come back, so
/// every explored branch is a valid online execution. Ties break toward the
/// lexicographically smallest final sequence.
inline SearchResult brute_force_optimal(std::uint64_t arrivals, std::uint64_t capacity,
                                        EvalFn fn = EvalFn::NaturalLog) {
  if (capacity == 0 || arrivals < capacity) {
    throw std::domain_error("brute_force_optimal requires arrivals >= capacity >= 1");
  }
  if (detail::branch_count(arrivals, capacity) > detail::kSearchBudget) {
    throw std::length_error(
        "brute_force_optimal: instance too large, requires (capacity+1)^(arrivals-capacity) <= 1e7");
  }
  std::vector<std::uint64_t> initial(capacity);
  std::iota(initial.begin(), initial.end(), 1);
  detail::FeasibleSearcher searcher{arrivals, capacity, fn, 0, {}};
  auto [best_profit, best_members] = searcher.best(capacity + 1, std::move(initial));
  return {best_profit, SequenceView(std::move(best_members), arrivals), searcher.nodes};
}

/// Unconstrained optimum over all subsets of {1..T} with at most L members.
/// No feasibility restriction applies, so this dominates every online
/// policy; it validates the rounding of oracle_sequence.
inline SearchResult exhaustive_subset_optimum(std::uint64_t arrivals, std::uint64_t capacity,
                                              EvalFn fn = EvalFn::NaturalLog) {
  if (capacity == 0 || arrivals < capacity) {
    throw std::domain_error("exhaustive_subset_optimum requires arrivals >= capacity >= 1");
  }
  if (detail::choose_count(arrivals, capacity) > detail::kSearchBudget) {
    throw std::length_error(
        "exhaustive_subset_optimum: instance too large, requires C(arrivals, capacity) <= 1e7");
  }
  SearchResult result;
  result.best_profit = profit(SequenceView({}, arrivals), fn);
  result.best_sequence = SequenceView({}, arrivals);
  result.nodes_explored = 1;
  for (std::uint64_t size = 1; size <= capacity; ++size) {
    std::vector<std::uint64_t> pick(size);
    std::iota(pick.begin(), pick.end(), 1);
    while (true) {
      ++result.nodes_explored;
      const double p = profit(SequenceView(pick, arrivals), fn);
      const bool tie_break =
          p == result.best_profit &&
          std::lexicographical_compare(pick.begin(), pick.end(),
                                       result.best_sequence.members().begin(),
                                       result.best_sequence.members().end());
      if (p > result.best_profit || tie_break) {
        result.best_profit = p;
        result.best_sequence = SequenceView(pick, arrivals);
      }
      // advance to the next combination in lexicographic order
      std::size_t i = size;
      while (i > 0 && pick[i - 1] == arrivals - size + i) {
        --i;
      }
      if (i == 0) {
        break;
      }
      ++pick[i - 1];
      for (std::size_t j = i; j < size; ++j) {
        pick[j] = pick[j - 1] + 1;
      }
    }
  }
  return result;
}

}  // namespace optsample
