#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace optsample {

/// Per-gap scoring function. NaturalLog is the default used throughout;
/// the alternates share the same qualitative shape (superadditive, balance
/// preferring) but have no closed-form policy profits.
enum class EvalFn {
  NaturalLog,
  Log2,
  Sqrt,
  Arctan,
};

inline const char* eval_fn_name(EvalFn fn) {
  switch (fn) {
    case EvalFn::NaturalLog: return "natural-log";
    case EvalFn::Log2: return "log2";
    case EvalFn::Sqrt: return "sqrt";
    case EvalFn::Arctan: return "arctan";
  }
  return "unknown";
}

/// Score of a single gap d >= 1.
inline double eval(EvalFn fn, std::uint64_t gap) {
  if (gap == 0) {
    throw std::domain_error("eval: gap must be a positive integer");
  }
  const double d = static_cast<double>(gap);
  switch (fn) {
    case EvalFn::NaturalLog: return 1.0 + std::log(d);
    case EvalFn::Log2: return 1.0 + std::log2(d);
    case EvalFn::Sqrt: return std::sqrt(d);
    case EvalFn::Arctan: return std::atan(d) / (std::numbers::pi / 4.0);
  }
  throw std::logic_error("eval: unhandled evaluation function");
}

/// Strictly increasing message numbers a_1 < ... < a_n, all within [1, horizon].
/// The horizon is the number of the last message that arrived, so an empty
/// view with horizon T describes "everything was lost".
class SequenceView {
 public:
  SequenceView() = default;

  SequenceView(std::vector<std::uint64_t> members, std::uint64_t horizon)
      : members_(std::move(members)), horizon_(horizon) {
    std::uint64_t prev = 0;
    for (const std::uint64_t m : members_) {
      if (m <= prev) {
        throw std::invalid_argument(
            "SequenceView: members must be strictly increasing and >= 1");
      }
      prev = m;
    }
    if (prev > horizon_) {
      throw std::invalid_argument("SequenceView: members must not exceed the horizon");
    }
  }

  const std::vector<std::uint64_t>& members() const { return members_; }
  std::uint64_t horizon() const { return horizon_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }

 private:
  std::vector<std::uint64_t> members_;
  std::uint64_t horizon_ = 0;
};

using GapList = std::vector<std::uint64_t>;

/// Gaps of the extended sequence {0, a_1, ..., a_n, horizon + 1}.
/// Always n + 1 entries, each >= 1, summing to horizon + 1.
inline GapList extend(const SequenceView& seq) {
  GapList gaps;
  gaps.reserve(seq.size() + 1);
  std::uint64_t prev = 0;
  for (const std::uint64_t m : seq.members()) {
    gaps.push_back(m - prev);
    prev = m;
  }
  gaps.push_back(seq.horizon() + 1 - prev);
  return gaps;
}

/// Score of a received sequence: the evaluation function summed over the
/// gaps of the extended sequence, so both boundary gaps count.
inline double profit(const SequenceView& seq, EvalFn fn = EvalFn::NaturalLog) {
  double total = 0.0;
  for (const std::uint64_t gap : extend(seq)) {
    total += eval(fn, gap);
  }
  return total;
}

}  // namespace optsample
