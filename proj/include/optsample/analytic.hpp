#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>

#include "optsample/profit.hpp"

namespace optsample {

namespace detail {

inline void require_instance(std::uint64_t arrivals, std::uint64_t capacity) {
  if (capacity == 0 || arrivals < capacity) {
    throw std::domain_error("instance requires arrivals >= capacity >= 1");
  }
}

}  // namespace detail

/// Integer structure of a drain-free OptSample buffer of size L after T
/// arrivals. Writing T = blocks*L + block_rem, rate = 2^rate_exp with
/// rate <= blocks < 2*rate, and rate_excess*L + block_rem = wide_gaps*rate + tail,
/// the buffer holds the multiples of rate up to rate*slots, with wide_gaps of
/// the L + 1 gaps widened to 2*rate and a trailing gap of tail + 1. The
/// identity T = rate*slots + tail always holds.
struct Decomposition {
  std::uint64_t blocks;       // T / L
  std::uint64_t block_rem;    // T mod L, in [0, L-1]
  std::uint64_t rate_exp;     // rate = 2^rate_exp
  std::uint64_t rate_excess;  // blocks - rate, in [0, rate-1]
  std::uint64_t rate;         // sampling stride in effect after T arrivals
  std::uint64_t wide_gaps;    // number of doubled gaps, = slots - L, in [0, L-1]
  std::uint64_t tail;         // arrivals past the last kept stride, in [0, rate-1]
  std::uint64_t slots;        // last kept message number = rate * slots
};

inline Decomposition decompose(std::uint64_t arrivals, std::uint64_t capacity) {
  detail::require_instance(arrivals, capacity);
  Decomposition d{};
  d.blocks = arrivals / capacity;
  d.block_rem = arrivals % capacity;
  d.rate = std::bit_floor(d.blocks);
  d.rate_exp = static_cast<std::uint64_t>(std::countr_zero(d.rate));
  d.rate_excess = d.blocks - d.rate;
  const std::uint64_t spill = d.rate_excess * capacity + d.block_rem;
  d.wide_gaps = spill / d.rate;
  d.tail = spill % d.rate;
  d.slots = capacity + d.wide_gaps;
  return d;
}

/// Continuous-relaxation optimum: (L+1) * ln((T+1)/(L+1)) + L + 1.
/// The discrete nearest-integer oracle can score marginally below this.
inline double profit_oracle(std::uint64_t arrivals, std::uint64_t capacity) {
  detail::require_instance(arrivals, capacity);
  const double t = static_cast<double>(arrivals);
  const double l = static_cast<double>(capacity);
  return (l + 1.0) * std::log((t + 1.0) / (l + 1.0)) + l + 1.0;
}

/// Keep-the-newest-L policy: L + ln(T - L + 1) + 1.
inline double profit_drop_oldest(std::uint64_t arrivals, std::uint64_t capacity) {
  detail::require_instance(arrivals, capacity);
  const double leading = static_cast<double>(arrivals - capacity + 1);
  return static_cast<double>(capacity) + std::log(leading) + 1.0;
}

/// Halve-the-buffer sampling policy, using the smallest power of two
/// r >= (T+1)/(L+1): with l = floor(T/r) and t = T - r*l the profit is
/// l * (ln r + 1) + ln(t + 1) + 1.
inline double profit_two_sample(std::uint64_t arrivals, std::uint64_t capacity) {
  detail::require_instance(arrivals, capacity);
  std::uint64_t rate = 1;
  while (rate * (capacity + 1) < arrivals + 1) {
    rate *= 2;
  }
  const std::uint64_t slots = arrivals / rate;
  const std::uint64_t tail = arrivals - rate * slots;
  return static_cast<double>(slots) * (std::log(static_cast<double>(rate)) + 1.0) +
         std::log(static_cast<double>(tail + 1)) + 1.0;
}

/// One-slot-at-a-time sampling policy: L*(ln r + 1) + (l-L)*ln 2 + ln(t+1) + 1
/// over the decomposition of (T, L).
inline double profit_optsample(std::uint64_t arrivals, std::uint64_t capacity) {
  const Decomposition d = decompose(arrivals, capacity);
  return static_cast<double>(capacity) * (std::log(static_cast<double>(d.rate)) + 1.0) +
         static_cast<double>(d.wide_gaps) * std::numbers::ln2 +
         std::log(static_cast<double>(d.tail + 1)) + 1.0;
}

/// 2 - ln 2 + ln ln 2, the capacity-independent part of the ratio floor.
inline double oracle_ratio_constant() {
  return 2.0 - std::numbers::ln2 + std::log(std::numbers::ln2);
}

/// Lower bound on profit_optsample / profit_oracle for a given capacity.
inline double oracle_ratio_floor(std::uint64_t capacity) {
  const double l = static_cast<double>(capacity);
  return std::min(oracle_ratio_constant(), l / (l + 1.0));
}

struct BoundsFailure {
  std::uint64_t arrivals = 0;
  std::uint64_t capacity = 0;
  std::string what;
};

struct BoundsReport {
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  double worst_ratio = 1.0;  // min of optsample/oracle seen on the grid
  std::optional<BoundsFailure> first_failure;

  bool ok() const { return failures == 0; }
};

/// Grid check of the policy orderings and the oracle ratio bracket:
/// drop-oldest <= optsample, 2-sample <= optsample, and
/// floor(L) <= optsample/oracle <= 1, each with 1e-12 slack.
/// Failures are reported, not thrown.
inline BoundsReport verify_bounds(std::span<const std::uint64_t> capacities,
                                  std::uint64_t max_arrivals) {
  constexpr double kTol = 1e-12;
  BoundsReport report;
  auto record = [&report](std::uint64_t t, std::uint64_t l, const std::string& what) {
    ++report.failures;
    if (!report.first_failure) {
      report.first_failure = BoundsFailure{t, l, what};
    }
  };
  for (const std::uint64_t capacity : capacities) {
    if (capacity == 0 || capacity > max_arrivals) {
      throw std::domain_error("verify_bounds: need 1 <= capacity <= max_arrivals");
    }
    const double floor = oracle_ratio_floor(capacity);
    for (std::uint64_t arrivals = capacity; arrivals <= max_arrivals; ++arrivals) {
      const double opt = profit_optsample(arrivals, capacity);
      const double oldest = profit_drop_oldest(arrivals, capacity);
      const double two = profit_two_sample(arrivals, capacity);
      const double oracle = profit_oracle(arrivals, capacity);
      const double ratio = opt / oracle;
      ++report.checks;
      report.worst_ratio = std::min(report.worst_ratio, ratio);
      if (opt + kTol < oldest) {
        std::ostringstream os;
        os << "optsample " << opt << " below drop-oldest " << oldest;
        record(arrivals, capacity, os.str());
      }
      if (opt + kTol < two) {
        std::ostringstream os;
        os << "optsample " << opt << " below 2-sample " << two;
        record(arrivals, capacity, os.str());
      }
      if (ratio + kTol < floor) {
        std::ostringstream os;
        os << "ratio " << ratio << " below floor " << floor;
        record(arrivals, capacity, os.str());
      }
      if (ratio > 1.0 + kTol) {
        std::ostringstream os;
        os << "ratio " << ratio << " above 1";
        record(arrivals, capacity, os.str());
      }
    }
  }
  return report;
}

}  // namespace optsample
