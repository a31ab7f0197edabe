#pragma once

#include <cassert>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "optsample/profit.hpp"

namespace optsample {

struct MessageRecord {
  std::uint64_t seq = 0;
  std::string payload;
  std::chrono::steady_clock::time_point enqueued_at{};
};

/// Result of offering one message to a policy. A rejected arrival was never
/// stored; dropped_seq names a previously buffered message evicted to make
/// room (at most one per enqueue — bulk resampling inside 2-sample reports
/// no individual victim and shows up through contents()/rate() instead).
struct EnqueueOutcome {
  bool admitted = false;
  std::optional<std::uint64_t> dropped_seq;
};

/// Common surface of the online buffer policies. Arrivals must carry
/// strictly increasing sequence numbers starting at 1; the buffer never
/// holds more than its capacity. Instances are not internally synchronized.
class BufferPolicy {
 public:
  explicit BufferPolicy(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) {
      throw std::invalid_argument("buffer capacity must be >= 1");
    }
  }
  virtual ~BufferPolicy() = default;

  BufferPolicy(const BufferPolicy&) = delete;
  BufferPolicy& operator=(const BufferPolicy&) = delete;

  EnqueueOutcome enqueue(MessageRecord msg) {
    if (msg.seq == 0) {
      throw std::invalid_argument("message sequence numbers start at 1");
    }
    if (msg.seq <= last_seq_) {
      throw std::logic_error("arrivals must have strictly increasing sequence numbers");
    }
    last_seq_ = msg.seq;
    msg.enqueued_at = std::chrono::steady_clock::now();
    EnqueueOutcome outcome = admit(std::move(msg));
    assert(kept_.size() <= capacity_);
    if (!outcome.admitted || outcome.dropped_seq) {
      ++dropped_total_;
    }
    return outcome;
  }

  /// Removes and returns the oldest buffered message, if any.
  virtual std::optional<MessageRecord> dequeue() {
    if (kept_.empty()) {
      return std::nullopt;
    }
    MessageRecord front = std::move(kept_.front());
    kept_.pop_front();
    return front;
  }

  /// Snapshot of buffered sequence numbers for profit scoring.
  SequenceView contents(std::uint64_t horizon) const {
    std::vector<std::uint64_t> seqs;
    seqs.reserve(kept_.size());
    for (const MessageRecord& m : kept_) {
      seqs.push_back(m.seq);
    }
    return SequenceView(std::move(seqs), horizon);
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return kept_.size(); }
  bool full() const { return kept_.size() == capacity_; }

  /// Current admission stride; only multiples of the rate are let in.
  virtual std::uint64_t rate() const { return 1; }

  /// Messages that arrived but will never reach a consumer: rejected
  /// arrivals plus evicted or resampled-away buffer entries.
  std::uint64_t dropped_total() const { return dropped_total_; }

  virtual std::string_view name() const = 0;

 protected:
  virtual EnqueueOutcome admit(MessageRecord msg) = 0;

  void note_bulk_drop(std::size_t count) { dropped_total_ += count; }

  std::size_t capacity_;
  std::deque<MessageRecord> kept_;

 private:
  std::uint64_t last_seq_ = 0;
  std::uint64_t dropped_total_ = 0;
};

/// Evict the oldest message on overflow; keeps the newest L arrivals.
class DropOldestPolicy final : public BufferPolicy {
 public:
  using BufferPolicy::BufferPolicy;

  std::string_view name() const override { return "drop-oldest"; }

 protected:
  EnqueueOutcome admit(MessageRecord msg) override {
    EnqueueOutcome outcome{true, std::nullopt};
    if (full()) {
      outcome.dropped_seq = kept_.front().seq;
      kept_.pop_front();
    }
    kept_.push_back(std::move(msg));
    return outcome;
  }
};

/// Admit every delta-th message; when the buffer fills, keep only every
/// delta-th buffered message and multiply the rate by delta. With delta = 2
/// this is the 2-sample policy: half the buffer empties at each resample.
class DeltaSamplePolicy final : public BufferPolicy {
 public:
  explicit DeltaSamplePolicy(std::size_t capacity, std::uint64_t delta = 2)
      : BufferPolicy(capacity), delta_(delta) {
    if (delta < 2) {
      throw std::invalid_argument("delta-sample requires delta >= 2");
    }
  }

  std::uint64_t rate() const override { return rate_; }
  std::uint64_t delta() const { return delta_; }

  std::string_view name() const override {
    return delta_ == 2 ? "2-sample" : "delta-sample";
  }

 protected:
  EnqueueOutcome admit(MessageRecord msg) override {
    if (msg.seq % rate_ != 0) {
      return {false, std::nullopt};
    }
    if (full()) {
      resample();
    }
    if (!full() && msg.seq % rate_ == 0) {
      kept_.push_back(std::move(msg));
      return {true, std::nullopt};
    }
    return {false, std::nullopt};
  }

 private:
  void resample() {
    const std::uint64_t coarser = rate_ * delta_;
    const std::size_t before = kept_.size();
    std::erase_if(kept_, [coarser](const MessageRecord& m) { return m.seq % coarser != 0; });
    note_bulk_drop(before - kept_.size());
    rate_ = coarser;
  }

  std::uint64_t delta_;
  std::uint64_t rate_ = 1;
};

/// Uniform sampling with a sweeping discard cursor. On overflow the message
/// under the cursor is evicted, widening one gap to 2r; when the cursor
/// reaches the end of the buffer the rate doubles and the sweep restarts.
/// After a drain the next arrival halves the rate once so density recovers.
class OptSamplePolicy final : public BufferPolicy {
 public:
  using BufferPolicy::BufferPolicy;

  std::uint64_t rate() const override { return rate_; }
  std::size_t cursor() const { return cursor_; }

  std::string_view name() const override { return "optsample"; }

  std::optional<MessageRecord> dequeue() override {
    const bool was_full = full();
    std::optional<MessageRecord> front = BufferPolicy::dequeue();
    if (front) {
      if (was_full) {
        recovery_armed_ = true;
      }
      if (cursor_ > 0) {
        --cursor_;
      }
    }
    return front;
  }

 protected:
  EnqueueOutcome admit(MessageRecord msg) override {
    if (!full()) {
      if (recovery_armed_) {
        if (rate_ > 1) {
          rate_ /= 2;
          cursor_ = 0;
        }
        recovery_armed_ = false;
      }
      if (msg.seq % rate_ != 0) {
        return {false, std::nullopt};
      }
      kept_.push_back(std::move(msg));
      return {true, std::nullopt};
    }
    if (msg.seq % rate_ != 0) {
      return {false, std::nullopt};
    }
    assert(cursor_ < kept_.size());
    const std::uint64_t evicted = kept_[cursor_].seq;
    kept_.erase(kept_.begin() + static_cast<std::ptrdiff_t>(cursor_));
    kept_.push_back(std::move(msg));
    ++cursor_;
    if (cursor_ == capacity_) {
      rate_ *= 2;
      cursor_ = 0;
    }
    return {true, evicted};
  }

 private:
  std::uint64_t rate_ = 1;
  std::size_t cursor_ = 0;
  bool recovery_armed_ = false;
};

/// Factory over the wire-level policy names.
inline std::unique_ptr<BufferPolicy> make_policy(std::string_view name,
                                                 std::size_t capacity) {
  if (name == "drop-oldest") {
    return std::make_unique<DropOldestPolicy>(capacity);
  }
  if (name == "2-sample") {
    return std::make_unique<DeltaSamplePolicy>(capacity, 2);
  }
  if (name == "optsample") {
    return std::make_unique<OptSamplePolicy>(capacity);
  }
  throw std::invalid_argument("unknown policy: " + std::string(name));
}

/// The offline optimum: L messages evenly spaced with stride (T+1)/(L+1),
/// rounded half-up, with duplicates bumped to keep the sequence strictly
/// increasing. Infeasible online — it "re-finds" discarded messages — but
/// it is the reference every policy is scored against.
inline SequenceView oracle_sequence(std::uint64_t arrivals, std::uint64_t capacity) {
  if (capacity == 0 || arrivals < capacity) {
    throw std::domain_error("oracle_sequence requires arrivals >= capacity >= 1");
  }
  std::vector<std::uint64_t> members;
  members.reserve(capacity);
  for (std::uint64_t i = 1; i <= capacity; ++i) {
    // round(i * (T+1) / (L+1)) computed exactly in integers
    std::uint64_t a = (2 * i * (arrivals + 1) + (capacity + 1)) / (2 * (capacity + 1));
    if (!members.empty() && a <= members.back()) {
      a = members.back() + 1;
    }
    members.push_back(a);
  }
  return SequenceView(std::move(members), arrivals);
}

}  // namespace optsample
