#pragma once

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <limits>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "optsample/policies.hpp"
#include "optsample/profit.hpp"

namespace optsample {

/// Malformed data on the wire (frame length below the fixed header size).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Connection-level failure; retrying with a fresh connection may succeed.
class ConnectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Frame {
  std::uint64_t seq = 0;
  std::string payload;
};

namespace detail {

constexpr std::size_t kLengthField = 4;
constexpr std::size_t kSeqField = 8;

inline void put_be32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v >> 24));
  out.push_back(static_cast<char>(v >> 16));
  out.push_back(static_cast<char>(v >> 8));
  out.push_back(static_cast<char>(v));
}

inline void put_be64(std::string& out, std::uint64_t v) {
  put_be32(out, static_cast<std::uint32_t>(v >> 32));
  put_be32(out, static_cast<std::uint32_t>(v));
}

inline std::uint32_t get_be32(const unsigned char* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

inline std::uint64_t get_be64(const unsigned char* p) {
  return (std::uint64_t{get_be32(p)} << 32) | get_be32(p + 4);
}

}  // namespace detail

/// Wire format: [length u32 BE][seq u64 BE][payload], where length counts
/// everything after the length field. A frame with an empty payload is an
/// end-of-stream marker carrying the final published sequence number; it is
/// not recorded as a received message.
inline std::string encode_frame(std::uint64_t seq, std::string_view payload) {
  if (seq == 0) {
    throw std::invalid_argument("encode_frame: seq must be >= 1");
  }
  if (payload.size() > std::numeric_limits<std::uint32_t>::max() - detail::kSeqField) {
    throw std::invalid_argument("encode_frame: payload too large");
  }
  std::string out;
  out.reserve(detail::kLengthField + detail::kSeqField + payload.size());
  detail::put_be32(out, static_cast<std::uint32_t>(detail::kSeqField + payload.size()));
  detail::put_be64(out, seq);
  out.append(payload);
  return out;
}

/// Decodes one frame from the front of the buffer. Returns the frame and the
/// number of bytes consumed, or nullopt when more data is needed.
inline std::optional<std::pair<Frame, std::size_t>> decode_frame(std::string_view bytes) {
  if (bytes.size() < detail::kLengthField) {
    return std::nullopt;
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t length = detail::get_be32(p);
  if (length < detail::kSeqField) {
    throw ProtocolError("frame length below minimum");
  }
  if (bytes.size() < detail::kLengthField + length) {
    return std::nullopt;
  }
  Frame frame;
  frame.seq = detail::get_be64(p + detail::kLengthField);
  if (frame.seq == 0) {
    throw ProtocolError("frame seq must be >= 1");
  }
  frame.payload.assign(bytes.substr(detail::kLengthField + detail::kSeqField,
                                    length - detail::kSeqField));
  return std::make_pair(std::move(frame), detail::kLengthField + length);
}

/// Incremental stream decoder for the frame format above.
class FrameDecoder {
 public:
  void feed(std::string_view bytes) { buffer_.append(bytes); }

  std::optional<Frame> next() {
    auto decoded = decode_frame(std::string_view(buffer_).substr(offset_));
    if (!decoded) {
      if (offset_ > 0) {
        buffer_.erase(0, offset_);
        offset_ = 0;
      }
      return std::nullopt;
    }
    offset_ += decoded->second;
    return std::move(decoded->first);
  }

  std::size_t pending_bytes() const { return buffer_.size() - offset_; }

 private:
  std::string buffer_;
  std::size_t offset_ = 0;
};

/// Inclusive interval of arrival counts during which the sender may not
/// transmit. Arrivals keep landing in the policy buffer throughout.
struct DisruptionWindow {
  std::uint64_t first = 0;
  std::uint64_t last = 0;
};

class DisruptionSchedule {
 public:
  DisruptionSchedule() = default;

  explicit DisruptionSchedule(std::vector<DisruptionWindow> windows)
      : windows_(std::move(windows)) {
    std::uint64_t prev_end = 0;
    for (const DisruptionWindow& w : windows_) {
      if (w.first == 0 || w.last < w.first || (prev_end > 0 && w.first <= prev_end)) {
        throw std::invalid_argument(
            "disruption windows must be ordered, disjoint and start at >= 1");
      }
      prev_end = w.last;
    }
  }

  bool blocks(std::uint64_t arrival) const {
    for (const DisruptionWindow& w : windows_) {
      if (arrival >= w.first && arrival <= w.last) {
        return true;
      }
      if (arrival < w.first) {
        break;
      }
    }
    return false;
  }

  const std::vector<DisruptionWindow>& windows() const { return windows_; }

 private:
  std::vector<DisruptionWindow> windows_;
};

struct PublishSummary {
  std::uint64_t published = 0;  // messages offered to the buffer
  std::uint64_t dropped = 0;    // never reached the wire
  std::uint64_t sent = 0;       // data frames written
};

struct ReceiverReport {
  std::vector<std::uint64_t> received_seqs;
  std::uint64_t max_gap = 0;  // largest step between consecutive seqs, counting from 0
  std::uint64_t horizon = 0;  // last published seq when signalled, else last received
  double achieved_profit = 0.0;
};

namespace detail {

class FdGuard {
 public:
  FdGuard() = default;
  explicit FdGuard(int fd) : fd_(fd) {}
  ~FdGuard() { reset(); }
  FdGuard(FdGuard&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  FdGuard& operator=(FdGuard&& other) noexcept {
    reset();
    fd_ = std::exchange(other.fd_, -1);
    return *this;
  }
  FdGuard(const FdGuard&) = delete;
  FdGuard& operator=(const FdGuard&) = delete;

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  void reset() {
    if (fd_ >= 0) {
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_ = -1;
};

inline void send_all(int fd, std::string_view data) {
  std::size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      throw ConnectionError(std::string("send failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(n);
  }
}

inline FdGuard connect_with_retry(const std::string& host, std::uint16_t port,
                                  int attempts = 20) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw ConnectionError("cannot resolve " + host + ":" + service);
  }
  std::string last_error = "no address tried";
  for (int attempt = 0; attempt < attempts; ++attempt) {
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      FdGuard fd(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
      if (!fd.valid()) {
        last_error = std::strerror(errno);
        continue;
      }
      if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
        ::freeaddrinfo(res);
        return fd;
      }
      last_error = std::strerror(errno);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ::freeaddrinfo(res);
  throw ConnectionError("cannot connect to " + host + ":" + service + ": " + last_error);
}

}  // namespace detail

/// Feeds the payloads through the chosen buffer policy and a loopback-style
/// TCP stream. While an arrival is outside every disruption window the sender
/// drains the buffer both before and after the enqueue, so an intact link
/// keeps the buffer empty; inside a window the buffer alone decides what
/// survives. Progress is in arrival-count units and lockstepped between the
/// producer and the sender thread, so runs are deterministic. A final flush
/// plus an end-of-stream marker follows the last arrival.
inline PublishSummary publish(const std::string& host, std::uint16_t port,
                              std::string_view policy_name, std::size_t capacity,
                              const DisruptionSchedule& schedule,
                              std::span<const std::string> payloads) {
  auto policy = make_policy(policy_name, capacity);
  detail::FdGuard socket_fd = detail::connect_with_retry(host, port);

  std::mutex mutex;
  std::condition_variable cv;
  // Two sender phases per arrival i: 2i-1 flushes backlog before the
  // enqueue, 2i forwards the fresh message. Both are no-ops inside a window.
  std::uint64_t announced_phase = 0;
  std::uint64_t done_phase = 0;
  bool finished = false;
  std::uint64_t sent = 0;
  std::exception_ptr sender_error;

  auto drain_and_send = [&](std::unique_lock<std::mutex>& lock) {
    std::string batch;
    while (auto msg = policy->dequeue()) {
      batch += encode_frame(msg->seq, msg->payload);
      ++sent;
    }
    if (!batch.empty()) {
      lock.unlock();
      detail::send_all(socket_fd.get(), batch);
      lock.lock();
    }
  };

  std::thread sender([&] {
    std::unique_lock lock(mutex);
    try {
      while (true) {
        cv.wait(lock, [&] { return announced_phase > done_phase || finished; });
        if (announced_phase > done_phase) {
          const std::uint64_t phase = done_phase + 1;
          const std::uint64_t slot = (phase + 1) / 2;
          if (!schedule.blocks(slot)) {
            drain_and_send(lock);
          }
          done_phase = phase;
          cv.notify_all();
        } else if (finished) {
          drain_and_send(lock);
          return;
        }
      }
    } catch (...) {
      if (!lock.owns_lock()) {
        lock.lock();
      }
      sender_error = std::current_exception();
      done_phase = announced_phase;
      finished = true;
      cv.notify_all();
    }
  });

  PublishSummary summary;
  {
    std::unique_lock lock(mutex);
    auto advance_to = [&](std::uint64_t phase) {
      announced_phase = phase;
      cv.notify_all();
      cv.wait(lock, [&] { return done_phase >= phase || sender_error; });
    };
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      const std::uint64_t slot = i + 1;
      advance_to(2 * slot - 1);
      if (sender_error) {
        break;
      }
      policy->enqueue({slot, payloads[i], {}});
      ++summary.published;
      advance_to(2 * slot);
      if (sender_error) {
        break;
      }
    }
    finished = true;
    cv.notify_all();
  }
  sender.join();
  if (sender_error) {
    std::rethrow_exception(sender_error);
  }

  if (summary.published > 0) {
    detail::send_all(socket_fd.get(), encode_frame(summary.published, {}));
  }
  summary.sent = sent;
  summary.dropped = summary.published - sent;
  return summary;
}

/// Accepts one connection on the loopback interface and decodes frames until
/// the peer closes the stream.
class Subscriber {
 public:
  explicit Subscriber(std::uint16_t port) {
    listen_fd_ = detail::FdGuard(::socket(AF_INET, SOCK_STREAM, 0));
    if (!listen_fd_.valid()) {
      throw ConnectionError(std::string("socket failed: ") + std::strerror(errno));
    }
    const int one = 1;
    ::setsockopt(listen_fd_.get(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(port);
    if (::bind(listen_fd_.get(), reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      throw ConnectionError(std::string("bind failed: ") + std::strerror(errno));
    }
    if (::listen(listen_fd_.get(), 1) != 0) {
      throw ConnectionError(std::string("listen failed: ") + std::strerror(errno));
    }
    socklen_t len = sizeof(addr);
    if (::getsockname(listen_fd_.get(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
      throw ConnectionError(std::string("getsockname failed: ") + std::strerror(errno));
    }
    port_ = ntohs(addr.sin_port);
  }

  std::uint16_t port() const { return port_; }

  ReceiverReport run() {
    detail::FdGuard conn(::accept(listen_fd_.get(), nullptr, nullptr));
    if (!conn.valid()) {
      throw ConnectionError(std::string("accept failed: ") + std::strerror(errno));
    }
    FrameDecoder decoder;
    ReceiverReport report;
    char buf[16384];
    while (true) {
      const ssize_t n = ::recv(conn.get(), buf, sizeof(buf), 0);
      if (n < 0) {
        throw ConnectionError(std::string("recv failed: ") + std::strerror(errno));
      }
      if (n == 0) {
        break;
      }
      decoder.feed(std::string_view(buf, static_cast<std::size_t>(n)));
      while (auto frame = decoder.next()) {
        if (frame->payload.empty()) {
          report.horizon = std::max(report.horizon, frame->seq);
          continue;
        }
        if (!report.received_seqs.empty() && frame->seq <= report.received_seqs.back()) {
          throw ProtocolError("stream seqs must be strictly increasing");
        }
        report.received_seqs.push_back(frame->seq);
      }
    }
    if (!report.received_seqs.empty()) {
      report.horizon = std::max(report.horizon, report.received_seqs.back());
    }
    std::uint64_t prev = 0;
    for (const std::uint64_t seq : report.received_seqs) {
      report.max_gap = std::max(report.max_gap, seq - prev);
      prev = seq;
    }
    report.achieved_profit = profit(SequenceView(report.received_seqs, report.horizon));
    return report;
  }

 private:
  detail::FdGuard listen_fd_;
  std::uint16_t port_ = 0;
};

}  // namespace optsample
