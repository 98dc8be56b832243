// Copyright 2026 The VFI Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vfi/protocol/tcp.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>
#include <utility>
#include <vector>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "vfi/common/status_macros.h"

namespace vfi::protocol {
namespace {

using Clock = std::chrono::steady_clock;

constexpr int kPollMs = 50;

absl::Status Errno(absl::string_view what) {
  return IoError(absl::StrCat(what, ": ", std::strerror(errno)));
}

absl::StatusOr<sockaddr_in> Resolve(const Endpoint& e) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(e.port);
  const std::string host = e.host == "localhost" ? "127.0.0.1" : e.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    return ConfigError(absl::StrCat("not an IPv4 address: ", e.host));
  }
  return addr;
}

// Reads exactly out.size() bytes unless `stop` is raised or the peer closes.
// Returns false on EOF, error or stop.
bool ReadFull(int fd, std::span<uint8_t> out, const std::atomic<bool>& stop) {
  size_t got = 0;
  while (got < out.size()) {
    pollfd p{fd, POLLIN, 0};
    const int r = poll(&p, 1, kPollMs);
    if (stop.load()) return false;
    if (r < 0 && errno == EINTR) continue;
    if (r < 0) return false;
    if (r == 0) continue;
    const ssize_t n = recv(fd, out.data() + got, out.size() - got, 0);
    if (n <= 0) {
      if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
      return false;
    }
    got += static_cast<size_t>(n);
  }
  return true;
}

bool WriteFull(int fd, std::span<const uint8_t> data) {
  size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n =
        send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) return false;
    sent += static_cast<size_t>(n);
  }
  return true;
}

// Frames (or receive-side framing errors) in arrival order.
class Inbox {
 public:
  void Push(absl::StatusOr<Bytes> item) {
    {
      std::lock_guard<std::mutex> lock(mu_);
      items_.push_back(std::move(item));
    }
    cv_.notify_one();
  }
  // nullopt on timeout.
  std::optional<absl::StatusOr<Bytes>> Pop(Clock::time_point deadline) {
    std::unique_lock<std::mutex> lock(mu_);
    if (!cv_.wait_until(lock, deadline, [&] { return !items_.empty(); })) {
      return std::nullopt;
    }
    auto item = std::move(items_.front());
    items_.pop_front();
    return item;
  }

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<absl::StatusOr<Bytes>> items_;
};

class Node {
 public:
  Node(Role& role, TcpListener listener, const AddressBook& book,
       Transcript& transcript, const TcpOptions& options)
      : role_(role),
        listener_(std::move(listener)),
        book_(book),
        transcript_(transcript),
        options_(options) {}

  ~Node() {
    stop_ = true;
    if (acceptor_.joinable()) acceptor_.join();
    for (auto& t : readers_) t.join();
    for (auto& [id, fd] : out_fds_) {
      shutdown(fd, SHUT_WR);
      close(fd);
    }
    for (int fd : in_fds_) close(fd);
  }

  absl::Status Run() {
    acceptor_ = std::thread([this] { AcceptLoop(); });
    auto start = role_.Start();
    if (!start.ok()) return Fail(start.status());
    VFI_RETURN_IF_ERROR(SendAll(*start));
    while (!role_.done()) {
      const auto deadline =
          Clock::now() + std::chrono::duration_cast<Clock::duration>(
                             std::chrono::duration<double>(options_.timeout_sec));
      auto item = inbox_.Pop(deadline);
      if (!item) {
        return Fail(TimeoutError(absl::StrCat(
            "phase ", PhaseName(role_.phase()), ": ", PartyName(role_.id()),
            " timed out after ", options_.timeout_sec, " s waiting for ",
            absl::StrJoin(role_.WaitingOn(), ", ",
                          [](std::string* o, uint16_t id) {
                            o->append(PartyName(id));
                          }))));
      }
      if (!item->ok()) return Fail(item->status());
      const Bytes& frame = **item;
      const bool peer_error =
          frame.size() > 4 && frame[4] == static_cast<uint8_t>(MsgType::kError);
      auto out = role_.HandleFrame(frame);
      if (!out.ok()) {
        // A peer's Error ends the session without a second broadcast.
        return peer_error ? out.status() : Fail(out.status());
      }
      VFI_RETURN_IF_ERROR(SendAll(*out));
    }
    return absl::OkStatus();
  }

 private:
  absl::Status Fail(const absl::Status& status) {
    for (const Envelope& e : role_.ErrorEnvelopes(status)) {
      (void)Send(e, /*best_effort=*/true);
    }
    return status;
  }

  absl::Status SendAll(const std::vector<Envelope>& out) {
    for (const Envelope& e : out) {
      absl::Status s = Send(e, /*best_effort=*/false);
      if (!s.ok()) return Fail(s);
    }
    return absl::OkStatus();
  }

  absl::Status Send(const Envelope& e, bool best_effort) {
    const Bytes frame = EncodeMessage(e.msg);
    if (!best_effort || e.msg.type == MsgType::kError) {
      transcript_.Record(e.phase, e.msg, e.to, frame.size());
    }
    VFI_ASSIGN_OR_RETURN(int fd, Connect(e.to, best_effort));
    if (!WriteFull(fd, frame)) {
      return IoError(absl::StrCat("lost connection to ", PartyName(e.to)));
    }
    return absl::OkStatus();
  }

  absl::StatusOr<int> Connect(uint16_t peer, bool best_effort) {
    auto it = out_fds_.find(peer);
    if (it != out_fds_.end()) return it->second;
    auto addr_it = book_.find(peer);
    if (addr_it == book_.end()) {
      return ConfigError(absl::StrCat("no address for ", PartyName(peer)));
    }
    VFI_ASSIGN_OR_RETURN(sockaddr_in addr, Resolve(addr_it->second));
    const auto deadline =
        Clock::now() + std::chrono::duration_cast<Clock::duration>(
                           std::chrono::duration<double>(
                               best_effort ? 0.5 : options_.timeout_sec));
    while (true) {
      const int fd = socket(AF_INET, SOCK_STREAM, 0);
      if (fd < 0) return Errno("socket");
      if (connect(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) ==
          0) {
        const int one = 1;
        setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        out_fds_[peer] = fd;
        return fd;
      }
      close(fd);
      if (Clock::now() > deadline) {
        return TimeoutError(absl::StrCat(
            "phase ", PhaseName(role_.phase()), ": could not reach ",
            PartyName(peer), " at ", addr_it->second.host, ":",
            addr_it->second.port));
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(kPollMs));
    }
  }

  void AcceptLoop() {
    while (!stop_.load()) {
      pollfd p{listener_.fd(), POLLIN, 0};
      const int r = poll(&p, 1, kPollMs);
      if (r <= 0) continue;
      const int fd = accept(listener_.fd(), nullptr, nullptr);
      if (fd < 0) continue;
      std::lock_guard<std::mutex> lock(fds_mu_);
      in_fds_.push_back(fd);
      readers_.emplace_back([this, fd] { ReadLoop(fd); });
    }
  }

  void ReadLoop(int fd) {
    while (!stop_.load()) {
      Bytes prefix(4);
      if (!ReadFull(fd, prefix, stop_)) return;
      auto len = FrameLength(prefix);
      if (!len.ok()) {
        inbox_.Push(len.status());
        return;
      }
      Bytes frame(*len);
      std::copy(prefix.begin(), prefix.end(), frame.begin());
      if (!ReadFull(fd, std::span(frame).subspan(4), stop_)) {
        if (!stop_.load()) {
          inbox_.Push(FramingError("connection closed inside a frame"));
        }
        return;
      }
      inbox_.Push(std::move(frame));
    }
  }

  Role& role_;
  TcpListener listener_;
  const AddressBook& book_;
  Transcript& transcript_;
  TcpOptions options_;
  Inbox inbox_;
  std::atomic<bool> stop_{false};
  std::thread acceptor_;
  std::mutex fds_mu_;
  std::vector<std::thread> readers_;
  std::vector<int> in_fds_;
  std::map<uint16_t, int> out_fds_;
};

}  // namespace

absl::StatusOr<Endpoint> ParseEndpoint(absl::string_view text) {
  const size_t colon = text.rfind(':');
  if (colon == absl::string_view::npos) {
    return ConfigError(absl::StrCat("expected host:port, got '", text, "'"));
  }
  Endpoint e;
  e.host = std::string(text.substr(0, colon));
  if (e.host.empty()) {
    return ConfigError(absl::StrCat("missing host in '", text, "'"));
  }
  uint32_t port = 0;
  if (!absl::SimpleAtoi(text.substr(colon + 1), &port) || port > 65535) {
    return ConfigError(absl::StrCat("invalid port in '", text, "'"));
  }
  e.port = static_cast<uint16_t>(port);
  return e;
}

absl::StatusOr<TcpListener> TcpListener::Bind(const Endpoint& at) {
  VFI_ASSIGN_OR_RETURN(sockaddr_in addr, Resolve(at));
  const int fd = socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) return Errno("socket");
  const int one = 1;
  setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (bind(fd, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) != 0) {
    absl::Status s = Errno(absl::StrCat("bind ", at.host, ":", at.port));
    close(fd);
    return s;
  }
  if (listen(fd, 64) != 0) {
    absl::Status s = Errno("listen");
    close(fd);
    return s;
  }
  socklen_t len = sizeof(addr);
  getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  return TcpListener(fd, ntohs(addr.sin_port));
}

TcpListener::TcpListener(TcpListener&& other) noexcept
    : fd_(std::exchange(other.fd_, -1)), port_(other.port_) {}

TcpListener& TcpListener::operator=(TcpListener&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) close(fd_);
    fd_ = std::exchange(other.fd_, -1);
    port_ = other.port_;
  }
  return *this;
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) close(fd_);
}

absl::Status RunRoleOverTcp(Role& role, TcpListener listener,
                            const AddressBook& book, Transcript& transcript,
                            const TcpOptions& options) {
  Node node(role, std::move(listener), book, transcript, options);
  return node.Run();
}

}  // namespace vfi::protocol
