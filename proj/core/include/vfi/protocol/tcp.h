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

#ifndef VFI_PROTOCOL_TCP_H_
#define VFI_PROTOCOL_TCP_H_

#include <cstdint>
#include <map>
#include <string>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/string_view.h"
#include "vfi/protocol/roles.h"
#include "vfi/protocol/transcript.h"

namespace vfi::protocol {

struct Endpoint {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
};

// Listening address of every role, keyed by sender id.
using AddressBook = std::map<uint16_t, Endpoint>;

// "host:port" -> Endpoint.
absl::StatusOr<Endpoint> ParseEndpoint(absl::string_view text);

// A bound, listening IPv4 socket. Port 0 picks a free port.
class TcpListener {
 public:
  static absl::StatusOr<TcpListener> Bind(const Endpoint& at);
  TcpListener(TcpListener&& other) noexcept;
  TcpListener& operator=(TcpListener&& other) noexcept;
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;
  ~TcpListener();

  uint16_t port() const { return port_; }
  int fd() const { return fd_; }

 private:
  TcpListener(int fd, uint16_t port) : fd_(fd), port_(port) {}
  int fd_ = -1;
  uint16_t port_ = 0;
};

struct TcpOptions {
  // Maximum idle time (no message received) before the role gives up, and
  // the deadline for reaching a peer.
  double timeout_sec = 30.0;
};

// Runs one role to completion: accepts frames on `listener`, connects to the
// peers in `book` as needed, and records every sent message in `transcript`.
// Failures are broadcast to reachable peers as Error messages (fail-stop).
absl::Status RunRoleOverTcp(Role& role, TcpListener listener,
                            const AddressBook& book, Transcript& transcript,
                            const TcpOptions& options = {});

}  // namespace vfi::protocol

#endif  // VFI_PROTOCOL_TCP_H_
