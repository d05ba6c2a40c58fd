/* Copyright 2026 The ddlring Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef DDL_SOCKET_H_
#define DDL_SOCKET_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "ddl/error.h"

namespace ddl {

using Clock = std::chrono::steady_clock;

// Raised when the rendezvous address cannot be bound.
class AddressInUse : public Error {
 public:
  using Error::Error;
};

// The remote end closed the connection or reset it.
class PeerClosed : public Error {
 public:
  using Error::Error;
};

class Timeout : public Error {
 public:
  using Error::Error;
};

struct Address {
  std::string host;
  std::uint16_t port = 0;

  std::string to_string() const { return host + ":" + std::to_string(port); }
};

// "host:port"; throws InvalidArgument.
Address parse_address(std::string_view text);

// Owns a file descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket() { close(); }
  Socket(Socket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;

  int fd() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  void close();
  void set_nonblocking(bool on) const;

 private:
  int fd_ = -1;
};

Socket listen_tcp(const Address& address, int backlog = 128);
std::uint16_t local_port(const Socket& socket);
// Retries refused connections until the deadline.
Socket connect_tcp(const Address& address, Clock::time_point deadline);
Socket accept_connection(const Socket& listener, Clock::time_point deadline);

// Blocking-style helpers that work on non-blocking sockets via poll().
void write_all(const Socket& socket, std::span<const std::byte> bytes, Clock::time_point deadline);
void read_exact(const Socket& socket, std::span<std::byte> bytes, Clock::time_point deadline);

}  // namespace ddl

#endif  // DDL_SOCKET_H_
