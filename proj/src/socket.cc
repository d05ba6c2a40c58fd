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

#include "ddl/socket.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>

namespace ddl {

namespace {

std::string errno_text(const char* what) { return std::string(what) + ": " + std::strerror(errno); }

int remaining_ms(Clock::time_point deadline) {
  const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

sockaddr_in resolve(const Address& address) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(address.port);
  const std::string host = address.host.empty() ? "127.0.0.1" : address.host;
  if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) == 1) return addr;
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &found) != 0 || found == nullptr) {
    throw InvalidArgument("cannot resolve host '" + host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in*>(found->ai_addr)->sin_addr;
  freeaddrinfo(found);
  return addr;
}

void wait_for(const Socket& socket, short events, Clock::time_point deadline) {
  pollfd p{socket.fd(), events, 0};
  for (;;) {
    const int ready = ::poll(&p, 1, remaining_ms(deadline));
    if (ready > 0) return;
    if (ready == 0) throw Timeout("timed out waiting for socket");
    if (errno != EINTR) throw Error(errno_text("poll"));
  }
}

}  // namespace

Address parse_address(std::string_view text) {
  const auto colon = text.rfind(':');
  if (colon == std::string_view::npos || colon + 1 == text.size()) {
    throw InvalidArgument("address '" + std::string(text) + "' is not host:port");
  }
  const std::string port_text(text.substr(colon + 1));
  if (port_text.find_first_not_of("0123456789") != std::string::npos || port_text.size() > 5) {
    throw InvalidArgument("bad port in address '" + std::string(text) + "'");
  }
  const unsigned long port = std::stoul(port_text);
  if (port > 65535) throw InvalidArgument("bad port in address '" + std::string(text) + "'");
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    close();
    fd_ = other.fd_;
    other.fd_ = -1;
  }
  return *this;
}

void Socket::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

void Socket::set_nonblocking(bool on) const {
  const int flags = ::fcntl(fd_, F_GETFL, 0);
  ::fcntl(fd_, F_SETFL, on ? (flags | O_NONBLOCK) : (flags & ~O_NONBLOCK));
}

Socket listen_tcp(const Address& address, int backlog) {
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s) throw Error(errno_text("socket"));
  const sockaddr_in addr = resolve(address);
  if (::bind(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) != 0) {
    if (errno == EADDRINUSE) {
      throw AddressInUse("address " + address.to_string() + " is already in use");
    }
    throw Error(errno_text(("bind " + address.to_string()).c_str()));
  }
  if (::listen(s.fd(), backlog) != 0) throw Error(errno_text("listen"));
  s.set_nonblocking(true);
  return s;
}

std::uint16_t local_port(const Socket& socket) {
  sockaddr_in addr{};
  socklen_t len = sizeof addr;
  if (::getsockname(socket.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
    throw Error(errno_text("getsockname"));
  }
  return ntohs(addr.sin_port);
}

Socket connect_tcp(const Address& address, Clock::time_point deadline) {
  const sockaddr_in addr = resolve(address);
  for (;;) {
    Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
    if (!s) throw Error(errno_text("socket"));
    if (::connect(s.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof addr) == 0) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      s.set_nonblocking(true);
      return s;
    }
    if (errno != ECONNREFUSED && errno != EINTR) {
      throw Error(errno_text(("connect " + address.to_string()).c_str()));
    }
    if (Clock::now() >= deadline) {
      throw Timeout("timed out connecting to " + address.to_string());
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(10));
  }
}

Socket accept_connection(const Socket& listener, Clock::time_point deadline) {
  for (;;) {
    Socket s(::accept4(listener.fd(), nullptr, nullptr, SOCK_CLOEXEC));
    if (s) {
      const int one = 1;
      ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
      s.set_nonblocking(true);
      return s;
    }
    if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
      throw Error(errno_text("accept"));
    }
    wait_for(listener, POLLIN, deadline);
  }
}

void write_all(const Socket& socket, std::span<const std::byte> bytes, Clock::time_point deadline) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::send(socket.fd(), bytes.data() + done, bytes.size() - done, MSG_NOSIGNAL);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
    } else if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
      wait_for(socket, POLLOUT, deadline);
    } else if (n < 0 && (errno == EPIPE || errno == ECONNRESET)) {
      throw PeerClosed("connection closed by peer");
    } else if (n < 0 && errno != EINTR) {
      throw Error(errno_text("send"));
    }
  }
}

void read_exact(const Socket& socket, std::span<std::byte> bytes, Clock::time_point deadline) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::recv(socket.fd(), bytes.data() + done, bytes.size() - done, 0);
    if (n > 0) {
      done += static_cast<std::size_t>(n);
    } else if (n == 0 || (n < 0 && errno == ECONNRESET)) {
      throw PeerClosed("connection closed by peer");
    } else if (errno == EAGAIN || errno == EWOULDBLOCK) {
      wait_for(socket, POLLIN, deadline);
    } else if (errno != EINTR) {
      throw Error(errno_text("recv"));
    }
  }
}

}  // namespace ddl
