// Copyright 2026 The safetwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "safetwin/transport.hpp"

#include "safetwin/common.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <filesystem>

namespace safetwin
{

namespace
{

std::string errno_text() { return std::strerror(errno); }

void write_all(int fd, const std::string & data)
{
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      throw std::runtime_error("send failed: " + errno_text());
    }
    sent += static_cast<std::size_t>(n);
  }
}

// Reads until `buffer` holds one complete frame; returns it and drops the
// consumed bytes. Returns nullopt on an orderly close before any byte.
std::optional<SyncMessage> read_frame(int fd, std::string & buffer)
{
  char chunk[8192];
  while (true) {
    auto r = decode_message(buffer);
    if (r.complete()) {
      buffer.erase(0, r.consumed);
      return std::move(r.message);
    }
    const auto n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n < 0) {
      throw std::runtime_error("recv failed: " + errno_text());
    }
    if (n == 0) {
      if (buffer.empty()) {
        return std::nullopt;
      }
      throw std::runtime_error("connection closed inside a frame");
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

sockaddr_in resolve(const Endpoint & ep)
{
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(ep.port);
  if (::inet_pton(AF_INET, ep.host.c_str(), &addr.sin_addr) == 1) {
    return addr;
  }
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo * res = nullptr;
  if (::getaddrinfo(ep.host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw ConfigError("cannot resolve host '" + ep.host + "'");
  }
  addr.sin_addr = reinterpret_cast<sockaddr_in *>(res->ai_addr)->sin_addr;
  ::freeaddrinfo(res);
  return addr;
}

void no_delay(int fd)
{
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

}  // namespace

FrameCapture::FrameCapture(const std::string & path) : path_(path)
{
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) {
    throw IoError("cannot open capture file", path);
  }
}

void FrameCapture::record(const std::string & frame)
{
  out_.write(frame.data(), static_cast<std::streamsize>(frame.size()));
  out_.flush();
  if (!out_) {
    throw IoError("cannot write capture file", path_);
  }
}

SyncMessage InProcessTransport::exchange(const SyncMessage & request)
{
  if (capture_) {
    capture_->record(encode_message(request));
  }
  auto reply = handler_.handle(request);
  if (capture_) {
    capture_->record(encode_message(reply));
  }
  return reply;
}

Endpoint parse_endpoint(const std::string & text)
{
  const auto colon = text.rfind(':');
  std::int64_t port = -1;
  if (colon == std::string::npos || colon == 0 || !parse_int(text.substr(colon + 1), port) ||
    port < 0 || port > 65535)
  {
    throw ConfigError("endpoint must be host:port, got '" + text + "'");
  }
  return {text.substr(0, colon), static_cast<std::uint16_t>(port)};
}

std::unique_ptr<StreamTransport> StreamTransport::connect(const Endpoint & endpoint)
{
  const auto addr = resolve(endpoint);
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) {
    throw TransportError("socket: " + errno_text(), -1);
  }
  if (::connect(fd, reinterpret_cast<const sockaddr *>(&addr), sizeof addr) != 0) {
    const auto msg = errno_text();
    ::close(fd);
    throw TransportError(
      "connect to " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " + msg, -1);
  }
  no_delay(fd);
  return std::unique_ptr<StreamTransport>(new StreamTransport(fd));
}

StreamTransport::~StreamTransport()
{
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

SyncMessage StreamTransport::exchange(const SyncMessage & request)
{
  const auto frame = encode_message(request);
  std::optional<SyncMessage> reply;
  try {
    write_all(fd_, frame);
    reply = read_frame(fd_, buffer_);
  } catch (const std::runtime_error & e) {
    if (dynamic_cast<const Error *>(&e)) {
      throw;
    }
    throw TransportError(e.what(), last_good_tick_);
  }
  if (!reply) {
    throw TransportError("peer closed the connection", last_good_tick_);
  }
  if (capture_) {
    capture_->record(frame);
    capture_->record(encode_message(*reply));
  }
  if (reply->kind != MessageKind::error) {
    last_good_tick_ = reply->tick;
  }
  return std::move(*reply);
}

StreamServer::StreamServer(MessageHandler & handler, const Endpoint & endpoint)
: handler_(handler), bound_(endpoint)
{
  const auto addr = resolve(endpoint);
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) {
    throw TransportError("socket: " + errno_text(), -1);
  }
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr *>(&addr), sizeof addr) != 0 ||
    ::listen(listen_fd_, 1) != 0)
  {
    const auto msg = errno_text();
    ::close(listen_fd_);
    throw TransportError("listen on " + endpoint.host + ":" + std::to_string(endpoint.port) + ": " + msg, -1);
  }
  sockaddr_in actual{};
  socklen_t len = sizeof actual;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr *>(&actual), &len);
  bound_.port = ntohs(actual.sin_port);
  thread_ = std::thread([this] {
        try {
          serve();
        } catch (...) {
          failure_ = std::current_exception();
        }
      });
}

StreamServer::~StreamServer()
{
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (thread_.joinable()) {
    thread_.join();
  }
}

void StreamServer::join()
{
  if (thread_.joinable()) {
    thread_.join();
  }
  if (failure_) {
    std::rethrow_exception(std::exchange(failure_, nullptr));
  }
}

void StreamServer::serve()
{
  const int fd = ::accept(listen_fd_, nullptr, nullptr);
  if (fd < 0) {
    throw TransportError("accept: " + errno_text(), -1);
  }
  no_delay(fd);
  std::string buffer;
  std::int64_t tick = -1;
  try {
    while (true) {
      auto request = read_frame(fd, buffer);
      if (!request) {
        break;
      }
      tick = request->tick;
      SyncMessage reply;
      bool fatal = false;
      try {
        reply = handler_.handle(*request);
      } catch (const std::exception & e) {
        reply = SyncMessage::error(tick, e.what());
        fatal = true;
      }
      write_all(fd, encode_message(reply));
      if (fatal || request->kind == MessageKind::shutdown) {
        break;
      }
    }
  } catch (const Error &) {
    ::close(fd);
    throw;
  } catch (const std::exception & e) {
    ::close(fd);
    throw TransportError(std::string("server: ") + e.what(), tick);
  }
  ::close(fd);
}

}  // namespace safetwin
