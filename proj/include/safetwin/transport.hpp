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

#ifndef SAFETWIN__TRANSPORT_HPP_
#define SAFETWIN__TRANSPORT_HPP_

#include "safetwin/wire.hpp"

#include <cstdint>
#include <exception>
#include <fstream>
#include <memory>
#include <string>
#include <thread>

namespace safetwin
{

/// The serving side of an exchange: one reply per request.
class MessageHandler
{
public:
  virtual ~MessageHandler() = default;
  virtual SyncMessage handle(const SyncMessage & request) = 0;
};

/// Appends every frame, in both directions, to a file.
class FrameCapture
{
public:
  explicit FrameCapture(const std::string & path);
  void record(const std::string & frame);

private:
  std::string path_;
  std::ofstream out_;
};

/// Requesting side of the lockstep exchange.
class Transport
{
public:
  virtual ~Transport() = default;
  /// Sends one request and blocks for its reply.
  virtual SyncMessage exchange(const SyncMessage & request) = 0;
  void set_capture(std::shared_ptr<FrameCapture> capture) { capture_ = std::move(capture); }

protected:
  std::shared_ptr<FrameCapture> capture_;
};

/// Direct call into the handler on the calling thread.
class InProcessTransport : public Transport
{
public:
  explicit InProcessTransport(MessageHandler & handler) : handler_(handler) {}
  SyncMessage exchange(const SyncMessage & request) override;

private:
  MessageHandler & handler_;
};

struct Endpoint
{
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
};

/// Parses "host:port"; throws ConfigError.
Endpoint parse_endpoint(const std::string & text);

/// Length-prefixed frames over a connected TCP socket.
class StreamTransport : public Transport
{
public:
  /// Connects to a listening server; TransportError on failure.
  static std::unique_ptr<StreamTransport> connect(const Endpoint & endpoint);
  ~StreamTransport() override;
  StreamTransport(const StreamTransport &) = delete;
  StreamTransport & operator=(const StreamTransport &) = delete;

  SyncMessage exchange(const SyncMessage & request) override;

private:
  explicit StreamTransport(int fd) : fd_(fd) {}
  int fd_;
  std::string buffer_;
  std::int64_t last_good_tick_ = -1;
};

/// Serves one client connection on a background thread until SHUTDOWN.
/// Handler exceptions are answered with an ERROR frame and end the session.
class StreamServer
{
public:
  StreamServer(MessageHandler & handler, const Endpoint & endpoint);
  ~StreamServer();
  StreamServer(const StreamServer &) = delete;
  StreamServer & operator=(const StreamServer &) = delete;

  /// Bound endpoint (the real port when 0 was requested).
  Endpoint endpoint() const { return bound_; }
  /// Waits for the session to end; rethrows a handler or socket failure.
  void join();

private:
  void serve();

  MessageHandler & handler_;
  Endpoint bound_;
  int listen_fd_ = -1;
  std::thread thread_;
  std::exception_ptr failure_;
};

}  // namespace safetwin

#endif  // SAFETWIN__TRANSPORT_HPP_
