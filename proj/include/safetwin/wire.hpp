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

#ifndef SAFETWIN__WIRE_HPP_
#define SAFETWIN__WIRE_HPP_

#include "safetwin/ego.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace safetwin
{

// Frame layout: 4-byte big-endian body length, then a text body of
// newline-terminated lines. The first two lines are `kind=<KIND>` and
// `tick=<n>`; the remaining lines are kind-specific records of the form
// `<record> key=value ...`. Floats use the shortest round-trip decimal form,
// so encoding never loses a bit.
//
//   INIT          dt macro=<s> micro=<s>
//                 ego id=<id> lane=<i> length=<m> s=<m> v=<m/s> route=<l1,l2,...>
//   EGO_STATE     ego id=<id> s=<m> v=<m/s> a=<m/s^2>
//   NEIGHBOR_SET  set ego=<id> frozen=<0|1>
//                 nb ego=<id> id=<id> s=<m> v=<m/s> a=<m/s^2> length=<m> frozen=<0|1>
//   SHUTDOWN      (no records)
//   ERROR         message <free text to end of line>

enum class MessageKind { init, ego_state, neighbor_set, shutdown, error };

const char * to_string(MessageKind kind);

struct EgoDescriptor
{
  std::string id;
  int lane = 0;
  double length = 4.5;
  double s = 0.0;  // route arc length
  double v = 0.0;
  std::vector<std::string> route;
  bool operator==(const EgoDescriptor &) const = default;
};

struct InitPayload
{
  double macro_dt = 0.1;
  double micro_dt = 0.001;
  std::vector<EgoDescriptor> egos;
  bool operator==(const InitPayload &) const = default;
};

struct EgoReport
{
  std::string id;
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  bool operator==(const EgoReport &) const = default;
};

struct EgoStatePayload
{
  std::vector<EgoReport> egos;
  bool operator==(const EgoStatePayload &) const = default;
};

struct EgoNeighbors
{
  std::string ego;
  /// The ego crashed at this boundary and must hold still from now on.
  bool frozen = false;
  std::vector<Neighbor> neighbors;
  bool operator==(const EgoNeighbors &) const = default;
};

struct NeighborSetPayload
{
  std::vector<EgoNeighbors> sets;
  bool operator==(const NeighborSetPayload &) const = default;
};

struct ErrorPayload
{
  std::string message;
  bool operator==(const ErrorPayload &) const = default;
};

struct SyncMessage
{
  MessageKind kind = MessageKind::shutdown;
  std::int64_t tick = 0;
  std::variant<std::monostate, InitPayload, EgoStatePayload, NeighborSetPayload, ErrorPayload>
  payload;
  bool operator==(const SyncMessage &) const = default;

  static SyncMessage init(std::int64_t tick, InitPayload p);
  static SyncMessage ego_state(std::int64_t tick, EgoStatePayload p);
  static SyncMessage neighbor_set(std::int64_t tick, NeighborSetPayload p);
  static SyncMessage shutdown(std::int64_t tick);
  static SyncMessage error(std::int64_t tick, std::string message);
};

inline constexpr std::size_t kFrameHeaderSize = 4;
inline constexpr std::size_t kMaxFrameBody = 64u << 20;

/// Body text of a message (no length prefix). Throws ProtocolError if an id
/// cannot be represented (empty, or containing whitespace, '=' or ',').
std::string encode_body(const SyncMessage & msg);
SyncMessage decode_body(std::string_view body);

/// Length-prefixed frame.
std::string encode_message(const SyncMessage & msg);

struct DecodeResult
{
  /// Empty when the buffer does not yet hold a complete frame.
  std::optional<SyncMessage> message;
  /// Bytes consumed from the front of the buffer (0 when incomplete).
  std::size_t consumed = 0;
  bool complete() const { return message.has_value(); }
};

/// Decodes the first frame in `buffer`. An incomplete frame leaves the
/// buffer untouched and returns an empty result; malformed content or an
/// unknown kind throws ProtocolError.
DecodeResult decode_message(std::string_view buffer);

}  // namespace safetwin

#endif  // SAFETWIN__WIRE_HPP_
