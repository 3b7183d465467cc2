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

#include "safetwin/wire.hpp"

#include "safetwin/common.hpp"

#include <map>
#include <sstream>

namespace safetwin
{

namespace
{

void check_token(const std::string & s, const char * what)
{
  if (s.empty() || s.find_first_of(" \t\r\n=,") != std::string::npos) {
    throw ProtocolError(std::string(what) + " '" + s + "' cannot be encoded");
  }
}

std::string num(double x) { return format_double(x); }

// One `record key=value ...` line split into its fields.
class Record
{
public:
  Record(std::string_view line, std::size_t line_no) : line_no_(line_no)
  {
    const auto tok = split_ws(line);
    name_ = std::string(tok.at(0));
    for (std::size_t i = 1; i < tok.size(); ++i) {
      const auto eq = tok[i].find('=');
      if (eq == std::string_view::npos) {
        fail("expected key=value, got '" + std::string(tok[i]) + "'");
      }
      fields_[std::string(tok[i].substr(0, eq))] = std::string(tok[i].substr(eq + 1));
    }
  }

  const std::string & name() const { return name_; }

  const std::string & text(const std::string & key) const
  {
    auto it = fields_.find(key);
    if (it == fields_.end()) {
      fail("missing field '" + key + "'");
    }
    return it->second;
  }

  double number(const std::string & key) const
  {
    double v = 0.0;
    if (!parse_double(text(key), v)) {
      fail("field '" + key + "' is not a number");
    }
    return v;
  }

  std::int64_t integer(const std::string & key) const
  {
    std::int64_t v = 0;
    if (!parse_int(text(key), v)) {
      fail("field '" + key + "' is not an integer");
    }
    return v;
  }

  bool flag(const std::string & key) const
  {
    const auto & t = text(key);
    if (t != "0" && t != "1") {
      fail("field '" + key + "' must be 0 or 1");
    }
    return t == "1";
  }

  [[noreturn]] void fail(const std::string & msg) const
  {
    throw ProtocolError("line " + std::to_string(line_no_) + ": " + msg);
  }

private:
  std::size_t line_no_;
  std::string name_;
  std::map<std::string, std::string> fields_;
};

MessageKind parse_kind(std::string_view s)
{
  if (s == "INIT") {
    return MessageKind::init;
  }
  if (s == "EGO_STATE") {
    return MessageKind::ego_state;
  }
  if (s == "NEIGHBOR_SET") {
    return MessageKind::neighbor_set;
  }
  if (s == "SHUTDOWN") {
    return MessageKind::shutdown;
  }
  if (s == "ERROR") {
    return MessageKind::error;
  }
  throw ProtocolError("unknown message kind '" + std::string(s) + "'");
}

std::string header_value(std::string_view line, std::string_view key)
{
  if (line.substr(0, key.size()) != key || line.size() <= key.size() || line[key.size()] != '=') {
    throw ProtocolError("expected '" + std::string(key) + "=' header line");
  }
  return std::string(line.substr(key.size() + 1));
}

}  // namespace

const char * to_string(MessageKind kind)
{
  switch (kind) {
    case MessageKind::init:
      return "INIT";
    case MessageKind::ego_state:
      return "EGO_STATE";
    case MessageKind::neighbor_set:
      return "NEIGHBOR_SET";
    case MessageKind::shutdown:
      return "SHUTDOWN";
    case MessageKind::error:
      return "ERROR";
  }
  return "ERROR";
}

SyncMessage SyncMessage::init(std::int64_t tick, InitPayload p)
{
  return {MessageKind::init, tick, std::move(p)};
}
SyncMessage SyncMessage::ego_state(std::int64_t tick, EgoStatePayload p)
{
  return {MessageKind::ego_state, tick, std::move(p)};
}
SyncMessage SyncMessage::neighbor_set(std::int64_t tick, NeighborSetPayload p)
{
  return {MessageKind::neighbor_set, tick, std::move(p)};
}
SyncMessage SyncMessage::shutdown(std::int64_t tick) { return {MessageKind::shutdown, tick, {}}; }
SyncMessage SyncMessage::error(std::int64_t tick, std::string message)
{
  return {MessageKind::error, tick, ErrorPayload{std::move(message)}};
}

std::string encode_body(const SyncMessage & msg)
{
  std::ostringstream out;
  out << "kind=" << to_string(msg.kind) << "\ntick=" << msg.tick << '\n';
  switch (msg.kind) {
    case MessageKind::init: {
        const auto & p = std::get<InitPayload>(msg.payload);
        out << "dt macro=" << num(p.macro_dt) << " micro=" << num(p.micro_dt) << '\n';
        for (const auto & e : p.egos) {
          check_token(e.id, "ego id");
          out << "ego id=" << e.id << " lane=" << e.lane << " length=" << num(e.length)
              << " s=" << num(e.s) << " v=" << num(e.v) << " route=";
          for (std::size_t i = 0; i < e.route.size(); ++i) {
            check_token(e.route[i], "link id");
            out << (i ? "," : "") << e.route[i];
          }
          out << '\n';
        }
        break;
      }
    case MessageKind::ego_state:
      for (const auto & e : std::get<EgoStatePayload>(msg.payload).egos) {
        check_token(e.id, "ego id");
        out << "ego id=" << e.id << " s=" << num(e.s) << " v=" << num(e.v) << " a=" << num(e.a)
            << '\n';
      }
      break;
    case MessageKind::neighbor_set:
      for (const auto & set : std::get<NeighborSetPayload>(msg.payload).sets) {
        check_token(set.ego, "ego id");
        out << "set ego=" << set.ego << " frozen=" << (set.frozen ? 1 : 0) << '\n';
        for (const auto & n : set.neighbors) {
          check_token(n.id, "neighbor id");
          out << "nb ego=" << set.ego << " id=" << n.id << " s=" << num(n.route_s)
              << " v=" << num(n.v) << " a=" << num(n.a) << " length=" << num(n.length)
              << " frozen=" << (n.frozen ? 1 : 0) << '\n';
        }
      }
      break;
    case MessageKind::shutdown:
      break;
    case MessageKind::error: {
        auto text = std::get<ErrorPayload>(msg.payload).message;
        for (auto & c : text) {
          c = (c == '\n' || c == '\r') ? ' ' : c;
        }
        out << "message " << text << '\n';
        break;
      }
  }
  return out.str();
}

SyncMessage decode_body(std::string_view body)
{
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) {
      throw ProtocolError("body does not end with a newline");
    }
    lines.push_back(body.substr(start, end - start));
    start = end + 1;
  }
  if (lines.size() < 2) {
    throw ProtocolError("missing kind/tick header");
  }
  SyncMessage msg;
  msg.kind = parse_kind(header_value(lines[0], "kind"));
  if (!parse_int(header_value(lines[1], "tick"), msg.tick)) {
    throw ProtocolError("tick is not an integer");
  }
  auto records = [&](auto && each) {
      for (std::size_t i = 2; i < lines.size(); ++i) {
        if (split_ws(lines[i]).empty()) {
          throw ProtocolError("empty record line");
        }
        each(Record(lines[i], i + 1));
      }
    };
  switch (msg.kind) {
    case MessageKind::init: {
        InitPayload p;
        bool saw_dt = false;
        records([&](const Record & r) {
          if (r.name() == "dt") {
            p.macro_dt = r.number("macro");
            p.micro_dt = r.number("micro");
            saw_dt = true;
          } else if (r.name() == "ego") {
            EgoDescriptor e;
            e.id = r.text("id");
            e.lane = static_cast<int>(r.integer("lane"));
            e.length = r.number("length");
            e.s = r.number("s");
            e.v = r.number("v");
            e.route = split(r.text("route"), ',');
            p.egos.push_back(std::move(e));
          } else {
            r.fail("unexpected record '" + r.name() + "' in INIT");
          }
        });
        if (!saw_dt) {
          throw ProtocolError("INIT without dt record");
        }
        msg.payload = std::move(p);
        break;
      }
    case MessageKind::ego_state: {
        EgoStatePayload p;
        records([&](const Record & r) {
          if (r.name() != "ego") {
            r.fail("unexpected record '" + r.name() + "' in EGO_STATE");
          }
          p.egos.push_back({r.text("id"), r.number("s"), r.number("v"), r.number("a")});
        });
        msg.payload = std::move(p);
        break;
      }
    case MessageKind::neighbor_set: {
        NeighborSetPayload p;
        records([&](const Record & r) {
          if (r.name() == "set") {
            p.sets.push_back({r.text("ego"), r.flag("frozen"), {}});
          } else if (r.name() == "nb") {
            if (p.sets.empty() || p.sets.back().ego != r.text("ego")) {
              r.fail("neighbor record outside its set");
            }
            p.sets.back().neighbors.push_back(
              {r.text("id"), r.number("s"), r.number("v"), r.number("a"), r.number("length"),
                r.flag("frozen")});
          } else {
            r.fail("unexpected record '" + r.name() + "' in NEIGHBOR_SET");
          }
        });
        msg.payload = std::move(p);
        break;
      }
    case MessageKind::shutdown:
      if (lines.size() != 2) {
        throw ProtocolError("SHUTDOWN carries no records");
      }
      break;
    case MessageKind::error: {
        ErrorPayload p;
        if (lines.size() == 3 && lines[2].substr(0, 8) == "message ") {
          p.message = std::string(lines[2].substr(8));
        } else if (lines.size() != 2) {
          throw ProtocolError("malformed ERROR body");
        }
        msg.payload = std::move(p);
        break;
      }
  }
  return msg;
}

std::string encode_message(const SyncMessage & msg)
{
  const auto body = encode_body(msg);
  if (body.size() > kMaxFrameBody) {
    throw ProtocolError("message exceeds the maximum frame size");
  }
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string frame;
  frame.reserve(kFrameHeaderSize + body.size());
  frame.push_back(static_cast<char>((n >> 24) & 0xFF));
  frame.push_back(static_cast<char>((n >> 16) & 0xFF));
  frame.push_back(static_cast<char>((n >> 8) & 0xFF));
  frame.push_back(static_cast<char>(n & 0xFF));
  frame += body;
  return frame;
}

DecodeResult decode_message(std::string_view buffer)
{
  if (buffer.size() < kFrameHeaderSize) {
    return {};
  }
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < kFrameHeaderSize; ++i) {
    n = (n << 8) | static_cast<unsigned char>(buffer[i]);
  }
  if (n > kMaxFrameBody) {
    throw ProtocolError("frame length " + std::to_string(n) + " exceeds the limit");
  }
  if (buffer.size() < kFrameHeaderSize + n) {
    return {};
  }
  return {decode_body(buffer.substr(kFrameHeaderSize, n)), kFrameHeaderSize + n};
}

}  // namespace safetwin
