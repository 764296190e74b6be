// Copyright 2026 The qgt Authors
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

// Wire format: 4-byte big-endian length, then one UTF-8 JSON object
// {"type", "trial_id", "from", "payload"}.

#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>

#include "qgt/json_io.hpp"
#include "qgt/qcore.hpp"

namespace qgt::netlab {

enum class MessageType {
  Hello,
  Config,
  EprReady,
  MeasOutcome,
  CorrectionApplied,
  TrialResult,
  Shutdown,
  OpRequest,
  OpResult,
  Error,
};

inline const char* to_string(MessageType t) {
  switch (t) {
    case MessageType::Hello: return "HELLO";
    case MessageType::Config: return "CONFIG";
    case MessageType::EprReady: return "EPR_READY";
    case MessageType::MeasOutcome: return "MEAS_OUTCOME";
    case MessageType::CorrectionApplied: return "CORRECTION_APPLIED";
    case MessageType::TrialResult: return "TRIAL_RESULT";
    case MessageType::Shutdown: return "SHUTDOWN";
    case MessageType::OpRequest: return "OP_REQUEST";
    case MessageType::OpResult: return "OP_RESULT";
    case MessageType::Error: return "ERROR";
  }
  return "?";
}

/// Protocol-level failure; `code` is one of permission, ordering, malformed,
/// transport.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

inline MessageType parse_message_type(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(MessageType::Error); ++k) {
    const auto t = static_cast<MessageType>(k);
    if (s == to_string(t)) return t;
  }
  throw ProtocolError("malformed", "unknown message type '" + s + "'");
}

enum class Role { A, B };

inline const char* to_string(Role r) { return r == Role::A ? "A" : "B"; }

inline Role parse_role(const std::string& s) {
  if (s == "A" || s == "a") return Role::A;
  if (s == "B" || s == "b") return Role::B;
  throw std::invalid_argument("role must be A or B");
}

inline Role peer(Role r) { return r == Role::A ? Role::B : Role::A; }

/// A holds qubits 1 and 2, B holds 3 and 4.
inline Labels owned_qubits(Role r) { return r == Role::A ? Labels{1, 2} : Labels{3, 4}; }

inline bool owns(Role r, QubitLabel q) {
  const auto o = owned_qubits(r);
  return q == o[0] || q == o[1];
}

struct WireMessage {
  MessageType type = MessageType::Hello;
  std::uint64_t trial_id = 0;
  std::string from;  // "A", "B" or "C"
  json payload = json::object();

  json to_json() const { return {{"type", to_string(type)}, {"trial_id", trial_id}, {"from", from}, {"payload", payload}}; }

  static WireMessage from_json(const json& j) {
    if (!j.is_object() || !j.contains("type")) throw ProtocolError("malformed", "frame is not a message object");
    WireMessage m;
    m.type = parse_message_type(j.at("type").get<std::string>());
    m.trial_id = j.value("trial_id", std::uint64_t{0});
    m.from = j.value("from", std::string());
    m.payload = j.value("payload", json::object());
    m.validate();
    return m;
  }

  /// MEAS_OUTCOME needs a basis in {Z, X} and a result consistent with it.
  void validate() const {
    if (type == MessageType::MeasOutcome) {
      const auto basis = payload.value("basis", std::string());
      const auto result = payload.value("result", std::string());
      if (basis != "Z" && basis != "X") throw ProtocolError("malformed", "MEAS_OUTCOME basis must be Z or X");
      const bool ok = basis == "Z" ? (result == "0" || result == "1") : (result == "+" || result == "-");
      if (!ok) throw ProtocolError("malformed", "MEAS_OUTCOME result '" + result + "' does not match basis " + basis);
      if (!payload.contains("qubit")) throw ProtocolError("malformed", "MEAS_OUTCOME lacks qubit");
    }
    if (type == MessageType::CorrectionApplied && (!payload.contains("qubit") || !payload.contains("op")))
      throw ProtocolError("malformed", "CORRECTION_APPLIED needs qubit and op");
  }
};

inline constexpr std::uint32_t kMaxFrame = 16U << 20;

inline std::string encode_frame(const WireMessage& m) {
  const std::string body = m.to_json().dump();
  if (body.size() > kMaxFrame) throw ProtocolError("malformed", "frame too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out;
  out.reserve(body.size() + 4);
  out.push_back(static_cast<char>((n >> 24) & 0xFF));
  out.push_back(static_cast<char>((n >> 16) & 0xFF));
  out.push_back(static_cast<char>((n >> 8) & 0xFF));
  out.push_back(static_cast<char>(n & 0xFF));
  out += body;
  return out;
}

/// Incremental frame parser.
class FrameDecoder {
 public:
  void feed(const char* data, std::size_t n) { buf_.append(data, n); }

  std::optional<WireMessage> next() {
    if (buf_.size() < 4) return std::nullopt;
    const auto b = reinterpret_cast<const unsigned char*>(buf_.data());
    const std::uint32_t n = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
    if (n > kMaxFrame) throw ProtocolError("malformed", "frame length exceeds limit");
    if (buf_.size() < 4 + std::size_t{n}) return std::nullopt;
    json j;
    try {
      j = json::parse(buf_.begin() + 4, buf_.begin() + 4 + n);
    } catch (const json::parse_error& e) {
      throw ProtocolError("malformed", std::string("frame is not JSON: ") + e.what());
    }
    buf_.erase(0, 4 + std::size_t{n});
    return WireMessage::from_json(j);
  }

  std::size_t buffered() const { return buf_.size(); }

 private:
  std::string buf_;
};

}  // namespace qgt::netlab
