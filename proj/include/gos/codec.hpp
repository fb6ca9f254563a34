#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

namespace gos {

class Rng;

// 16-bit GoS privilege level; 0 means no privilege.
struct GosLevel {
  uint16_t value = 0;
  auto operator<=>(const GosLevel&) const = default;
};

// "0"/"1" string up to 16 chars, zero left-padded.
GosLevel parse_gos_level(std::string_view bits);

struct GosPathObject {
  GosLevel level;
  uint32_t gosp_phop = 0;  // rewritten hop by hop during Path signaling
  bool operator==(const GosPathObject&) const = default;
};

struct GosResvObject {
  GosLevel granted_level;
  bool operator==(const GosResvObject&) const = default;
};

struct GosReqObject {
  uint32_t flow_id = 0;
  uint32_t packet_id = 0;
  bool operator==(const GosReqObject&) const = default;
};

struct GosAckObject {
  uint32_t flow_id = 0;
  uint32_t packet_id = 0;
  bool found = false;
  bool operator==(const GosAckObject&) const = default;
};

struct PathMsg {
  uint32_t session = 0;
  uint32_t hop = 0;
  std::optional<GosPathObject> gos_path;
  bool operator==(const PathMsg&) const = default;
};

struct ResvMsg {
  uint32_t session = 0;
  uint32_t hop = 0;
  std::optional<GosResvObject> gos_resv;
  bool operator==(const ResvMsg&) const = default;
};

struct HelloReq {
  uint32_t src_instance = 0;
  uint32_t dst_instance = 0;
  std::optional<GosReqObject> gos_req;
  bool operator==(const HelloReq&) const = default;
};

struct HelloAck {
  uint32_t src_instance = 0;
  uint32_t dst_instance = 0;
  std::optional<GosAckObject> gos_ack;
  bool operator==(const HelloAck&) const = default;
};

using ControlMessage = std::variant<PathMsg, ResvMsg, HelloReq, HelloAck>;

struct CodecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Wire format. Message header: version_flags(8, version 1 in the high
// nibble), msg_type(8), length(16, whole message). Objects follow as
// {length:16, class_num:8, c_type:8, body}, big-endian; length includes the
// 4-byte object header and is a multiple of 4 (bodies zero-padded).
inline constexpr uint8_t kMsgTypePath = 1;
inline constexpr uint8_t kMsgTypeResv = 2;
inline constexpr uint8_t kMsgTypeHello = 20;

inline constexpr uint8_t kClassSession = 1;    // body: session(32) hop(32)
inline constexpr uint8_t kClassHello = 22;     // body: src(32) dst(32); c_type 1 req, 2 ack
inline constexpr uint8_t kClassGosPath = 248;  // body: level(16) phop(32) pad(16)
inline constexpr uint8_t kClassGosResv = 249;  // body: granted(16) pad(16)
inline constexpr uint8_t kClassGosReq = 250;   // body: flow(32) packet(32)
inline constexpr uint8_t kClassGosAck = 251;   // body: flow(32) packet(32) flags(32), bit0 found

std::vector<uint8_t> encode(const ControlMessage& msg);

struct DecodeResult {
  ControlMessage msg;
  std::vector<uint8_t> skipped_classes;  // unknown object classes, in order
};

// Throws CodecError on framing errors: truncated object, length not a
// multiple of 4, duplicate objects, missing mandatory object, bad version.
DecodeResult decode(std::span<const uint8_t> bytes);

// Uniformly shaped random message; drives round-trip property checks.
ControlMessage random_control_message(Rng& rng);

// Reads every *.hex file under dir, decodes and re-encodes it, and compares
// bytes. Returns the number of failing vectors; diagnostics (with a hex dump
// of the first failure) go to diag.
int verify_golden_dir(const std::string& dir, std::ostream& diag);

}  // namespace gos
