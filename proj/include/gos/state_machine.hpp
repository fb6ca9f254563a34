#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>

namespace gos {

enum class GosNodeState : uint8_t {
  DataForwarding,
  LocalRecoveryRequest,
  BufferAccess,
  LocalRetransmission,
};

enum class GosNodeEvent : uint8_t {
  LossDetected,     // own loss of a privileged packet
  GosReqReceived,   // downstream node asks for a retransmission
  GosAckReceived,   // pending request resolved (ack arrived or escalation died)
  PacketFound,      // buffer search hit
  PacketNotFound,   // buffer search miss
  RetransmitDone,   // locally recovered packet re-forwarded
};

const char* to_string(GosNodeState s);
const char* to_string(GosNodeEvent e);

// The exact transition set of a GoS node; anything else is illegal:
//   DataForwarding       --LossDetected-->    LocalRecoveryRequest
//   LocalRecoveryRequest --GosAckReceived-->  DataForwarding
//   DataForwarding       --GosReqReceived-->  BufferAccess
//   BufferAccess         --PacketFound-->     LocalRetransmission
//   LocalRetransmission  --RetransmitDone-->  DataForwarding
//   BufferAccess         --PacketNotFound-->  LocalRecoveryRequest
std::optional<GosNodeState> gos_transition(GosNodeState from, GosNodeEvent ev);

struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

class GosStateMachine {
 public:
  GosNodeState state() const { return state_; }

  // Throws StateError on an illegal (state, event) pair.
  GosNodeState apply(GosNodeEvent ev);

 private:
  GosNodeState state_ = GosNodeState::DataForwarding;
};

}  // namespace gos
