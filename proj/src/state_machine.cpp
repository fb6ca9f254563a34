#include "gos/state_machine.hpp"

#include <string>

namespace gos {

const char* to_string(GosNodeState s) {
  switch (s) {
    case GosNodeState::DataForwarding: return "DataForwarding";
    case GosNodeState::LocalRecoveryRequest: return "LocalRecoveryRequest";
    case GosNodeState::BufferAccess: return "BufferAccess";
    case GosNodeState::LocalRetransmission: return "LocalRetransmission";
  }
  return "?";
}

const char* to_string(GosNodeEvent e) {
  switch (e) {
    case GosNodeEvent::LossDetected: return "LossDetected";
    case GosNodeEvent::GosReqReceived: return "GosReqReceived";
    case GosNodeEvent::GosAckReceived: return "GosAckReceived";
    case GosNodeEvent::PacketFound: return "PacketFound";
    case GosNodeEvent::PacketNotFound: return "PacketNotFound";
    case GosNodeEvent::RetransmitDone: return "RetransmitDone";
  }
  return "?";
}

std::optional<GosNodeState> gos_transition(GosNodeState from, GosNodeEvent ev) {
  using S = GosNodeState;
  using E = GosNodeEvent;
  switch (from) {
    case S::DataForwarding:
      if (ev == E::LossDetected) return S::LocalRecoveryRequest;
      if (ev == E::GosReqReceived) return S::BufferAccess;
      break;
    case S::LocalRecoveryRequest:
      if (ev == E::GosAckReceived) return S::DataForwarding;
      break;
    case S::BufferAccess:
      if (ev == E::PacketFound) return S::LocalRetransmission;
      if (ev == E::PacketNotFound) return S::LocalRecoveryRequest;
      break;
    case S::LocalRetransmission:
      if (ev == E::RetransmitDone) return S::DataForwarding;
      break;
  }
  return std::nullopt;
}

GosNodeState GosStateMachine::apply(GosNodeEvent ev) {
  const auto next = gos_transition(state_, ev);
  if (!next)
    throw StateError(std::string("illegal transition ") + to_string(state_) + " on " +
                     to_string(ev));
  state_ = *next;
  return state_;
}

}  // namespace gos
