#include "aes/rejection.hpp"

namespace aes {

const char* to_string(RejectReason r) {
  switch (r) {
    case RejectReason::NecessityViolated: return "NecessityViolated";
    case RejectReason::NoWitness: return "NoWitness";
    case RejectReason::ProfilePrecondition: return "ProfilePrecondition";
    case RejectReason::ConditionViolated: return "ConditionViolated";
  }
  return "?";
}

}  // namespace aes
