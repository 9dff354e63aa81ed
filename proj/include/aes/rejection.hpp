#pragma once

#include <string>

namespace aes {

enum class RejectReason {
  NecessityViolated,    // A + sum B_l is not Hurwitz / Schur: no witness can exist
  NoWitness,            // witness search failed for the comparison matrix
  ProfilePrecondition,  // supplied xi does not satisfy the strict inequality at rate 0 (resp. 1)
  ConditionViolated     // the checked inequality fails at the requested rate
};

const char* to_string(RejectReason r);

/// Why a certifier declined to issue a certificate. A value, not an error.
struct Rejection {
  RejectReason reason;
  std::string detail;
  double spectral_value = 0.0;  // abscissa/radius when relevant, else 0
};

}  // namespace aes
