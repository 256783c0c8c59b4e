#pragma once

#include <cstdint>

#include "oranver/cluster.hpp"
#include "oranver/version.hpp"

namespace oranver {

// One completed inference request with its delay decomposition
// total = tau_p + tau_I + tau_t + tau_s + tau_q.
struct RequestRecord {
  RequestId id = 0;
  std::size_t model = 0;
  double arrival_ms = 0.0;
  double departure_ms = 0.0;
  std::size_t node = 0;
  ReplicaId replica = 0;
  VersionId served_version;
  double tau_p = 0.0; // RIC processing
  double tau_I = 0.0; // inference
  double tau_t = 0.0; // transmission
  double tau_s = 0.0; // spawn
  double tau_q = 0.0; // queueing
  double total = 0.0;
  double accuracy = 0.0;
  double stability = 0.0;
};

// Fills tau_q as the part of (departure - arrival) not covered by the other
// components, floored at 0, and total as the component sum.
inline void finish_delays(RequestRecord &r) {
  const double rest = r.departure_ms - r.arrival_ms - (r.tau_t + r.tau_s + r.tau_p + r.tau_I);
  r.tau_q = rest > 0.0 ? rest : 0.0;
  r.total = r.tau_p + r.tau_I + r.tau_t + r.tau_s + r.tau_q;
}

} // namespace oranver
