#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "oranver/simulator.hpp"

namespace oranver {

// Names used to print model and node indices.
struct TraceNames {
  std::vector<std::string> models;
  std::vector<AppClass> app_classes;
  std::vector<std::string> nodes;

  static TraceNames from(const SimulationSetup &setup);
  std::size_t model_index(const std::string &id) const;
  std::size_t node_index(const std::string &id) const;
};

// Trace CSV columns, in order:
//   id, model, app_class, arrival_ms, departure_ms, node, replica, version,
//   version_xy, tau_p, tau_I, tau_t, tau_s, tau_q, total, accuracy, stability
// Reals are printed in shortest round-trip form, so reading a trace back
// yields the exact in-memory values.
extern const char *const kTraceHeader;
void write_trace(std::ostream &out, std::span<const RequestRecord> trace, const TraceNames &names,
                 const VersionScheme &scheme);
// Streams records to `sink`; throws ParseError with the line number.
void read_trace(std::istream &in, const TraceNames &names, const std::function<void(const RequestRecord &)> &sink);
std::vector<RequestRecord> read_trace(std::istream &in, const TraceNames &names);

// Decision log CSV columns, in order:
//   seq, time_ms, model, kind, replica, successor, old_version, new_version,
//   action, forced, node_load, state, epsilon, closed, close_time_ms, record,
//   reward, next_state, q_before, max_next, q_after
extern const char *const kDecisionLogHeader;
void write_decision_log(std::ostream &out, std::span<const DecisionLogEntry> log, const TraceNames &names);
std::vector<DecisionLogEntry> read_decision_log(std::istream &in, const TraceNames &names);

} // namespace oranver
