#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "oranver/cluster.hpp"
#include "oranver/policies.hpp"
#include "oranver/record.hpp"
#include "oranver/repository.hpp"

namespace oranver {

struct Horizon {
  // events counts arrivals and departures only, so the simulated span does
  // not depend on how many spawns or releases a policy causes.
  enum class Kind { events, time_ms };
  Kind kind = Kind::events;
  double value = 1e6;
};

struct SimulationSettings {
  CurveSettings curves;
  UpdateTarget update_target = UpdateTarget::latest;
  double scale_threshold = 2.0; // requests per replica
  // mean_interrelease_ms <= 0 spreads max_index releases over the horizon.
  ReleaseSchedule release{ReleaseSchedule::Mode::periodic, 0.0};
  Horizon horizon;
  // Verify capacity and conservation after every event (costs O(replicas)).
  bool check_invariants = false;
  PolicyParams policy;
};

struct SimulationSetup {
  std::vector<WorkerNode> nodes;
  std::vector<ModelClass> models;
  SimulationSettings settings;
};

enum class DecisionKind { update, spawn };

// One policy query. The learning columns are filled when the transition is
// closed by the next request completed on the resulting replica.
struct DecisionLogEntry {
  std::uint64_t seq = 0;
  double time_ms = 0.0;
  std::size_t model = 0;
  ReplicaId replica = 0;   // replica the decision was taken for
  ReplicaId successor = 0; // replica running afterwards (== replica when kept)
  DecisionKind kind = DecisionKind::update;
  VersionId old_version;
  VersionId new_version;
  int action = 0;
  bool forced = false; // update requested but no capacity for the successor
  double node_load = 0.0;
  std::size_t state = 0;
  double epsilon = 0.0;

  bool closed = false;
  double close_time_ms = 0.0;
  RequestId record = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  QUpdate q;
};

struct RunStats {
  std::uint64_t events = 0;         // every processed event
  std::uint64_t request_events = 0; // arrivals and departures
  std::uint64_t arrivals = 0;
  std::uint64_t completions = 0;
  std::uint64_t in_service_at_end = 0;
  std::uint64_t queued_at_end = 0;
  std::uint64_t spawns = 0;
  std::uint64_t removals = 0;
  std::uint64_t updates = 0;
  std::uint64_t forced_keeps = 0;
  std::uint64_t releases = 0;
  std::uint64_t learning_steps = 0;
  std::uint64_t capacity_violations = 0;
  std::uint64_t conservation_violations = 0;
  std::uint64_t time_regressions = 0;
  double end_time_ms = 0.0;
  std::size_t max_replicas = 0;
};

struct RunResult {
  std::vector<RequestRecord> trace;
  std::vector<DecisionLogEntry> log;
  RunStats stats;
};

// Expected events per simulated millisecond (one arrival plus one departure
// per request).
double expected_event_rate(const std::vector<ModelClass> &models);
// Total events the run is expected to process; used for the epsilon schedule.
std::uint64_t scheduled_events(const SimulationSetup &setup);
// Release spacing actually used (derived from the horizon when unset).
double release_interval_ms(const SimulationSetup &setup);

// Shortest queue (waiting plus in service), ties to the lowest id.
ReplicaId dispatch(const Cluster &cluster, std::span<const ReplicaId> replicas);

struct Event {
  enum class Kind { arrival, departure, release, spawn_complete };
  double time_ms = 0.0;
  std::uint64_t seq = 0;
  Kind kind = Kind::arrival;
  std::size_t model = 0;
  ReplicaId replica = 0;
  RequestId request = 0;
  int version = 0;
};

// Min-heap on (time, seq); seq is assigned on push and is unique.
class EventQueue {
public:
  void push(Event e);
  Event pop();
  const Event &top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

private:
  struct Later {
    bool operator()(const Event &a, const Event &b) const {
      return a.time_ms != b.time_ms ? a.time_ms > b.time_ms : a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

class Simulation {
public:
  // Throws InvalidScenario or HorizonZero.
  Simulation(const SimulationSetup &setup, UpdatePolicy &policy, std::uint64_t seed);

  // Processes one event; false once the horizon is reached or nothing is left.
  bool step();
  RunResult run();

  // Update decision for an idle replica whose model has a fresher release.
  // Returns the applied action.
  int update_hook(ReplicaId replica);

  double now() const { return now_; }
  const Cluster &cluster() const { return cluster_; }
  const VersionRepository &repository() const { return repo_; }
  const RunStats &stats() const { return stats_; }
  const std::vector<RequestRecord> &trace() const { return trace_; }
  const std::vector<DecisionLogEntry> &log() const { return log_; }
  const StateEncoder &encoder() const { return encoder_; }
  std::uint64_t total_events() const { return total_events_; }

  // Requests waiting in queues of `model` (not in service).
  std::size_t queued(std::size_t model) const;

private:
  struct Request {
    RequestId id = 0;
    std::size_t model = 0;
    double arrival_ms = 0.0;
    double enqueued_ms = 0.0;
    double spawn_wait_ms = 0.0;
    double service_ms = 0.0;
    VersionId version;
  };
  struct Pending {
    std::size_t state = 0;
    int action = 0;
    std::optional<std::size_t> log_index;
  };

  bool horizon_reached() const;
  void schedule_arrival(std::size_t model);
  void schedule_release(std::size_t model);

  void on_arrival(const Event &e);
  void on_departure(const Event &e);
  void on_release(const Event &e);
  void on_spawn_complete(const Event &e);

  Replica &spawn_for_model(std::size_t model);
  void enqueue(Replica &r, RequestId req);
  void start_service(Replica &r);
  void leave_queue(Request &q, const Replica &r);
  void apply_scaling(std::size_t model);
  void close_pending(ReplicaId replica, const RequestRecord &record);
  std::size_t state_index_for(const Replica &r) const;
  void check_invariants();

  const SimulationSetup &setup_;
  UpdatePolicy &policy_;
  VersionRepository repo_;
  Cluster cluster_;
  StateEncoder encoder_;
  Rng root_;
  std::vector<Rng> arrival_rng_;
  std::vector<Rng> service_rng_;
  std::vector<Rng> release_rng_;
  std::vector<double> budgets_;
  double release_interval_ = 0.0;

  EventQueue events_;
  double now_ = 0.0;
  std::uint64_t total_events_ = 0;
  std::unordered_map<RequestId, Request> requests_;
  RequestId next_request_ = 1;
  std::unordered_map<ReplicaId, Pending> pending_;
  std::vector<std::size_t> queued_;     // per model
  std::vector<std::size_t> in_service_; // per model

  std::vector<RequestRecord> trace_;
  std::vector<DecisionLogEntry> log_;
  RunStats stats_;
};

// Convenience wrapper: build, run to the horizon, return the result.
RunResult simulate(const SimulationSetup &setup, UpdatePolicy &policy, std::uint64_t seed);

// Problems with a setup (empty when valid).
std::vector<std::string> validate_setup(const SimulationSetup &setup);
// Non-fatal findings, e.g. a model no empty node can host.
std::vector<std::string> setup_warnings(const SimulationSetup &setup);

} // namespace oranver
