#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oranver/model.hpp"

namespace oranver {

enum class Layer { edge, regional, central };

std::string_view to_string(Layer l);
Layer layer_from_string(std::string_view s);

struct WorkerNode {
  std::string id;
  Layer layer = Layer::edge;
  Capacity capacity;
  double transmission_delay_ms = 0.0;
  ResourceVector allocated;
};

// allocated + footprint <= capacity in every limited dimension.
bool admits(const WorkerNode &node, const ResourceVector &footprint);

// Allocated CPU over CPU capacity; unlimited CPU reports 0.
double node_load(const WorkerNode &node);

using ReplicaId = std::uint64_t;
using RequestId = std::uint64_t;

struct Replica {
  ReplicaId id = 0;
  std::size_t model = 0;
  VersionId version;
  std::size_t node = 0;
  ResourceVector footprint;
  std::deque<RequestId> queue;
  std::optional<RequestId> in_service;
  double spawn_start_ms = 0.0;
  double spawn_complete_ms = 0.0;
  bool ready = false;

  bool busy() const { return in_service.has_value(); }
  bool idle() const { return ready && !busy() && queue.empty(); }
  // Requests waiting or in service.
  std::size_t load() const { return queue.size() + (busy() ? 1 : 0); }
};

struct ScalingAction {
  enum class Kind { none, spawn, remove };
  Kind kind = Kind::none;
  ReplicaId replica = 0; // set for remove

  friend bool operator==(const ScalingAction &, const ScalingAction &) = default;
};

// Worker pool plus the replicas placed on it. Node order is the first-fit
// order. Replica ids increase monotonically and are never reused.
class Cluster {
public:
  explicit Cluster(std::vector<WorkerNode> nodes);

  std::span<const WorkerNode> nodes() const { return nodes_; }
  const WorkerNode &node(std::size_t index) const { return nodes_.at(index); }

  bool admits(std::size_t node, const ResourceVector &footprint) const;
  double node_load(std::size_t node) const;

  // First node admitting `footprint`, without allocating.
  std::optional<std::size_t> first_fit(const ResourceVector &footprint) const;
  // First node admitting `footprint` if replica `replaced` were removed.
  std::optional<std::size_t> first_fit_replacing(ReplicaId replaced, const ResourceVector &footprint) const;
  // First-fit with the allocation applied as a standalone reservation (not
  // tied to a replica). Throws NoCapacity.
  std::size_t place_first_fit(const ResourceVector &footprint);
  void release(std::size_t node, const ResourceVector &footprint);

  // Places a new replica by first-fit; it becomes ready at now + spawn_time.
  // Throws NoCapacity.
  Replica &spawn_replica(std::size_t model, VersionId version, const ResourceVector &footprint, double now_ms,
                         double spawn_time_ms);
  void remove_replica(ReplicaId id);

  Replica &replica(ReplicaId id);
  const Replica &replica(ReplicaId id) const;
  Replica *find_replica(ReplicaId id);
  // Live replicas of `model` in ascending id order.
  const std::vector<ReplicaId> &replicas_of(std::size_t model) const;
  std::size_t replica_count() const { return live_; }

  // Monitoring-based autoscaling rule for one model.
  ScalingAction scaling_decision(std::size_t model, double threshold) const;

  // allocated <= capacity on every node, in every limited dimension.
  bool within_capacity() const;
  // Allocated equals the sum of live replica footprints on every node.
  bool allocation_consistent() const;

private:
  // allocated = reservations + replica footprints summed in id order, so the
  // value never drifts under repeated spawn/remove cycles.
  void recompute_allocation(std::size_t node);

  std::vector<WorkerNode> nodes_;
  std::unordered_map<ReplicaId, Replica> replicas_;
  std::vector<std::vector<ReplicaId>> by_model_;
  std::vector<std::vector<ReplicaId>> by_node_;
  std::vector<ResourceVector> reserved_;
  ReplicaId next_id_ = 1;
  std::size_t live_ = 0;
};

} // namespace oranver
