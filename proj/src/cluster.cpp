#include "oranver/cluster.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "oranver/errors.hpp"

namespace oranver {

std::string_view to_string(Layer l) {
  switch (l) {
  case Layer::edge:
    return "edge";
  case Layer::regional:
    return "regional";
  case Layer::central:
    return "central";
  }
  return "?";
}

Layer layer_from_string(std::string_view s) {
  if (s == "edge")
    return Layer::edge;
  if (s == "regional")
    return Layer::regional;
  if (s == "central")
    return Layer::central;
  throw ParseError(fmt::format("unknown layer '{}'", s));
}

bool admits(const WorkerNode &node, const ResourceVector &footprint) {
  return node.capacity.fits(node.allocated + footprint);
}

double node_load(const WorkerNode &node) {
  if (!node.capacity.cpu || *node.capacity.cpu <= 0)
    return 0.0;
  return static_cast<double>(node.allocated.cpu) / *node.capacity.cpu;
}

Cluster::Cluster(std::vector<WorkerNode> nodes)
    : nodes_(std::move(nodes)), by_node_(nodes_.size()), reserved_(nodes_.size()) {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    reserved_[i] = nodes_[i].allocated;
}

void Cluster::recompute_allocation(std::size_t node) {
  ResourceVector sum = reserved_[node];
  for (ReplicaId id : by_node_[node])
    sum += replicas_.at(id).footprint;
  nodes_[node].allocated = sum;
}

bool Cluster::admits(std::size_t node, const ResourceVector &footprint) const {
  return oranver::admits(nodes_.at(node), footprint);
}

double Cluster::node_load(std::size_t node) const { return oranver::node_load(nodes_.at(node)); }

std::optional<std::size_t> Cluster::first_fit(const ResourceVector &footprint) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (oranver::admits(nodes_[i], footprint))
      return i;
  return std::nullopt;
}

std::optional<std::size_t> Cluster::first_fit_replacing(ReplicaId replaced,
                                                        const ResourceVector &footprint) const {
  const Replica &old = replica(replaced);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    ResourceVector demand = nodes_[i].allocated + footprint;
    if (i == old.node)
      demand -= old.footprint;
    if (nodes_[i].capacity.fits(demand))
      return i;
  }
  return std::nullopt;
}

std::size_t Cluster::place_first_fit(const ResourceVector &footprint) {
  auto node = first_fit(footprint);
  if (!node)
    throw NoCapacity(fmt::format("no node admits footprint (cpu={}, ram={}, disk={})", footprint.cpu,
                                 footprint.ram, footprint.disk));
  reserved_[*node] += footprint;
  recompute_allocation(*node);
  return *node;
}

void Cluster::release(std::size_t node, const ResourceVector &footprint) {
  reserved_.at(node) -= footprint;
  recompute_allocation(node);
}

Replica &Cluster::spawn_replica(std::size_t model, VersionId version, const ResourceVector &footprint,
                                double now_ms, double spawn_time_ms) {
  const auto placed = first_fit(footprint);
  if (!placed)
    throw NoCapacity(fmt::format("no node admits a replica of model {} (cpu={}, ram={}, disk={})", model,
                                 footprint.cpu, footprint.ram, footprint.disk));
  const std::size_t node = *placed;
  Replica r;
  r.id = next_id_++;
  r.model = model;
  r.version = version;
  r.node = node;
  r.footprint = footprint;
  r.spawn_start_ms = now_ms;
  r.spawn_complete_ms = now_ms + spawn_time_ms;
  r.ready = false;
  if (by_model_.size() <= model)
    by_model_.resize(model + 1);
  by_model_[model].push_back(r.id);
  by_node_[node].push_back(r.id);
  ++live_;
  // Appending in id order keeps the incremental sum identical to a recompute.
  nodes_[node].allocated += footprint;
  return replicas_.emplace(r.id, std::move(r)).first->second;
}

void Cluster::remove_replica(ReplicaId id) {
  auto it = replicas_.find(id);
  if (it == replicas_.end())
    throw Error(fmt::format("remove of unknown replica {}", id));
  const std::size_t node = it->second.node;
  auto &ids = by_model_[it->second.model];
  ids.erase(std::find(ids.begin(), ids.end(), id));
  auto &on_node = by_node_[node];
  on_node.erase(std::find(on_node.begin(), on_node.end(), id));
  replicas_.erase(it);
  --live_;
  recompute_allocation(node);
}

Replica &Cluster::replica(ReplicaId id) {
  auto *r = find_replica(id);
  if (!r)
    throw Error(fmt::format("unknown replica {}", id));
  return *r;
}

const Replica &Cluster::replica(ReplicaId id) const { return const_cast<Cluster *>(this)->replica(id); }

Replica *Cluster::find_replica(ReplicaId id) {
  auto it = replicas_.find(id);
  return it == replicas_.end() ? nullptr : &it->second;
}

const std::vector<ReplicaId> &Cluster::replicas_of(std::size_t model) const {
  static const std::vector<ReplicaId> none;
  return model < by_model_.size() ? by_model_[model] : none;
}

ScalingAction Cluster::scaling_decision(std::size_t model, double threshold) const {
  const auto &ids = replicas_of(model);
  if (ids.empty())
    return {};
  std::size_t pending = 0;
  for (ReplicaId id : ids)
    pending += replicas_.at(id).load();
  if (static_cast<double>(pending) / static_cast<double>(ids.size()) > threshold)
    return {ScalingAction::Kind::spawn, 0};
  if (ids.size() >= 2) {
    // Newest idle replica goes first.
    for (auto it = ids.rbegin(); it != ids.rend(); ++it)
      if (replicas_.at(*it).idle())
        return {ScalingAction::Kind::remove, *it};
  }
  return {};
}

bool Cluster::within_capacity() const {
  return std::all_of(nodes_.begin(), nodes_.end(),
                     [](const WorkerNode &n) { return n.allocated.non_negative() && n.capacity.fits(n.allocated); });
}

bool Cluster::allocation_consistent() const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    ResourceVector sum = reserved_[i];
    for (const auto &[id, r] : replicas_)
      if (r.node == i)
        sum += r.footprint;
    // Compare against a recompute in id order (the map iterates unordered).
    ResourceVector ordered = reserved_[i];
    for (ReplicaId id : by_node_[i])
      ordered += replicas_.at(id).footprint;
    if (!(nodes_[i].allocated == ordered) || sum.cpu != ordered.cpu)
      return false;
  }
  return true;
}

} // namespace oranver
