#include "oranver/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <fmt/format.h>

#include "oranver/errors.hpp"

namespace oranver {

void EventQueue::push(Event e) {
  e.seq = next_seq_++;
  heap_.push(e);
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

double expected_event_rate(const std::vector<ModelClass> &models) {
  double rate = 0.0;
  for (const auto &m : models)
    rate += 2.0 / m.mean_interarrival_ms;
  return rate;
}

namespace {

double expected_duration_ms(const SimulationSetup &setup) {
  const auto &h = setup.settings.horizon;
  if (h.kind == Horizon::Kind::time_ms)
    return h.value;
  const double rate = expected_event_rate(setup.models);
  return rate > 0.0 ? h.value / rate : std::numeric_limits<double>::infinity();
}

} // namespace

std::uint64_t scheduled_events(const SimulationSetup &setup) {
  const auto &h = setup.settings.horizon;
  if (h.kind == Horizon::Kind::events)
    return static_cast<std::uint64_t>(h.value);
  return static_cast<std::uint64_t>(std::ceil(h.value * expected_event_rate(setup.models)));
}

double release_interval_ms(const SimulationSetup &setup) {
  const auto &rel = setup.settings.release;
  if (rel.mean_interrelease_ms > 0.0)
    return rel.mean_interrelease_ms;
  return expected_duration_ms(setup) / (setup.settings.curves.scheme.max_index + 1);
}

ReplicaId dispatch(const Cluster &cluster, std::span<const ReplicaId> replicas) {
  if (replicas.empty())
    throw Error("dispatch needs at least one replica");
  ReplicaId best = replicas.front();
  std::size_t best_load = cluster.replica(best).load();
  for (ReplicaId id : replicas.subspan(1)) {
    const std::size_t load = cluster.replica(id).load();
    if (load < best_load || (load == best_load && id < best)) {
      best = id;
      best_load = load;
    }
  }
  return best;
}

std::vector<std::string> validate_setup(const SimulationSetup &setup) {
  std::vector<std::string> problems;
  std::set<std::string> ids;
  for (const auto &m : setup.models) {
    auto p = validate_model(m);
    problems.insert(problems.end(), p.begin(), p.end());
    if (!ids.insert(m.id).second)
      problems.push_back(fmt::format("model {}: duplicate id", m.id));
  }
  ids.clear();
  for (const auto &n : setup.nodes) {
    if (!ids.insert(n.id).second)
      problems.push_back(fmt::format("node {}: duplicate id", n.id));
    const auto &c = n.capacity;
    if ((c.cpu && *c.cpu < 0) || (c.ram && *c.ram < 0) || (c.disk && *c.disk < 0))
      problems.push_back(fmt::format("node {}: capacity must be non-negative", n.id));
    if (!(n.transmission_delay_ms >= 0.0))
      problems.push_back(fmt::format("node {}: transmission_delay_ms must be >= 0", n.id));
  }
  const auto &s = setup.settings;
  if (s.curves.scheme.max_index < 0 || s.curves.scheme.minors_per_major <= 0)
    problems.push_back("version scheme needs max_index >= 0 and minors_per_major > 0");
  if (!(s.scale_threshold > 0.0))
    problems.push_back("scale_threshold must be > 0");
  if (s.release.mean_interrelease_ms < 0.0)
    problems.push_back("mean_interrelease_ms must be >= 0");
  const auto &w = s.policy.weights;
  if (w.w1 < 0 || w.w2 < 0 || w.w3 < 0 || w.alpha < 0 || w.alpha > 1)
    problems.push_back("reward weights must be >= 0 and alpha in [0, 1]");
  const auto &l = s.policy.learning;
  if (!(l.learning_rate > 0 && l.learning_rate <= 1) || l.discount < 0 || l.discount > 1)
    problems.push_back("learning_rate must be in (0, 1] and discount in [0, 1]");
  if (!(l.epsilon_min > 0 && l.epsilon_min <= l.epsilon_start && l.epsilon_start <= 1))
    problems.push_back("epsilon needs 0 < epsilon_min <= epsilon_start <= 1");
  if (!(l.decay_fraction > 0 && l.decay_fraction <= 1))
    problems.push_back("decay_fraction must be in (0, 1]");
  return problems;
}

std::vector<std::string> setup_warnings(const SimulationSetup &setup) {
  std::vector<std::string> warnings;
  for (const auto &m : setup.models) {
    const bool fits = std::any_of(setup.nodes.begin(), setup.nodes.end(), [&](const WorkerNode &n) {
      WorkerNode empty = n;
      empty.allocated = {};
      return admits(empty, m.footprint);
    });
    if (!fits)
      warnings.push_back(fmt::format("model {}: footprint (cpu={}, ram={}, disk={}) fits no node", m.id,
                                     m.footprint.cpu, m.footprint.ram, m.footprint.disk));
  }
  return warnings;
}

Simulation::Simulation(const SimulationSetup &setup, UpdatePolicy &policy, std::uint64_t seed)
    : setup_(setup), policy_(policy), repo_(setup.models, setup.settings.curves), cluster_(setup.nodes),
      encoder_(setup.settings.policy.bins, setup.models.size()), root_(seed) {
  if (auto problems = validate_setup(setup); !problems.empty())
    throw InvalidScenario(fmt::format("{}", fmt::join(problems, "; ")));
  if (!(setup.settings.horizon.value > 0.0))
    throw HorizonZero("horizon must be positive");

  const std::size_t k = setup.models.size();
  for (const auto &m : setup.models) {
    // Keyed by model id so adding a model leaves the other streams untouched.
    arrival_rng_.push_back(root_.substream("arrival/" + m.id));
    service_rng_.push_back(root_.substream("service/" + m.id));
    release_rng_.push_back(root_.substream("release/" + m.id));
    budgets_.push_back(m.delay_budget_ms);
  }
  queued_.assign(k, 0);
  in_service_.assign(k, 0);
  release_interval_ = release_interval_ms(setup);
  total_events_ = scheduled_events(setup);
  policy_.begin_run({total_events_, encoder_.state_count()});

  for (std::size_t m = 0; m < k; ++m) {
    schedule_arrival(m);
    schedule_release(m);
  }
}

void Simulation::schedule_arrival(std::size_t model) {
  Event e;
  e.kind = Event::Kind::arrival;
  e.model = model;
  e.time_ms = now_ + arrival_rng_[model].exponential(setup_.models[model].mean_interarrival_ms);
  events_.push(e);
}

void Simulation::schedule_release(std::size_t model) {
  const int next = repo_.latest_version(model).index() + 1;
  if (next > setup_.settings.curves.scheme.max_index || !std::isfinite(release_interval_))
    return;
  Event e;
  e.kind = Event::Kind::release;
  e.model = model;
  e.version = next;
  if (setup_.settings.release.mode == ReleaseSchedule::Mode::periodic)
    e.time_ms = next * release_interval_;
  else
    e.time_ms = now_ + release_rng_[model].exponential(release_interval_);
  events_.push(e);
}

bool Simulation::horizon_reached() const {
  const auto &h = setup_.settings.horizon;
  if (events_.empty())
    return true;
  if (h.kind == Horizon::Kind::events)
    return static_cast<double>(stats_.request_events) >= h.value;
  return events_.top().time_ms > h.value;
}

bool Simulation::step() {
  if (horizon_reached())
    return false;
  const Event e = events_.pop();
  if (e.time_ms < now_)
    ++stats_.time_regressions;
  now_ = e.time_ms;
  policy_.on_event(stats_.request_events);
  ++stats_.events;
  if (e.kind == Event::Kind::arrival || e.kind == Event::Kind::departure)
    ++stats_.request_events;
  switch (e.kind) {
  case Event::Kind::arrival:
    on_arrival(e);
    break;
  case Event::Kind::departure:
    on_departure(e);
    break;
  case Event::Kind::release:
    on_release(e);
    break;
  case Event::Kind::spawn_complete:
    on_spawn_complete(e);
    break;
  }
  stats_.max_replicas = std::max(stats_.max_replicas, cluster_.replica_count());
  if (setup_.settings.check_invariants)
    check_invariants();
  return true;
}

RunResult Simulation::run() {
  while (step()) {
  }
  for (std::size_t m = 0; m < queued_.size(); ++m) {
    stats_.queued_at_end += queued_[m];
    stats_.in_service_at_end += in_service_[m];
  }
  stats_.end_time_ms = now_;
  return {std::move(trace_), std::move(log_), stats_};
}

std::size_t Simulation::queued(std::size_t model) const { return queued_.at(model); }

std::size_t Simulation::state_index_for(const Replica &r) const {
  const int gap = repo_.latest_version(r.model).index() - r.version.index();
  return encoder_.index(encoder_.make(cluster_.node_load(r.node), queued_[r.model], r.model, gap));
}

void Simulation::on_arrival(const Event &e) {
  const std::size_t model = e.model;
  ++stats_.arrivals;
  const RequestId id = next_request_++;
  requests_.emplace(id, Request{id, model, now_, now_, 0.0, 0.0, {}});
  schedule_arrival(model);

  if (cluster_.replicas_of(model).empty())
    spawn_for_model(model);
  Replica &r = cluster_.replica(dispatch(cluster_, cluster_.replicas_of(model)));
  enqueue(r, id);
  if (r.ready && !r.busy())
    start_service(r);
  apply_scaling(model);
}

void Simulation::enqueue(Replica &r, RequestId req) {
  r.queue.push_back(req);
  requests_.at(req).enqueued_ms = now_;
  ++queued_[r.model];
}

void Simulation::leave_queue(Request &q, const Replica &r) {
  const double from = std::max(q.enqueued_ms, r.spawn_start_ms);
  const double to = std::min(now_, r.spawn_complete_ms);
  if (to > from)
    q.spawn_wait_ms += to - from;
}

void Simulation::start_service(Replica &r) {
  const RequestId id = r.queue.front();
  r.queue.pop_front();
  --queued_[r.model];
  Request &q = requests_.at(id);
  leave_queue(q, r);
  r.in_service = id;
  ++in_service_[r.model];
  q.version = r.version;
  q.service_ms = service_rng_[r.model].exponential(repo_.attributes(r.model, r.version).mean_service_time_ms);

  Event e;
  e.kind = Event::Kind::departure;
  e.model = r.model;
  e.replica = r.id;
  e.request = id;
  e.time_ms = now_ + q.service_ms;
  events_.push(e);
}

void Simulation::on_departure(const Event &e) {
  Replica &r = cluster_.replica(e.replica);
  const std::size_t model = r.model;
  r.in_service.reset();
  --in_service_[model];

  auto it = requests_.find(e.request);
  const Request q = it->second;
  requests_.erase(it);

  const auto &m = setup_.models[model];
  const auto &attrs = repo_.attributes(model, q.version);
  RequestRecord rec;
  rec.id = q.id;
  rec.model = model;
  rec.arrival_ms = q.arrival_ms;
  rec.node = r.node;
  rec.replica = r.id;
  rec.served_version = q.version;
  rec.tau_p = m.processing_delay_ms;
  rec.tau_I = q.service_ms;
  rec.tau_t = cluster_.node(r.node).transmission_delay_ms;
  rec.tau_s = q.spawn_wait_ms;
  rec.departure_ms = now_ + rec.tau_t + rec.tau_p;
  rec.accuracy = attrs.accuracy;
  rec.stability = attrs.stability;
  finish_delays(rec);
  trace_.push_back(rec);
  ++stats_.completions;

  const ReplicaId id = r.id;
  close_pending(id, rec);

  if (repo_.latest_version(model) > r.version) {
    update_hook(id);
  } else if (policy_.learns() && setup_.settings.policy.learning.learn_from_keeps) {
    pending_[id] = Pending{state_index_for(r), 0, std::nullopt};
  }

  if (Replica *live = cluster_.find_replica(id); live && live->ready && !live->busy() && !live->queue.empty())
    start_service(*live);
  apply_scaling(model);
}

int Simulation::update_hook(ReplicaId replica_id) {
  Replica &r = cluster_.replica(replica_id);
  const std::size_t model = r.model;
  const VersionId latest = repo_.latest_version(model);
  if (latest <= r.version)
    return 0;

  DecisionContext ctx;
  ctx.state_index = state_index_for(r);
  ctx.state = encoder_.decode(ctx.state_index);
  ctx.node_load = cluster_.node_load(r.node);
  ctx.current = r.version;
  ctx.latest = latest;
  const int chosen = policy_.decide(ctx);

  DecisionLogEntry entry;
  entry.seq = log_.size();
  entry.time_ms = now_;
  entry.model = model;
  entry.replica = r.id;
  entry.successor = r.id;
  entry.kind = DecisionKind::update;
  entry.old_version = r.version;
  entry.new_version = r.version;
  entry.action = chosen;
  entry.node_load = ctx.node_load;
  entry.state = ctx.state_index;
  entry.epsilon = policy_.epsilon();

  int applied = chosen;
  ReplicaId running = r.id;
  if (chosen == 1) {
    const VersionId target = apply_update(r.version, true, latest, setup_.settings.update_target);
    const ResourceVector footprint = setup_.models[model].footprint_at(target);
    if (!cluster_.first_fit_replacing(r.id, footprint)) {
      applied = 0;
      entry.forced = true;
      ++stats_.forced_keeps;
    } else {
      // Terminate the replica and hand its queue to the successor.
      std::deque<RequestId> moved = std::move(r.queue);
      for (RequestId q : moved)
        leave_queue(requests_.at(q), r);
      queued_[model] -= moved.size();
      pending_.erase(r.id);
      cluster_.remove_replica(replica_id);

      Replica &succ =
          cluster_.spawn_replica(model, target, footprint, now_, setup_.models[model].spawn_time_ms);
      for (RequestId q : moved)
        enqueue(succ, q);
      Event done;
      done.kind = Event::Kind::spawn_complete;
      done.model = model;
      done.replica = succ.id;
      done.time_ms = succ.spawn_complete_ms;
      events_.push(done);
      ++stats_.updates;
      ++stats_.spawns;
      running = succ.id;
      entry.successor = succ.id;
      entry.new_version = target;
    }
  }

  log_.push_back(entry);
  if (policy_.learns())
    pending_[running] = Pending{entry.state, applied, log_.size() - 1};
  return applied;
}

Replica &Simulation::spawn_for_model(std::size_t model) {
  const auto &m = setup_.models[model];
  const VersionId latest = repo_.latest_version(model);
  VersionId production{0};
  for (ReplicaId id : cluster_.replicas_of(model))
    production = std::max(production, cluster_.replica(id).version);
  if (cluster_.replicas_of(model).empty())
    production = VersionId{0};

  const auto peek = cluster_.first_fit(m.footprint_at(latest));
  const double load = peek ? cluster_.node_load(*peek) : 0.0;
  SpawnContext ctx;
  ctx.state_index =
      encoder_.index(encoder_.make(load, queued_[model], model, latest.index() - production.index()));
  ctx.state = encoder_.decode(ctx.state_index);
  ctx.production = production;
  ctx.latest = latest;
  const SpawnChoice choice = policy_.spawn_version(ctx);

  Replica &r = cluster_.spawn_replica(model, choice.version, m.footprint_at(choice.version), now_, m.spawn_time_ms);
  ++stats_.spawns;
  Event done;
  done.kind = Event::Kind::spawn_complete;
  done.model = model;
  done.replica = r.id;
  done.time_ms = r.spawn_complete_ms;
  events_.push(done);

  if (choice.action) {
    DecisionLogEntry entry;
    entry.seq = log_.size();
    entry.time_ms = now_;
    entry.model = model;
    entry.replica = r.id;
    entry.successor = r.id;
    entry.kind = DecisionKind::spawn;
    entry.old_version = production;
    entry.new_version = choice.version;
    entry.action = *choice.action;
    entry.node_load = load;
    entry.state = ctx.state_index;
    entry.epsilon = policy_.epsilon();
    log_.push_back(entry);
    if (policy_.learns())
      pending_[r.id] = Pending{entry.state, entry.action, log_.size() - 1};
  }
  return r;
}

void Simulation::apply_scaling(std::size_t model) {
  const ScalingAction act = cluster_.scaling_decision(model, setup_.settings.scale_threshold);
  if (act.kind == ScalingAction::Kind::spawn) {
    spawn_for_model(model);
  } else if (act.kind == ScalingAction::Kind::remove) {
    pending_.erase(act.replica);
    cluster_.remove_replica(act.replica);
    ++stats_.removals;
  }
}

void Simulation::on_release(const Event &e) {
  repo_.publish(e.model, VersionId{e.version}, now_);
  ++stats_.releases;
  schedule_release(e.model);
}

void Simulation::on_spawn_complete(const Event &e) {
  Replica *r = cluster_.find_replica(e.replica);
  if (!r)
    return;
  r->ready = true;
  if (!r->busy() && !r->queue.empty())
    start_service(*r);
}

void Simulation::close_pending(ReplicaId replica, const RequestRecord &record) {
  auto it = pending_.find(replica);
  if (it == pending_.end())
    return;
  const Pending p = it->second;
  pending_.erase(it);
  const double r = reward(record, budgets_[record.model], setup_.settings.policy.weights);
  const std::size_t next = state_index_for(cluster_.replica(replica));
  const QUpdate u = policy_.learn(p.state, p.action, r, next);
  ++stats_.learning_steps;
  if (p.log_index) {
    auto &entry = log_[*p.log_index];
    entry.closed = true;
    entry.close_time_ms = now_;
    entry.record = record.id;
    entry.reward = r;
    entry.next_state = next;
    entry.q = u;
  }
}

void Simulation::check_invariants() {
  if (!cluster_.within_capacity())
    ++stats_.capacity_violations;
  std::uint64_t waiting = 0;
  std::uint64_t serving = 0;
  for (std::size_t m = 0; m < setup_.models.size(); ++m)
    for (ReplicaId id : cluster_.replicas_of(m)) {
      const auto &r = cluster_.replica(id);
      waiting += r.queue.size();
      serving += r.busy() ? 1 : 0;
    }
  if (stats_.arrivals != stats_.completions + waiting + serving)
    ++stats_.conservation_violations;
}

RunResult simulate(const SimulationSetup &setup, UpdatePolicy &policy, std::uint64_t seed) {
  Simulation sim(setup, policy, seed);
  return sim.run();
}

} // namespace oranver
