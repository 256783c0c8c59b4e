#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "oranver/record.hpp"
#include "oranver/rng.hpp"
#include "oranver/version.hpp"

namespace oranver {

// ---------------------------------------------------------------------------
// State discretisation

struct StateBins {
  int load_levels = 5;                      // 0, .25, .5, .75, 1
  std::vector<int> queue_upper{0, 2, 5, 10}; // 0 | 1-2 | 3-5 | 6-10 | >10
  int gap_cap = 5;                          // version gap bins 0..gap_cap
};

struct PolicyState {
  int load_bin = 0;
  int queue_bin = 0;
  int model = 0;
  int gap_bin = 0;

  friend bool operator==(const PolicyState &, const PolicyState &) = default;
};

class StateEncoder {
public:
  StateEncoder(StateBins bins, std::size_t model_count);

  PolicyState make(double node_load, std::size_t queue_length, std::size_t model, int version_gap) const;
  std::size_t index(const PolicyState &s) const;
  PolicyState decode(std::size_t index) const;
  std::size_t state_count() const;

  int load_bin(double node_load) const;
  int queue_bin(std::size_t queue_length) const;
  int gap_bin(int version_gap) const;

  const StateBins &bins() const { return bins_; }
  std::size_t model_count() const { return models_; }

private:
  StateBins bins_;
  std::size_t models_;
};

// ---------------------------------------------------------------------------
// Reward

struct RewardWeights {
  double w1 = 0.025; // delay
  double w2 = 1.0;   // destabilisation
  double w3 = 2.0;   // accuracy
  double alpha = 0.5;
};

// R = -(1 - alpha)(w1 psi + w2 sigma) + alpha w3 upsilon with
// psi = total delay / budget, sigma = 1 - stability, upsilon = accuracy.
double reward(double total_delay_ms, double delay_budget_ms, double stability, double accuracy,
              const RewardWeights &w);
double reward(const RequestRecord &record, double delay_budget_ms, const RewardWeights &w);

// ---------------------------------------------------------------------------
// Q-table

class QTable {
public:
  QTable() = default;
  QTable(std::size_t states, int actions = 2);

  double get(std::size_t state, int action) const { return values_[state * actions_ + action]; }
  void set(std::size_t state, int action, double v) { values_[state * actions_ + action] = v; }
  double max_value(std::size_t state) const;
  // Lowest action among the maxima.
  int argmax(std::size_t state) const;

  std::size_t state_count() const { return states_; }
  int action_count() const { return actions_; }
  const std::vector<double> &values() const { return values_; }

  // Text snapshot: header line, then "load_bin queue_bin model gap_bin action value"
  // for every non-zero entry.
  void save(std::ostream &out, const StateEncoder &enc) const;
  static QTable load(std::istream &in, const StateEncoder &enc);

  friend bool operator==(const QTable &, const QTable &) = default;

private:
  std::size_t states_ = 0;
  int actions_ = 2;
  std::vector<double> values_;
};

struct QLearningParams {
  double learning_rate = 0.01;
  double discount = 0.99;
  double epsilon_start = 1.0;
  double epsilon_min = 0.001;
  // Fraction of the scheduled events after which epsilon sits at its floor.
  double decay_fraction = 0.5;
  // Also learn from completions where no update was possible (action 0).
  bool learn_from_keeps = true;
};

struct QUpdate {
  double q_before = 0.0;
  double max_next = 0.0;
  double q_after = 0.0;
};

// Q(s,a) += lr * (r + gamma * max_b Q(s',b) - Q(s,a))
QUpdate q_update(QTable &table, std::size_t s, int a, double r, std::size_t s_next, double learning_rate,
                 double discount);

// Per-event multiplicative factor reaching epsilon_min after
// decay_fraction * total_events events.
double epsilon_decay_factor(std::uint64_t total_events, const QLearningParams &p);
// Exploration rate before processing event `event_index` (0-based).
double epsilon_at(std::uint64_t event_index, std::uint64_t total_events, const QLearningParams &p);

// ---------------------------------------------------------------------------
// Policies

enum class PolicyKind { always, never, random, load_based, q_learning };

std::string_view to_string(PolicyKind k);
PolicyKind policy_kind_from_string(std::string_view s);
std::vector<PolicyKind> all_policy_kinds();

enum class NeverSpawnVersion { zero, production };

struct PolicyParams {
  double load_threshold = 0.5;
  double random_update_probability = 0.5;
  NeverSpawnVersion never_spawn = NeverSpawnVersion::zero;
  RewardWeights weights;
  QLearningParams learning;
  StateBins bins;
};

struct DecisionContext {
  PolicyState state;
  std::size_t state_index = 0;
  double node_load = 0.0;
  VersionId current;
  VersionId latest;
};

struct SpawnContext {
  PolicyState state;
  std::size_t state_index = 0;
  VersionId production; // newest version among the model's live replicas
  VersionId latest;
};

struct SpawnChoice {
  VersionId version;
  // Set when the choice was a learnable keep(0)/update(1) decision.
  std::optional<int> action;
};

struct RunInfo {
  std::uint64_t total_events = 0;
  std::size_t state_count = 0;
};

class UpdatePolicy {
public:
  virtual ~UpdatePolicy() = default;

  virtual PolicyKind kind() const = 0;
  // Called once before the first event.
  virtual void begin_run(const RunInfo &) {}
  // Called before every processed event.
  virtual void on_event(std::uint64_t /*event_index*/) {}
  // 1 = replace the replica with the latest version, 0 = keep it.
  virtual int decide(const DecisionContext &ctx) = 0;
  virtual SpawnChoice spawn_version(const SpawnContext &ctx) = 0;

  virtual bool learns() const { return false; }
  virtual QUpdate learn(std::size_t /*s*/, int /*a*/, double /*r*/, std::size_t /*s_next*/) { return {}; }
  virtual double epsilon() const { return 0.0; }
};

class AlwaysUpdate final : public UpdatePolicy {
public:
  PolicyKind kind() const override { return PolicyKind::always; }
  int decide(const DecisionContext &) override { return 1; }
  SpawnChoice spawn_version(const SpawnContext &ctx) override { return {ctx.latest, std::nullopt}; }
};

class NeverUpdate final : public UpdatePolicy {
public:
  explicit NeverUpdate(NeverSpawnVersion spawn = NeverSpawnVersion::zero) : spawn_(spawn) {}
  PolicyKind kind() const override { return PolicyKind::never; }
  int decide(const DecisionContext &) override { return 0; }
  SpawnChoice spawn_version(const SpawnContext &ctx) override;

private:
  NeverSpawnVersion spawn_;
};

class RandomUpdate final : public UpdatePolicy {
public:
  RandomUpdate(Rng rng, double probability = 0.5) : rng_(rng), probability_(probability) {}
  PolicyKind kind() const override { return PolicyKind::random; }
  int decide(const DecisionContext &) override { return rng_.bernoulli(probability_) ? 1 : 0; }
  SpawnChoice spawn_version(const SpawnContext &ctx) override;

private:
  Rng rng_;
  double probability_;
};

class LoadBasedUpdate final : public UpdatePolicy {
public:
  LoadBasedUpdate(Rng rng, double threshold = 0.5) : rng_(rng), threshold_(threshold) {}
  PolicyKind kind() const override { return PolicyKind::load_based; }
  int decide(const DecisionContext &ctx) override { return ctx.node_load < threshold_ ? 1 : 0; }
  SpawnChoice spawn_version(const SpawnContext &ctx) override;

private:
  Rng rng_;
  double threshold_;
};

class QLearningAgent final : public UpdatePolicy {
public:
  QLearningAgent(Rng rng, QLearningParams params);

  PolicyKind kind() const override { return PolicyKind::q_learning; }
  void begin_run(const RunInfo &info) override;
  void on_event(std::uint64_t event_index) override;
  int decide(const DecisionContext &ctx) override;
  SpawnChoice spawn_version(const SpawnContext &ctx) override;

  bool learns() const override { return true; }
  QUpdate learn(std::size_t s, int a, double r, std::size_t s_next) override;
  double epsilon() const override { return epsilon_; }

  // Greedy action, ignoring exploration.
  int greedy(std::size_t state) const { return table_.argmax(state); }

  const QTable &table() const { return table_; }
  void set_table(QTable t) { table_ = std::move(t); }
  const QLearningParams &params() const { return params_; }

private:
  int choose(std::size_t state);

  Rng rng_;
  QLearningParams params_;
  QTable table_;
  std::uint64_t total_events_ = 0;
  double epsilon_ = 1.0;
};

std::unique_ptr<UpdatePolicy> make_policy(PolicyKind kind, const PolicyParams &params, std::uint64_t seed);

} // namespace oranver
