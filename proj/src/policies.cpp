#include "oranver/policies.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "oranver/errors.hpp"

namespace oranver {

StateEncoder::StateEncoder(StateBins bins, std::size_t model_count) : bins_(std::move(bins)), models_(model_count) {
  if (bins_.load_levels < 1 || bins_.gap_cap < 0)
    throw InvalidScenario("state bins need >= 1 load level and gap_cap >= 0");
  if (!std::is_sorted(bins_.queue_upper.begin(), bins_.queue_upper.end()))
    throw InvalidScenario("queue bin bounds must be ascending");
}

int StateEncoder::load_bin(double node_load) const {
  if (bins_.load_levels == 1)
    return 0;
  const int top = bins_.load_levels - 1;
  const int b = static_cast<int>(std::floor(std::clamp(node_load, 0.0, 1.0) * top));
  return std::min(b, top);
}

int StateEncoder::queue_bin(std::size_t queue_length) const {
  const auto &ub = bins_.queue_upper;
  for (std::size_t i = 0; i < ub.size(); ++i)
    if (queue_length <= static_cast<std::size_t>(ub[i]))
      return static_cast<int>(i);
  return static_cast<int>(ub.size());
}

int StateEncoder::gap_bin(int version_gap) const { return std::clamp(version_gap, 0, bins_.gap_cap); }

PolicyState StateEncoder::make(double node_load, std::size_t queue_length, std::size_t model, int version_gap) const {
  return {load_bin(node_load), queue_bin(queue_length), static_cast<int>(model), gap_bin(version_gap)};
}

std::size_t StateEncoder::state_count() const {
  return static_cast<std::size_t>(bins_.load_levels) * (bins_.queue_upper.size() + 1) * models_ *
         static_cast<std::size_t>(bins_.gap_cap + 1);
}

std::size_t StateEncoder::index(const PolicyState &s) const {
  const std::size_t queues = bins_.queue_upper.size() + 1;
  const std::size_t gaps = static_cast<std::size_t>(bins_.gap_cap + 1);
  if (s.load_bin < 0 || s.load_bin >= bins_.load_levels || s.queue_bin < 0 ||
      static_cast<std::size_t>(s.queue_bin) >= queues || s.model < 0 ||
      static_cast<std::size_t>(s.model) >= models_ || s.gap_bin < 0 || s.gap_bin > bins_.gap_cap)
    throw Error("policy state out of range");
  return ((static_cast<std::size_t>(s.load_bin) * queues + static_cast<std::size_t>(s.queue_bin)) * models_ +
          static_cast<std::size_t>(s.model)) *
             gaps +
         static_cast<std::size_t>(s.gap_bin);
}

PolicyState StateEncoder::decode(std::size_t index) const {
  const std::size_t queues = bins_.queue_upper.size() + 1;
  const std::size_t gaps = static_cast<std::size_t>(bins_.gap_cap + 1);
  PolicyState s;
  s.gap_bin = static_cast<int>(index % gaps);
  index /= gaps;
  s.model = static_cast<int>(index % models_);
  index /= models_;
  s.queue_bin = static_cast<int>(index % queues);
  s.load_bin = static_cast<int>(index / queues);
  return s;
}

double reward(double total_delay_ms, double delay_budget_ms, double stability, double accuracy,
              const RewardWeights &w) {
  const double psi = total_delay_ms / delay_budget_ms;
  const double sigma = 1.0 - stability;
  const double upsilon = accuracy;
  return -(1.0 - w.alpha) * (w.w1 * psi + w.w2 * sigma) + w.alpha * w.w3 * upsilon;
}

double reward(const RequestRecord &record, double delay_budget_ms, const RewardWeights &w) {
  return reward(record.total, delay_budget_ms, record.stability, record.accuracy, w);
}

QTable::QTable(std::size_t states, int actions)
    : states_(states), actions_(actions), values_(states * static_cast<std::size_t>(actions), 0.0) {}

double QTable::max_value(std::size_t state) const {
  double best = get(state, 0);
  for (int a = 1; a < actions_; ++a)
    best = std::max(best, get(state, a));
  return best;
}

int QTable::argmax(std::size_t state) const {
  int best = 0;
  for (int a = 1; a < actions_; ++a)
    if (get(state, a) > get(state, best))
      best = a;
  return best;
}

void QTable::save(std::ostream &out, const StateEncoder &enc) const {
  fmt::print(out, "# qtable states={} actions={}\n", states_, actions_);
  for (std::size_t s = 0; s < states_; ++s) {
    const auto st = enc.decode(s);
    for (int a = 0; a < actions_; ++a)
      if (get(s, a) != 0.0)
        fmt::print(out, "{} {} {} {} {} {}\n", st.load_bin, st.queue_bin, st.model, st.gap_bin, a, get(s, a));
  }
}

QTable QTable::load(std::istream &in, const StateEncoder &enc) {
  QTable t(enc.state_count());
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#')
      continue;
    std::istringstream ls(line);
    PolicyState s;
    int a = 0;
    double v = 0.0;
    if (!(ls >> s.load_bin >> s.queue_bin >> s.model >> s.gap_bin >> a >> v) || a < 0 || a >= t.actions_)
      throw ParseError(fmt::format("qtable line {}: malformed entry", line_no));
    t.set(enc.index(s), a, v);
  }
  return t;
}

QUpdate q_update(QTable &table, std::size_t s, int a, double r, std::size_t s_next, double learning_rate,
                 double discount) {
  QUpdate u;
  u.q_before = table.get(s, a);
  u.max_next = table.max_value(s_next);
  u.q_after = u.q_before + learning_rate * (r + discount * u.max_next - u.q_before);
  table.set(s, a, u.q_after);
  return u;
}

double epsilon_decay_factor(std::uint64_t total_events, const QLearningParams &p) {
  const double steps = p.decay_fraction * static_cast<double>(total_events);
  if (steps <= 0.0)
    return 0.0;
  return std::pow(p.epsilon_min / p.epsilon_start, 1.0 / steps);
}

double epsilon_at(std::uint64_t event_index, std::uint64_t total_events, const QLearningParams &p) {
  // Closed form of eps_start * decay^i with the floor applied.
  const double steps = p.decay_fraction * static_cast<double>(total_events);
  if (steps <= 0.0 || static_cast<double>(event_index) >= steps)
    return p.epsilon_min;
  const double eps = p.epsilon_start * std::pow(p.epsilon_min / p.epsilon_start, static_cast<double>(event_index) / steps);
  return std::max(eps, p.epsilon_min);
}

std::string_view to_string(PolicyKind k) {
  switch (k) {
  case PolicyKind::always:
    return "always";
  case PolicyKind::never:
    return "never";
  case PolicyKind::random:
    return "random";
  case PolicyKind::load_based:
    return "load-based";
  case PolicyKind::q_learning:
    return "rl";
  }
  return "?";
}

PolicyKind policy_kind_from_string(std::string_view s) {
  for (auto k : all_policy_kinds())
    if (to_string(k) == s)
      return k;
  if (s == "q-learning" || s == "ql")
    return PolicyKind::q_learning;
  if (s == "load")
    return PolicyKind::load_based;
  throw ParseError(fmt::format("unknown policy '{}'", s));
}

std::vector<PolicyKind> all_policy_kinds() {
  return {PolicyKind::always, PolicyKind::never, PolicyKind::random, PolicyKind::load_based,
          PolicyKind::q_learning};
}

SpawnChoice NeverUpdate::spawn_version(const SpawnContext &ctx) {
  return {spawn_ == NeverSpawnVersion::zero ? VersionId{0} : ctx.production, std::nullopt};
}

SpawnChoice RandomUpdate::spawn_version(const SpawnContext &ctx) {
  return {VersionId{rng_.uniform_int(0, ctx.latest.index())}, std::nullopt};
}

SpawnChoice LoadBasedUpdate::spawn_version(const SpawnContext &ctx) {
  return {VersionId{rng_.uniform_int(0, ctx.latest.index())}, std::nullopt};
}

QLearningAgent::QLearningAgent(Rng rng, QLearningParams params)
    : rng_(rng), params_(params), epsilon_(params.epsilon_start) {}

void QLearningAgent::begin_run(const RunInfo &info) {
  total_events_ = info.total_events;
  if (table_.state_count() != info.state_count)
    table_ = QTable(info.state_count);
  epsilon_ = params_.epsilon_start;
}

void QLearningAgent::on_event(std::uint64_t event_index) {
  epsilon_ = epsilon_at(event_index, total_events_, params_);
}

int QLearningAgent::choose(std::size_t state) {
  if (rng_.uniform() < epsilon_)
    return rng_.bernoulli(0.5) ? 1 : 0;
  return table_.argmax(state);
}

int QLearningAgent::decide(const DecisionContext &ctx) { return choose(ctx.state_index); }

SpawnChoice QLearningAgent::spawn_version(const SpawnContext &ctx) {
  if (ctx.latest <= ctx.production)
    return {ctx.latest, std::nullopt};
  const int a = choose(ctx.state_index);
  return {a == 1 ? ctx.latest : ctx.production, a};
}

QUpdate QLearningAgent::learn(std::size_t s, int a, double r, std::size_t s_next) {
  return q_update(table_, s, a, r, s_next, params_.learning_rate, params_.discount);
}

std::unique_ptr<UpdatePolicy> make_policy(PolicyKind kind, const PolicyParams &params, std::uint64_t seed) {
  Rng rng = Rng(seed).substream("policy");
  switch (kind) {
  case PolicyKind::always:
    return std::make_unique<AlwaysUpdate>();
  case PolicyKind::never:
    return std::make_unique<NeverUpdate>(params.never_spawn);
  case PolicyKind::random:
    return std::make_unique<RandomUpdate>(rng, params.random_update_probability);
  case PolicyKind::load_based:
    return std::make_unique<LoadBasedUpdate>(rng, params.load_threshold);
  case PolicyKind::q_learning:
    return std::make_unique<QLearningAgent>(rng, params.learning);
  }
  throw Error("unknown policy kind");
}

} // namespace oranver
