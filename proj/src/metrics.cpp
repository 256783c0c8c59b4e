#include "oranver/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <fmt/format.h>

#include "oranver/errors.hpp"

namespace oranver {

ObjectiveAccumulator::ObjectiveAccumulator(std::vector<AppClass> model_classes)
    : classes_(std::move(model_classes)), per_model_(classes_.size()) {}

void ObjectiveAccumulator::add(const RequestRecord &r) {
  auto bump = [&](Sums &s) {
    s.delay += r.total;
    s.accuracy += r.accuracy;
    s.stability += r.stability;
    ++s.n;
  };
  bump(all_);
  bump(per_class_[static_cast<std::size_t>(classes_.at(r.model))]);
  bump(per_model_[r.model]);
}

ObjectiveMeans ObjectiveAccumulator::means(const Sums &s) {
  if (s.n == 0)
    return {};
  const double n = static_cast<double>(s.n);
  return {s.delay / n, s.accuracy / n, s.stability / n, s.n};
}

ObjectiveSummary ObjectiveAccumulator::finish() const {
  if (all_.n == 0)
    throw EmptyTrace("objectives need at least one completed request");
  ObjectiveSummary out;
  out.overall = means(all_);
  for (std::size_t c = 0; c < per_class_.size(); ++c)
    out.per_app_class[c] = means(per_class_[c]);
  std::size_t active = 0;
  for (const auto &s : per_model_) {
    out.per_model.push_back(means(s));
    if (s.n == 0)
      continue;
    const auto m = out.per_model.back();
    out.model_averaged.mean_delay_ms += m.mean_delay_ms;
    out.model_averaged.mean_accuracy += m.mean_accuracy;
    out.model_averaged.mean_stability += m.mean_stability;
    ++active;
  }
  out.model_averaged.mean_delay_ms /= static_cast<double>(active);
  out.model_averaged.mean_accuracy /= static_cast<double>(active);
  out.model_averaged.mean_stability /= static_cast<double>(active);
  out.model_averaged.requests = all_.n;
  return out;
}

ObjectiveSummary objectives(std::span<const RequestRecord> trace, const std::vector<AppClass> &model_classes) {
  ObjectiveAccumulator acc(model_classes);
  for (const auto &r : trace)
    acc.add(r);
  return acc.finish();
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty())
    throw EmptyGroup("quantile of an empty group");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DistributionStats boxplot(std::vector<double> values) {
  if (values.empty())
    throw EmptyGroup("boxplot of an empty group");
  std::sort(values.begin(), values.end());
  DistributionStats s;
  s.n = values.size();
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile_sorted(values, 0.25);
  s.median = quantile_sorted(values, 0.5);
  s.q3 = quantile_sorted(values, 0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_fence = s.q1 - 1.5 * iqr;
  const double hi_fence = s.q3 + 1.5 * iqr;
  // Interpolated quartiles can lie beyond the last datum inside a fence.
  s.whisker_low = std::min(*std::lower_bound(values.begin(), values.end(), lo_fence), s.q1);
  s.whisker_high = std::max(*std::prev(std::upper_bound(values.begin(), values.end(), hi_fence)), s.q3);
  s.outliers = static_cast<std::size_t>(std::count_if(values.begin(), values.end(),
                                                      [&](double v) { return v < lo_fence || v > hi_fence; }));
  double sum = 0.0;
  for (double v : values)
    sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

double student_t_critical(double level, std::size_t dof) {
  boost::math::students_t dist(static_cast<double>(dof));
  return boost::math::quantile(dist, (1.0 + level) / 2.0);
}

ConfidenceInterval confidence_interval(std::span<const double> means, double level) {
  if (means.size() < 2)
    throw TooFewReplications(fmt::format("confidence interval needs >= 2 replications, got {}", means.size()));
  if (!(level > 0.0 && level < 1.0))
    throw Error("confidence level must lie in (0, 1)");
  const double n = static_cast<double>(means.size());
  double sum = 0.0;
  for (double m : means)
    sum += m;
  const double mean = sum / n;
  double ss = 0.0;
  for (double m : means)
    ss += (m - mean) * (m - mean);
  const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
  const double sd = *lo == *hi ? 0.0 : std::sqrt(ss / (n - 1.0));
  return {mean, student_t_critical(level, means.size() - 1) * sd / std::sqrt(n), level, means.size()};
}

} // namespace oranver
