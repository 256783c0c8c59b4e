#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "oranver/model.hpp"
#include "oranver/record.hpp"

namespace oranver {

struct ObjectiveMeans {
  double mean_delay_ms = 0.0; // O1
  double mean_accuracy = 0.0; // O2
  double mean_stability = 0.0; // O3
  std::uint64_t requests = 0;
};

struct ObjectiveSummary {
  // Request-weighted means over the whole trace.
  ObjectiveMeans overall;
  // Mean over models of each model's request mean (1/K sum_k mean_k).
  ObjectiveMeans model_averaged;
  std::array<ObjectiveMeans, 3> per_app_class{}; // indexed by AppClass
  std::vector<ObjectiveMeans> per_model;
};

// Incremental form of objectives(); add() records in trace order to get the
// same sums bit-for-bit.
class ObjectiveAccumulator {
public:
  explicit ObjectiveAccumulator(std::vector<AppClass> model_classes);
  void add(const RequestRecord &r);
  // Throws EmptyTrace when nothing was added.
  ObjectiveSummary finish() const;

private:
  struct Sums {
    double delay = 0.0, accuracy = 0.0, stability = 0.0;
    std::uint64_t n = 0;
  };
  static ObjectiveMeans means(const Sums &s);

  std::vector<AppClass> classes_;
  Sums all_;
  std::array<Sums, 3> per_class_{};
  std::vector<Sums> per_model_;
};

// model_classes[k] is the app class of model index k.
ObjectiveSummary objectives(std::span<const RequestRecord> trace, const std::vector<AppClass> &model_classes);

struct DistributionStats {
  std::size_t n = 0;
  double min = 0.0, max = 0.0;
  double q1 = 0.0, median = 0.0, q3 = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0; // most extreme data within 1.5 IQR, never inside the box
  std::size_t outliers = 0;
  double mean = 0.0;
  double stddev = 0.0; // sample standard deviation (0 for n = 1)
};

// Linear interpolation between order statistics, h = (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

// Throws EmptyGroup. Takes the values by value and sorts them.
DistributionStats boxplot(std::vector<double> values);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  double level = 0.98;
  std::size_t n = 0;

  double lower() const { return mean - half_width; }
  double upper() const { return mean + half_width; }
};

// Student-t interval over per-replication means. Throws TooFewReplications
// when fewer than two means are given.
ConfidenceInterval confidence_interval(std::span<const double> means, double level = 0.98);

// Two-sided Student-t critical value t_{(1+level)/2, dof}.
double student_t_critical(double level, std::size_t dof);

} // namespace oranver
