#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oranver/version.hpp"

namespace oranver {

struct ResourceVector {
  int cpu = 0;
  double ram = 0.0;  // GB
  double disk = 0.0; // GB

  ResourceVector &operator+=(const ResourceVector &o) {
    cpu += o.cpu;
    ram += o.ram;
    disk += o.disk;
    return *this;
  }
  ResourceVector &operator-=(const ResourceVector &o) {
    cpu -= o.cpu;
    ram -= o.ram;
    disk -= o.disk;
    return *this;
  }
  friend ResourceVector operator+(ResourceVector a, const ResourceVector &b) { return a += b; }
  friend bool operator==(const ResourceVector &, const ResourceVector &) = default;

  bool non_negative() const { return cpu >= 0 && ram >= 0.0 && disk >= 0.0; }
};

// Node capacity; an empty dimension is unlimited.
struct Capacity {
  std::optional<int> cpu;
  std::optional<double> ram;
  std::optional<double> disk;

  static Capacity unlimited() { return {}; }
  static Capacity finite(int cpu, double ram, double disk) { return {cpu, ram, disk}; }

  bool fits(const ResourceVector &demand) const;
  friend bool operator==(const Capacity &, const Capacity &) = default;
};

enum class AppClass { dApp, xApp, rApp };

std::string_view to_string(AppClass c);
AppClass app_class_from_string(std::string_view s);
// Control-loop bound used to normalise delays: 10 ms, 1 s, 10 s.
double default_delay_budget_ms(AppClass c);

enum class CurveMode { geometric, percent_step };

std::string_view to_string(CurveMode m);
CurveMode curve_mode_from_string(std::string_view s);

// Multiplicative per-release factors used by CurveMode::percent_step.
struct PercentSteps {
  double major_accuracy = 1.02;
  double major_stability = 0.98;
  double major_service_time = 0.93;
  double minor_accuracy = 1.001;
  double minor_stability = 0.999;
};

struct ModelClass {
  std::string id;
  AppClass app_class = AppClass::dApp;
  double mean_interarrival_ms = 1.0;
  double spawn_time_ms = 0.0;
  ResourceVector footprint;
  double service_time_start_ms = 1.0;
  double service_time_end_ms = 1.0;
  double accuracy_start = 1.0;
  double accuracy_end = 1.0;
  double stability_start = 1.0;
  double stability_end = 1.0;
  double processing_delay_ms = 0.0;
  double delay_budget_ms = 10.0;
  // Piecewise-constant footprint changes: key is the first version index the
  // footprint applies to. Empty means `footprint` for every version.
  std::map<int, ResourceVector> footprint_overrides;

  ResourceVector footprint_at(VersionId v) const;
};

struct VersionAttributes {
  double accuracy = 0.0;
  double stability = 0.0;
  double mean_service_time_ms = 0.0;
  ResourceVector footprint;
};

// Problems with a model definition (empty when valid).
std::vector<std::string> validate_model(const ModelClass &m);

struct CurveSettings {
  CurveMode mode = CurveMode::geometric;
  VersionScheme scheme;
  PercentSteps steps;
};

VersionAttributes attributes_of(const ModelClass &m, VersionId v, const CurveSettings &curves = {});

// The six reference models: ML-d1, ML-d2, ML-x1, ML-x2, ML-r1, ML-r2.
std::vector<ModelClass> reference_models();

} // namespace oranver
