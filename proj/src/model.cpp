#include "oranver/model.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "oranver/errors.hpp"

namespace oranver {

bool Capacity::fits(const ResourceVector &demand) const {
  return (!cpu || demand.cpu <= *cpu) && (!ram || demand.ram <= *ram) && (!disk || demand.disk <= *disk);
}

std::string_view to_string(AppClass c) {
  switch (c) {
  case AppClass::dApp:
    return "dApp";
  case AppClass::xApp:
    return "xApp";
  case AppClass::rApp:
    return "rApp";
  }
  return "?";
}

AppClass app_class_from_string(std::string_view s) {
  if (s == "dApp")
    return AppClass::dApp;
  if (s == "xApp")
    return AppClass::xApp;
  if (s == "rApp")
    return AppClass::rApp;
  throw ParseError(fmt::format("unknown app class '{}'", s));
}

double default_delay_budget_ms(AppClass c) {
  switch (c) {
  case AppClass::dApp:
    return 10.0;
  case AppClass::xApp:
    return 1000.0;
  case AppClass::rApp:
    return 10000.0;
  }
  return 10.0;
}

std::string_view to_string(CurveMode m) {
  return m == CurveMode::geometric ? "geometric" : "percent-step";
}

CurveMode curve_mode_from_string(std::string_view s) {
  if (s == "geometric")
    return CurveMode::geometric;
  if (s == "percent-step")
    return CurveMode::percent_step;
  throw ParseError(fmt::format("unknown curve mode '{}'", s));
}

ResourceVector ModelClass::footprint_at(VersionId v) const {
  auto it = footprint_overrides.upper_bound(v.index());
  if (it == footprint_overrides.begin())
    return footprint;
  return std::prev(it)->second;
}

std::vector<std::string> validate_model(const ModelClass &m) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, std::string_view what) {
    if (!ok)
      problems.push_back(fmt::format("model {}: {}", m.id, what));
  };
  check(!m.id.empty(), "id must not be empty");
  check(m.mean_interarrival_ms > 0.0, "mean_interarrival_ms must be > 0");
  check(m.spawn_time_ms >= 0.0, "spawn_time_ms must be >= 0");
  check(m.footprint.non_negative(), "footprint must be non-negative");
  check(m.service_time_start_ms > 0.0 && m.service_time_end_ms > 0.0, "service times must be > 0");
  check(m.service_time_start_ms >= m.service_time_end_ms, "service_time_start_ms must be >= service_time_end_ms");
  check(m.accuracy_start > 0.0 && m.accuracy_end <= 1.0, "accuracy must lie in (0, 1]");
  check(m.accuracy_start <= m.accuracy_end, "accuracy_start must be <= accuracy_end");
  check(m.stability_end > 0.0 && m.stability_start <= 1.0, "stability must lie in (0, 1]");
  check(m.stability_start >= m.stability_end, "stability_start must be >= stability_end");
  check(m.processing_delay_ms >= 0.0, "processing_delay_ms must be >= 0");
  check(m.delay_budget_ms > 0.0, "delay_budget_ms must be > 0");
  for (const auto &[from, fp] : m.footprint_overrides)
    check(from >= 0 && fp.non_negative(), "footprint override must be non-negative from a valid version");
  return problems;
}

namespace {

// start * (end/start)^t, exact at t = 0 and returning `end` itself at t = 1.
double geometric_blend(double start, double end, double t) {
  if (t <= 0.0)
    return start;
  if (t >= 1.0)
    return end;
  return start * std::pow(end / start, t);
}

} // namespace

VersionAttributes attributes_of(const ModelClass &m, VersionId v, const CurveSettings &curves) {
  check_version(v, curves.scheme);
  const auto &scheme = curves.scheme;
  const int major = scheme.major_of(v.index());

  VersionAttributes out;
  out.footprint = m.footprint_at(v);

  if (curves.mode == CurveMode::geometric) {
    const double t = static_cast<double>(v.index()) / scheme.max_index;
    const double major_t =
        scheme.major_count() > 0 ? static_cast<double>(major) / scheme.major_count() : 0.0;
    out.accuracy = geometric_blend(m.accuracy_start, m.accuracy_end, t);
    out.stability = geometric_blend(m.stability_start, m.stability_end, t);
    out.mean_service_time_ms = geometric_blend(m.service_time_start_ms, m.service_time_end_ms, major_t);
    return out;
  }

  // Every index increment is one release; those landing on a major boundary
  // are major releases, the rest minor ones.
  const auto &s = curves.steps;
  const int minors = v.index() - major;
  out.accuracy = std::min(m.accuracy_end, m.accuracy_start * std::pow(s.major_accuracy, major) *
                                              std::pow(s.minor_accuracy, minors));
  out.stability = std::max(m.stability_end, m.stability_start * std::pow(s.major_stability, major) *
                                                std::pow(s.minor_stability, minors));
  out.mean_service_time_ms =
      std::max(m.service_time_end_ms, m.service_time_start_ms * std::pow(s.major_service_time, major));
  return out;
}

std::vector<ModelClass> reference_models() {
  struct Row {
    const char *id;
    AppClass app;
    double st_start, st_end, interarrival, spawn;
    int cpu;
    double ram, disk, acc_start;
  };
  // Accuracy ends at 1.0 and stability runs 1.0 -> 0.7 for every model.
  const Row rows[] = {
      {"ML-d1", AppClass::dApp, 2, 0.5, 3, 3, 1, 1, 0.01, 0.7},
      {"ML-d2", AppClass::dApp, 4, 0.8, 4, 3, 2, 1, 0.02, 0.7},
      {"ML-x1", AppClass::xApp, 200, 100, 350, 100, 16, 32, 0.1, 0.75},
      {"ML-x2", AppClass::xApp, 300, 200, 525, 100, 8, 32, 0.2, 0.75},
      {"ML-r1", AppClass::rApp, 1000, 900, 1750, 1000, 32, 48, 1, 0.8},
      {"ML-r2", AppClass::rApp, 2000, 1800, 3500, 1000, 32, 64, 2, 0.8},
  };
  std::vector<ModelClass> models;
  for (const auto &r : rows) {
    ModelClass m;
    m.id = r.id;
    m.app_class = r.app;
    m.mean_interarrival_ms = r.interarrival;
    m.spawn_time_ms = r.spawn;
    m.footprint = {r.cpu, r.ram, r.disk};
    m.service_time_start_ms = r.st_start;
    m.service_time_end_ms = r.st_end;
    m.accuracy_start = r.acc_start;
    m.accuracy_end = 1.0;
    m.stability_start = 1.0;
    m.stability_end = 0.7;
    m.delay_budget_ms = default_delay_budget_ms(r.app);
    models.push_back(std::move(m));
  }
  return models;
}

} // namespace oranver
