#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "oranver/model.hpp"
#include "oranver/rng.hpp"

namespace oranver {

struct ReleaseRecord {
  std::size_t model = 0;
  VersionId version;
  double publish_time_ms = 0.0;
  VersionAttributes attributes;
};

struct ReleaseSchedule {
  enum class Mode { periodic, poisson };
  Mode mode = Mode::periodic;
  double mean_interrelease_ms = 1000.0;
};

// Publish times for releases 1..count. Periodic spacing puts release i at
// i * mean; Poisson spacing draws exponential gaps from `rng`.
std::vector<double> release_times(const ReleaseSchedule &schedule, int count, Rng &rng);

// Catalog of releases per model. Version 0 of every model is published at
// t = 0 on construction.
class VersionRepository {
public:
  VersionRepository(std::vector<ModelClass> models, CurveSettings curves);

  const ReleaseRecord &publish(std::size_t model, VersionId version, double time_ms);
  const ReleaseRecord &publish(std::string_view model, VersionId version, double time_ms);

  VersionId latest_version(std::size_t model) const;
  VersionId latest_version(std::string_view model) const;

  std::size_t model_index(std::string_view id) const;
  const ModelClass &model(std::size_t index) const { return models_.at(index); }
  std::span<const ModelClass> models() const { return models_; }
  std::span<const ReleaseRecord> releases(std::size_t model) const;
  const CurveSettings &curves() const { return curves_; }

  // Attributes of a published release.
  const VersionAttributes &attributes(std::size_t model, VersionId version) const;

  // One line per record: model,version,publish_time_ms,accuracy,stability,service_time_ms
  void dump(std::ostream &out) const;

private:
  void check_model(std::size_t model) const;

  std::vector<ModelClass> models_;
  CurveSettings curves_;
  std::vector<std::vector<ReleaseRecord>> releases_;
};

} // namespace oranver
