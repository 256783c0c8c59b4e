#include "oranver/repository.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "oranver/errors.hpp"

namespace oranver {

std::vector<double> release_times(const ReleaseSchedule &schedule, int count, Rng &rng) {
  if (!(schedule.mean_interrelease_ms > 0.0))
    throw InvalidScenario("mean_interrelease_ms must be > 0");
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(std::max(count, 0)));
  double t = 0.0;
  for (int i = 1; i <= count; ++i) {
    if (schedule.mode == ReleaseSchedule::Mode::periodic)
      t = i * schedule.mean_interrelease_ms;
    else
      t += rng.exponential(schedule.mean_interrelease_ms);
    times.push_back(t);
  }
  return times;
}

VersionRepository::VersionRepository(std::vector<ModelClass> models, CurveSettings curves)
    : models_(std::move(models)), curves_(curves), releases_(models_.size()) {
  for (std::size_t k = 0; k < models_.size(); ++k)
    releases_[k].push_back({k, VersionId{0}, 0.0, attributes_of(models_[k], VersionId{0}, curves_)});
}

void VersionRepository::check_model(std::size_t model) const {
  if (model >= models_.size())
    throw UnknownModel(fmt::format("model index {} out of range", model));
}

std::size_t VersionRepository::model_index(std::string_view id) const {
  for (std::size_t k = 0; k < models_.size(); ++k)
    if (models_[k].id == id)
      return k;
  throw UnknownModel(fmt::format("unknown model '{}'", id));
}

const ReleaseRecord &VersionRepository::publish(std::size_t model, VersionId version, double time_ms) {
  check_model(model);
  auto &list = releases_[model];
  const auto &last = list.back();
  if (version.index() != last.version.index() + 1)
    throw NonMonotonicRelease(fmt::format("{}: release {} does not follow latest {}", models_[model].id,
                                          version.index(), last.version.index()));
  if (time_ms < last.publish_time_ms)
    throw NonMonotonicRelease(fmt::format("{}: release {} at t={} precedes previous release", models_[model].id,
                                          version.index(), time_ms));
  list.push_back({model, version, time_ms, attributes_of(models_[model], version, curves_)});
  return list.back();
}

const ReleaseRecord &VersionRepository::publish(std::string_view model, VersionId version, double time_ms) {
  return publish(model_index(model), version, time_ms);
}

VersionId VersionRepository::latest_version(std::size_t model) const {
  check_model(model);
  return releases_[model].back().version;
}

VersionId VersionRepository::latest_version(std::string_view model) const {
  return latest_version(model_index(model));
}

std::span<const ReleaseRecord> VersionRepository::releases(std::size_t model) const {
  check_model(model);
  return releases_[model];
}

const VersionAttributes &VersionRepository::attributes(std::size_t model, VersionId version) const {
  check_model(model);
  const auto &list = releases_[model];
  if (version.index() < 0 || static_cast<std::size_t>(version.index()) >= list.size())
    throw UnknownVersion(fmt::format("{}: version {} not published", models_[model].id, version.index()));
  return list[static_cast<std::size_t>(version.index())].attributes;
}

void VersionRepository::dump(std::ostream &out) const {
  out << "model,version,publish_time_ms,accuracy,stability,service_time_ms\n";
  for (const auto &list : releases_)
    for (const auto &r : list)
      fmt::print(out, "{},{},{},{},{},{}\n", models_[r.model].id, r.version.index(), r.publish_time_ms,
                 r.attributes.accuracy, r.attributes.stability, r.attributes.mean_service_time_ms);
}

} // namespace oranver
