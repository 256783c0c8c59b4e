#include "oranver/version.hpp"

#include <fmt/format.h>

#include "oranver/errors.hpp"

namespace oranver {

void check_version(VersionId v, const VersionScheme &scheme) {
  if (v.index() < 0 || v.index() > scheme.max_index)
    throw UnknownVersion(fmt::format("version index {} outside [0, {}]", v.index(), scheme.max_index));
}

std::string version_display(VersionId v, const VersionScheme &scheme) {
  check_version(v, scheme);
  return fmt::format("{}.{}", scheme.major_of(v.index()), scheme.minor_of(v.index()));
}

VersionId apply_update(VersionId x, bool update, VersionId latest, UpdateTarget target) {
  if (!update)
    return x;
  if (x >= latest)
    throw NoNewerVersion(fmt::format("version {} is already the latest ({})", x.index(), latest.index()));
  return target == UpdateTarget::latest ? latest : VersionId{x.index() + 1};
}

} // namespace oranver
