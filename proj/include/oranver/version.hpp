#pragma once

#include <compare>
#include <string>

namespace oranver {

// Layout of the release index space. Index 0 is the initial release; every
// `minors_per_major` indices start a new major line.
struct VersionScheme {
  int max_index = 2000;
  int minors_per_major = 200;

  int major_of(int index) const { return index / minors_per_major; }
  int minor_of(int index) const { return index % minors_per_major; }
  int major_count() const { return max_index / minors_per_major; }
};

class VersionId {
public:
  constexpr VersionId() = default;
  constexpr explicit VersionId(int index) : index_(index) {}

  constexpr int index() const { return index_; }

  friend constexpr auto operator<=>(VersionId, VersionId) = default;

private:
  int index_ = 0;
};

// Throws UnknownVersion when `v` lies outside [0, scheme.max_index].
void check_version(VersionId v, const VersionScheme &scheme);

// "X.Y" with X the major and Y the minor component.
std::string version_display(VersionId v, const VersionScheme &scheme = {});

enum class UpdateTarget {
  latest,    // g(x, 1) = newest published release
  successor, // g(x, 1) = x + 1
};

// Version a replica runs after update decision `update`. Throws
// NoNewerVersion when an update is requested but `x` is already `latest`.
VersionId apply_update(VersionId x, bool update, VersionId latest,
                       UpdateTarget target = UpdateTarget::latest);

} // namespace oranver
