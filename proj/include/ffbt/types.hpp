#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <limits>
#include <ostream>
#include <string_view>

namespace ffbt {

using Key = std::uint64_t;
/// Opaque fixed-size payload token stored alongside each leaf key.
using Value = std::uint64_t;

/// Identifier of a stored node. Ids are dense, assigned in allocation order and
/// never reused within one store.
struct NodeId {
  static constexpr std::uint32_t kInvalid = std::numeric_limits<std::uint32_t>::max();

  std::uint32_t value = kInvalid;

  constexpr bool valid() const noexcept { return value != kInvalid; }
  friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

inline std::ostream& operator<<(std::ostream& os, NodeId id) {
  if (!id.valid()) return os << "node#-";
  return os << "node#" << id.value;
}

enum class NodeKind : std::uint8_t { kLeaf, kInternal };

enum class Variant : std::uint8_t { kBaseline, kClrs, kFf };

std::string_view to_string(Variant v) noexcept;
/// Parses "baseline", "clrs" or "ff"; throws ConfigError otherwise.
Variant parse_variant(std::string_view name);

/// Measured I/O of one operation under the per-operation buffer model.
struct IoReport {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  // reads + writes; header-only flushes are excluded.
  std::uint64_t total = 0;
  std::uint64_t header_writes = 0;

  friend bool operator==(const IoReport&, const IoReport&) = default;
};

/// Per-insert observation shared by every insertion variant.
struct InsertReport {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;
  std::uint64_t total = 0;
  std::uint32_t splits = 0;
  // Tree height when the insert started (a single leaf root has height 1).
  std::uint32_t height = 0;
  std::int64_t fluctuation = 0;
  // Pages flushed only because their critical flag or child bitmap changed.
  std::uint32_t header_writes = 0;
};

}  // namespace ffbt

template <>
struct std::hash<ffbt::NodeId> {
  std::size_t operator()(ffbt::NodeId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
