#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

namespace ffbt::workloads {

enum class Family : std::uint8_t { kSequential, kUniform, kZipfian, kClrsAdversary };
enum class Direction : std::uint8_t { kAsc, kDesc };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Direction d) noexcept;
/// Accepts sequential|seq, uniform, zipfian|zipf, clrs_adversary|adversary.
Family parse_family(std::string_view name);
Direction parse_direction(std::string_view name);

inline constexpr std::uint64_t kDefaultKeySpace = std::uint64_t{1} << 40;
inline constexpr double kDefaultTheta = 0.99;

struct WorkloadSpec {
  Family family = Family::kSequential;
  std::uint64_t n = 0;
  std::uint64_t seed = 1;
  Direction direction = Direction::kAsc;
  double theta = kDefaultTheta;
  std::uint64_t key_space = kDefaultKeySpace;
  // Node capacity of the adversary's shadow tree.
  std::size_t capacity = 8;
};

std::vector<Key> gen_sequential(std::uint64_t n, Direction direction);

/// n distinct keys drawn uniformly from [0, key_space).
std::vector<Key> gen_uniform(std::uint64_t n, std::uint64_t seed, std::uint64_t key_space);

/// Skewed inserts with unique keys. [0, key_space) is cut into up to 65536
/// equal regions; each draw picks a region by Zipf(theta) rank (ranks are
/// mapped to regions through a seeded permutation) and takes the region's
/// next unused slot, visited in a scattered order. A region that runs out of
/// slots passes the draw on to the next region with room.
std::vector<Key> gen_zipfian(std::uint64_t n, std::uint64_t seed, double theta, std::uint64_t key_space);

/// The insert that completed a trap: every node on the shadow tree's target
/// path was full, so top-down splitting had to split all of them.
struct Trap {
  std::size_t index = 0;   // position in the emitted sequence
  std::uint32_t height = 0;
  InsertReport report;     // as measured on the shadow tree
};

/// Adaptive adversary against top-down preemptive splitting. It keeps a
/// shadow tree of the same capacity and targets its rightmost root-to-leaf
/// path: first the leaf is filled by appending, then each ancestor bottom-up
/// by feeding its left-neighbour subtree until that subtree splits into it,
/// and when the whole path is full a key routed to the leaf springs the trap.
/// Then the next cycle starts on the taller tree.
///
/// New keys are placed inside the open gap they must fall into. When a gap
/// closes, every key so far (in the shadow tree and in the emitted record) is
/// relabelled to evenly spaced values; relabelling preserves order, so the
/// recorded sequence replays to exactly the same tree.
class ClrsAdversary {
 public:
  ClrsAdversary(std::size_t capacity, std::uint64_t key_space = kDefaultKeySpace);

  /// Emits the next key and inserts it into the shadow tree.
  Key next();

  const std::vector<Key>& emitted() const noexcept { return emitted_; }
  const std::vector<Trap>& traps() const noexcept { return traps_; }
  const Tree& shadow() const noexcept { return *shadow_; }
  std::size_t relabels() const noexcept { return relabels_; }

 private:
  Key pick_between(Key lo, Key hi);
  void relabel();

  std::uint64_t key_space_;
  std::unique_ptr<Tree> shadow_;
  std::vector<Key> emitted_;
  std::vector<Trap> traps_;
  std::size_t relabels_ = 0;
};

struct AdversaryRun {
  std::vector<Key> keys;
  std::vector<Trap> traps;
};

/// Exactly n keys of repeated trap cycles.
AdversaryRun gen_clrs_adversary(std::uint64_t n, std::size_t capacity, std::uint64_t key_space = kDefaultKeySpace);

/// Keys up to and including the first trap sprung at `height`. Throws
/// GenerationError if the shadow tree grows past that height first or more
/// than `max_keys` keys would be needed.
AdversaryRun gen_clrs_trap(std::uint32_t height, std::size_t capacity, std::uint64_t key_space = kDefaultKeySpace,
                           std::uint64_t max_keys = 50'000'000);

/// Full key stream for a spec. For the adversary this is the recorded
/// sequence of gen_clrs_adversary.
std::vector<Key> generate(const WorkloadSpec& spec);

// --- key files ---

enum class KeyFormat : std::uint8_t { kText, kBinary };

std::string_view to_string(KeyFormat f) noexcept;
KeyFormat parse_key_format(std::string_view name);

/// Text: one decimal key per line. Binary: 8-byte little-endian records.
void write_keys(const std::filesystem::path& path, const std::vector<Key>& keys, KeyFormat format);

/// Throws ParseError naming the line (text) or byte offset (binary) of the
/// first malformed record.
std::vector<Key> read_keys(const std::filesystem::path& path, KeyFormat format);

}  // namespace ffbt::workloads
