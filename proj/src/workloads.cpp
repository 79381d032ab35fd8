#include "ffbt/workloads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "ffbt/clrs.hpp"
#include "ffbt/errors.hpp"

namespace ffbt::workloads {

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::kSequential:
      return "sequential";
    case Family::kUniform:
      return "uniform";
    case Family::kZipfian:
      return "zipfian";
    case Family::kClrsAdversary:
      return "clrs_adversary";
  }
  return "?";
}

std::string_view to_string(Direction d) noexcept { return d == Direction::kAsc ? "asc" : "desc"; }

Family parse_family(std::string_view name) {
  if (name == "sequential" || name == "seq") return Family::kSequential;
  if (name == "uniform") return Family::kUniform;
  if (name == "zipfian" || name == "zipf") return Family::kZipfian;
  if (name == "clrs_adversary" || name == "adversary") return Family::kClrsAdversary;
  throw ConfigError("unknown workload '" + std::string(name) +
                    "' (expected sequential, uniform, zipfian or clrs_adversary)");
}

Direction parse_direction(std::string_view name) {
  if (name == "asc") return Direction::kAsc;
  if (name == "desc") return Direction::kDesc;
  throw ConfigError("unknown direction '" + std::string(name) + "' (expected asc or desc)");
}

namespace {

// Unbiased draw from [0, range) by rejection; std distributions are not
// required to produce the same stream on every standard library.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t range) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  for (;;) {
    const std::uint64_t x = rng();
    if (x < limit) return x % range;
  }
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

std::vector<Key> gen_sequential(std::uint64_t n, Direction direction) {
  std::vector<Key> keys(n);
  std::iota(keys.begin(), keys.end(), Key{0});
  if (direction == Direction::kDesc) std::reverse(keys.begin(), keys.end());
  return keys;
}

std::vector<Key> gen_uniform(std::uint64_t n, std::uint64_t seed, std::uint64_t key_space) {
  if (key_space < n) {
    throw ConfigError("uniform workload needs key_space >= n (" + std::to_string(key_space) + " < " +
                      std::to_string(n) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<Key> keys;
  keys.reserve(n);
  if (key_space <= 4 * n) {
    // Dense: partial Fisher-Yates over the whole universe.
    std::vector<Key> universe(key_space);
    std::iota(universe.begin(), universe.end(), Key{0});
    for (std::uint64_t i = 0; i < n; ++i) {
      std::swap(universe[i], universe[i + bounded(rng, key_space - i)]);
      keys.push_back(universe[i]);
    }
    return keys;
  }
  std::unordered_set<Key> seen;
  seen.reserve(n);
  while (keys.size() < n) {
    const Key k = bounded(rng, key_space);
    if (seen.insert(k).second) keys.push_back(k);
  }
  return keys;
}

std::vector<Key> gen_zipfian(std::uint64_t n, std::uint64_t seed, double theta, std::uint64_t key_space) {
  if (!(theta > 0.0 && theta < 2.0)) throw ConfigError("zipfian theta must lie in (0, 2)");
  if (key_space < n) {
    throw ConfigError("zipfian workload needs key_space >= n (" + std::to_string(key_space) + " < " +
                      std::to_string(n) + ")");
  }
  std::vector<Key> keys;
  if (n == 0) return keys;
  keys.reserve(n);

  const std::uint64_t regions = std::min<std::uint64_t>(65536, key_space);
  auto region_begin = [&](std::uint64_t r) {
    return static_cast<Key>((static_cast<unsigned __int128>(r) * key_space) / regions);
  };

  std::vector<double> cdf(regions);
  double sum = 0.0;
  for (std::uint64_t i = 0; i < regions; ++i) {
    sum += 1.0 / std::pow(static_cast<double>(i + 1), theta);
    cdf[i] = sum;
  }
  for (double& c : cdf) c /= sum;

  std::mt19937_64 rng(seed);
  std::vector<std::uint32_t> region_of_rank(regions);
  std::iota(region_of_rank.begin(), region_of_rank.end(), 0u);
  for (std::uint64_t i = regions; i > 1; --i) std::swap(region_of_rank[i - 1], region_of_rank[bounded(rng, i)]);

  std::vector<std::uint64_t> used(regions, 0);
  std::vector<std::uint64_t> stride(regions, 0);
  std::vector<std::uint64_t> offset(regions, 0);
  auto slot = [&](std::uint64_t r, std::uint64_t size) {
    if (stride[r] == 0) {
      // Any stride coprime to the region size visits every slot exactly once.
      std::uint64_t s = static_cast<std::uint64_t>(static_cast<double>(size) * 0.6180339887498949) | 1;
      while (std::gcd(s, size) != 1) s += 2;
      stride[r] = s % size == 0 ? 1 : s % size;
      offset[r] = bounded(rng, size);
    }
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(used[r]) * stride[r] + offset[r]) % size);
  };

  while (keys.size() < n) {
    const double u = unit(rng);
    const auto rank = static_cast<std::uint64_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    std::uint64_t r = region_of_rank[std::min(rank, regions - 1)];
    for (std::uint64_t hop = 0;; ++hop) {
      if (hop == regions) throw GenerationError("zipfian workload ran out of free keys");
      const std::uint64_t size = region_begin(r + 1) - region_begin(r);
      if (used[r] < size) {
        keys.push_back(region_begin(r) + slot(r, size));
        ++used[r];
        break;
      }
      r = (r + 1) % regions;
    }
  }
  return keys;
}

// --- adversary ---

namespace {

NodeId rightmost_leaf(const Tree& tree, NodeId id) {
  for (;;) {
    const Node& node = tree.peek(id);
    if (node.is_leaf()) return id;
    id = node.children().back();
  }
}

}  // namespace

ClrsAdversary::ClrsAdversary(std::size_t capacity, std::uint64_t key_space)
    : key_space_(key_space), shadow_(std::make_unique<Tree>(TreeConfig{capacity, Variant::kClrs})) {
  if (key_space < 4) throw ConfigError("adversary key_space too small");
}

Key ClrsAdversary::pick_between(Key lo, Key hi) {
  // Keep most of the gap open for the keys that will follow.
  return lo + std::max<Key>(1, (hi - lo) >> 20);
}

void ClrsAdversary::relabel() {
  std::vector<Key> sorted = scan_all(*shadow_);
  const std::uint64_t spacing = key_space_ / (2 * (sorted.size() + 2));
  if (spacing < 2) throw GenerationError("adversary exhausted the key space");
  auto label = [&](Key k) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), k);
    if (it == sorted.end() || *it != k) throw GenerationError("relabel met a key that is not stored");
    return static_cast<Key>((static_cast<std::uint64_t>(it - sorted.begin()) + 1) * spacing);
  };
  // Separators are copies of leaf keys (no deletes), so one map covers both.
  std::vector<NodeId> stack{shadow_->root()};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    Node& node = shadow_->peek_mutable(id);
    for (std::size_t i = 0; i < node.size(); ++i) node.overwrite_key(i, label(node.key(i)));
    if (!node.is_leaf()) {
      for (const NodeId c : node.children()) stack.push_back(c);
    }
  }
  for (Key& k : emitted_) k = label(k);
  ++relabels_;
}

Key ClrsAdversary::next() {
  Tree& t = *shadow_;
  std::vector<NodeId> path{t.root()};
  while (!t.peek(path.back()).is_leaf()) path.push_back(t.peek(path.back()).children().back());

  // Lowest path node that is not full; everything below it is.
  std::optional<std::size_t> open;
  for (std::size_t i = path.size(); i-- > 0;) {
    if (!t.peek(path[i]).full()) {
      open = i;
      break;
    }
  }

  const bool trap = !open;
  Key key = 0;
  for (int attempt = 0;; ++attempt) {
    if (attempt == 2) throw GenerationError("adversary could not open a gap after relabelling");
    Key lo = 0;
    Key hi = key_space_;
    if (!open || *open + 1 == path.size()) {
      // Fill the target leaf, or spring the trap: route past the maximum.
      const Node& leaf = t.peek(path.back());
      if (leaf.empty()) break;  // first key of the run: 0
      lo = leaf.keys().back();
    } else {
      // Feed the left neighbour of the path child until it splits upward.
      const Node& a = t.peek(path[*open]);
      lo = t.peek(rightmost_leaf(t, a.children()[a.size() - 1])).keys().back();
      hi = a.keys().back();
    }
    if (hi - lo >= 2) {
      key = pick_between(lo, hi);
      break;
    }
    relabel();
  }

  const std::uint32_t height = t.height();
  const InsertReport r = clrs::insert(t, key, key);
  emitted_.push_back(key);
  if (trap) traps_.push_back(Trap{emitted_.size() - 1, height, r});
  return emitted_.back();
}

AdversaryRun gen_clrs_adversary(std::uint64_t n, std::size_t capacity, std::uint64_t key_space) {
  ClrsAdversary adv(capacity, key_space);
  for (std::uint64_t i = 0; i < n; ++i) adv.next();
  return AdversaryRun{adv.emitted(), adv.traps()};
}

AdversaryRun gen_clrs_trap(std::uint32_t height, std::size_t capacity, std::uint64_t key_space,
                           std::uint64_t max_keys) {
  ClrsAdversary adv(capacity, key_space);
  while (adv.traps().empty() || adv.traps().back().height < height) {
    if (adv.emitted().size() >= max_keys) {
      throw GenerationError("adversary needed more than " + std::to_string(max_keys) + " keys for a height-" +
                            std::to_string(height) + " trap");
    }
    adv.next();
  }
  if (adv.traps().back().height != height) {
    throw GenerationError("shadow tree skipped trap height " + std::to_string(height));
  }
  return AdversaryRun{adv.emitted(), adv.traps()};
}

std::vector<Key> generate(const WorkloadSpec& spec) {
  switch (spec.family) {
    case Family::kSequential:
      return gen_sequential(spec.n, spec.direction);
    case Family::kUniform:
      return gen_uniform(spec.n, spec.seed, spec.key_space);
    case Family::kZipfian:
      return gen_zipfian(spec.n, spec.seed, spec.theta, spec.key_space);
    case Family::kClrsAdversary:
      return gen_clrs_adversary(spec.n, spec.capacity, spec.key_space).keys;
  }
  throw ConfigError("unknown workload family");
}

}  // namespace ffbt::workloads
