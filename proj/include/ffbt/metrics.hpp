#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "ffbt/tree.hpp"
#include "ffbt/types.hpp"

namespace ffbt::metrics {

/// total - (height + 1). Throws InvariantViolation when negative: no insert
/// can beat one read per level plus the leaf write.
std::int64_t fluctuation_of(const InsertReport& report);

/// Nearest-rank percentile of an ascending sample: the value at rank
/// ceil(p/100 * n), 1-based. Throws std::invalid_argument on an empty sample.
std::uint64_t nearest_rank(std::span<const std::uint64_t> sorted, double p);

struct HeightStats {
  std::uint64_t count = 0;
  std::uint64_t min = 0;
  std::uint64_t max = 0;
  std::uint64_t p50 = 0;
  std::uint64_t p95 = 0;

  friend bool operator==(const HeightStats&, const HeightStats&) = default;
};

/// Total I/O grouped by the height the insert started at.
std::map<std::uint32_t, HeightStats> per_height_stats(std::span<const InsertReport> reports);

struct CcdfPoint {
  std::int64_t x = 0;
  double p = 0.0;  // share of values >= x

  friend bool operator==(const CcdfPoint&, const CcdfPoint&) = default;
};

std::vector<CcdfPoint> ccdf(std::span<const std::int64_t> values);

struct Peak {
  std::uint64_t value = 0;
  std::size_t index = 0;

  friend bool operator==(const Peak&, const Peak&) = default;
};

/// The k largest values, descending; equal values keep index order.
std::vector<Peak> top_k(std::span<const std::uint64_t> values, std::size_t k);

struct Bin {
  std::size_t begin = 0;  // first index in the bin
  std::size_t end = 0;    // one past the last
  std::uint64_t max = 0;

  friend bool operator==(const Bin&, const Bin&) = default;
};

/// Splits the stream into `bins` contiguous windows (bin i covers
/// [i*n/bins, (i+1)*n/bins)) and reports each window's maximum. Empty windows
/// (more bins than values) are omitted.
std::vector<Bin> binned_max(std::span<const std::uint64_t> values, std::size_t bins);

struct WindowedRange {
  std::vector<std::uint64_t> ranges;
  double mean = 0.0;
};

/// max - min over non-overlapping windows of `window` values. A trailing
/// partial window only counts when it is the only window.
WindowedRange windowed_range(std::span<const std::uint64_t> values, std::size_t window);

/// Occupancy histograms in tenths of capacity: bucket i holds nodes with
/// size/C in [i/10, (i+1)/10); full nodes land in bucket 9.
struct Utilization {
  std::array<std::uint64_t, 10> leaf_histogram{};
  std::array<std::uint64_t, 10> internal_histogram{};
  std::uint64_t leaves = 0;
  std::uint64_t internals = 0;
  double pct_below_50_leaf = 0.0;
  double pct_below_50_internal = 0.0;
  double mean_leaf_fill = 0.0;
  double mean_internal_fill = 0.0;
};

/// Counts every node reachable from the root (uncharged).
Utilization utilization(const Tree& tree);

/// Everything the figures need from one sequential run.
struct Summary {
  std::map<std::uint32_t, HeightStats> per_height;
  std::vector<CcdfPoint> fluct_ccdf;
  std::vector<Peak> top_k;
  std::vector<Bin> binned_max;
  Utilization util;
  std::uint64_t inserts = 0;
  std::int64_t max_fluctuation = 0;
  std::uint32_t max_splits = 0;
  std::uint32_t max_header_writes = 0;
  std::uint64_t zero_split_inserts = 0;
  // Zero-split inserts whose total differs from height + 1.
  std::uint64_t floor_mismatches = 0;
};

Summary summarize(std::span<const InsertReport> reports, const Tree& tree, std::size_t bins, std::size_t k);

// --- CSV (column layouts are described in docs/csv-schemas.md) ---

void write_per_height_csv(std::ostream& out, const std::map<std::uint32_t, HeightStats>& stats);
void write_ccdf_csv(std::ostream& out, const std::vector<CcdfPoint>& points);
void write_top_k_csv(std::ostream& out, const std::vector<Peak>& peaks);
void write_binned_max_csv(std::ostream& out, const std::vector<Bin>& bins);
void write_utilization_csv(std::ostream& out, const Utilization& util);

}  // namespace ffbt::metrics
