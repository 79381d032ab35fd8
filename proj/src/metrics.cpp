#include "ffbt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ffbt/errors.hpp"

namespace ffbt::metrics {

std::int64_t fluctuation_of(const InsertReport& report) {
  const std::int64_t f = static_cast<std::int64_t>(report.total) - static_cast<std::int64_t>(report.height) - 1;
  if (f < 0) {
    throw InvariantViolation("negative fluctuation: total " + std::to_string(report.total) + " at height " +
                             std::to_string(report.height));
  }
  return f;
}

std::uint64_t nearest_rank(std::span<const std::uint64_t> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of an empty sample");
  const double n = static_cast<double>(sorted.size());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::map<std::uint32_t, HeightStats> per_height_stats(std::span<const InsertReport> reports) {
  std::map<std::uint32_t, std::vector<std::uint64_t>> groups;
  for (const InsertReport& r : reports) groups[r.height].push_back(r.total);
  std::map<std::uint32_t, HeightStats> out;
  for (auto& [h, totals] : groups) {
    std::sort(totals.begin(), totals.end());
    out[h] = HeightStats{totals.size(), totals.front(), totals.back(), nearest_rank(totals, 50), nearest_rank(totals, 95)};
  }
  return out;
}

std::vector<CcdfPoint> ccdf(std::span<const std::int64_t> values) {
  std::vector<std::int64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<CcdfPoint> out;
  const double n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i] == sorted[i - 1]) continue;
    out.push_back(CcdfPoint{sorted[i], static_cast<double>(sorted.size() - i) / n});
  }
  return out;
}

std::vector<Peak> top_k(std::span<const std::uint64_t> values, std::size_t k) {
  std::vector<Peak> all;
  all.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) all.push_back(Peak{values[i], i});
  const std::size_t m = std::min(k, all.size());
  auto before = [](const Peak& a, const Peak& b) { return a.value != b.value ? a.value > b.value : a.index < b.index; };
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), before);
  all.resize(m);
  return all;
}

std::vector<Bin> binned_max(std::span<const std::uint64_t> values, std::size_t bins) {
  if (bins == 0) throw ConfigError("binned_max needs at least one bin");
  std::vector<Bin> out;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < bins; ++i) {
    const std::size_t begin = i * n / bins;
    const std::size_t end = (i + 1) * n / bins;
    if (begin == end) continue;
    out.push_back(Bin{begin, end, *std::max_element(values.begin() + begin, values.begin() + end)});
  }
  return out;
}

WindowedRange windowed_range(std::span<const std::uint64_t> values, std::size_t window) {
  if (window == 0) throw ConfigError("windowed_range needs a window of at least one value");
  WindowedRange out;
  for (std::size_t begin = 0; begin < values.size(); begin += window) {
    const std::size_t end = std::min(values.size(), begin + window);
    if (end - begin < window && begin > 0) break;
    const auto [lo, hi] = std::minmax_element(values.begin() + begin, values.begin() + end);
    out.ranges.push_back(*hi - *lo);
  }
  if (!out.ranges.empty()) {
    double sum = 0.0;
    for (const std::uint64_t r : out.ranges) sum += static_cast<double>(r);
    out.mean = sum / static_cast<double>(out.ranges.size());
  }
  return out;
}

Utilization utilization(const Tree& tree) {
  Utilization u;
  const double cap = static_cast<double>(tree.capacity());
  double leaf_fill = 0.0;
  double internal_fill = 0.0;
  std::uint64_t leaf_low = 0;
  std::uint64_t internal_low = 0;
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    const Node& node = tree.peek(stack.back());
    stack.pop_back();
    const double fill = static_cast<double>(node.size()) / cap;
    const auto bucket = std::min<std::size_t>(9, static_cast<std::size_t>(fill * 10.0));
    if (node.is_leaf()) {
      ++u.leaves;
      ++u.leaf_histogram[bucket];
      leaf_fill += fill;
      leaf_low += fill < 0.5 ? 1 : 0;
    } else {
      ++u.internals;
      ++u.internal_histogram[bucket];
      internal_fill += fill;
      internal_low += fill < 0.5 ? 1 : 0;
      for (const NodeId c : node.children()) stack.push_back(c);
    }
  }
  if (u.leaves > 0) {
    u.pct_below_50_leaf = 100.0 * static_cast<double>(leaf_low) / static_cast<double>(u.leaves);
    u.mean_leaf_fill = leaf_fill / static_cast<double>(u.leaves);
  }
  if (u.internals > 0) {
    u.pct_below_50_internal = 100.0 * static_cast<double>(internal_low) / static_cast<double>(u.internals);
    u.mean_internal_fill = internal_fill / static_cast<double>(u.internals);
  }
  return u;
}

Summary summarize(std::span<const InsertReport> reports, const Tree& tree, std::size_t bins, std::size_t k) {
  Summary s;
  s.inserts = reports.size();
  s.per_height = per_height_stats(reports);
  std::vector<std::int64_t> fluct;
  std::vector<std::uint64_t> totals;
  fluct.reserve(reports.size());
  totals.reserve(reports.size());
  for (const InsertReport& r : reports) {
    const std::int64_t f = fluctuation_of(r);
    fluct.push_back(f);
    totals.push_back(r.total);
    s.max_fluctuation = std::max(s.max_fluctuation, f);
    s.max_splits = std::max(s.max_splits, r.splits);
    s.max_header_writes = std::max(s.max_header_writes, r.header_writes);
    if (r.splits == 0) {
      ++s.zero_split_inserts;
      if (r.total != r.height + 1) ++s.floor_mismatches;
    }
  }
  s.fluct_ccdf = ccdf(fluct);
  s.top_k = top_k(totals, k);
  s.binned_max = binned_max(totals, bins);
  s.util = utilization(tree);
  return s;
}

void write_per_height_csv(std::ostream& out, const std::map<std::uint32_t, HeightStats>& stats) {
  out << "height,count,min,max,p50,p95,range\n";
  for (const auto& [h, s] : stats) {
    out << h << ',' << s.count << ',' << s.min << ',' << s.max << ',' << s.p50 << ',' << s.p95 << ','
        << (s.max - s.min) << '\n';
  }
}

void write_ccdf_csv(std::ostream& out, const std::vector<CcdfPoint>& points) {
  out << "x,p\n";
  for (const CcdfPoint& p : points) out << p.x << ',' << p.p << '\n';
}

void write_top_k_csv(std::ostream& out, const std::vector<Peak>& peaks) {
  out << "rank,total_io,insert_index\n";
  for (std::size_t i = 0; i < peaks.size(); ++i) out << (i + 1) << ',' << peaks[i].value << ',' << peaks[i].index << '\n';
}

void write_binned_max_csv(std::ostream& out, const std::vector<Bin>& bins) {
  out << "bin,first_insert,last_insert,max_total_io\n";
  for (std::size_t i = 0; i < bins.size(); ++i) {
    out << i << ',' << bins[i].begin << ',' << (bins[i].end - 1) << ',' << bins[i].max << '\n';
  }
}

void write_utilization_csv(std::ostream& out, const Utilization& util) {
  out << "kind,bucket_lo_pct,bucket_hi_pct,nodes\n";
  for (std::size_t i = 0; i < 10; ++i) {
    out << "leaf," << i * 10 << ',' << (i + 1) * 10 << ',' << util.leaf_histogram[i] << '\n';
  }
  for (std::size_t i = 0; i < 10; ++i) {
    out << "internal," << i * 10 << ',' << (i + 1) * 10 << ',' << util.internal_histogram[i] << '\n';
  }
}

}  // namespace ffbt::metrics
