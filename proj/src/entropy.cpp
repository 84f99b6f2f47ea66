#include "furst/entropy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>
#include <unordered_map>

#include "furst/errors.hpp"
#include "furst/rng.hpp"

namespace furst {
namespace {

void check_level(int level) {
  if (level < 0) throw DomainError("dyadic level must be nonnegative");
  if (level > kLevelCap)
    throw ResolutionError("dyadic level exceeds the resolution cap of 40");
}

// log2(num/den) for positive integers, exact whenever the reduced ratio is
// a power of two. That exactness is what makes uniform, point-mass, and
// free-walk entropies come out on the nose.
double log2_ratio(std::uint64_t num, std::uint64_t den) {
  const std::uint64_t g = std::gcd(num, den);
  const std::uint64_t n = num / g, d = den / g;
  if ((n & (n - 1)) == 0 && (d & (d - 1)) == 0)
    return static_cast<double>(std::bit_width(n)) -
           static_cast<double>(std::bit_width(d));
  return std::log2(static_cast<double>(num)) -
         std::log2(static_cast<double>(den));
}

std::uint64_t cell_of(double x, int level) {
  // Scaling by a power of two is exact, so the cell index is exact.
  return static_cast<std::uint64_t>(std::ldexp(x, level));
}

double entropy_of_span(
    const std::pair<std::uint64_t, std::uint64_t>* begin,
    const std::pair<std::uint64_t, std::uint64_t>* end, std::uint64_t total) {
  double h = 0.0;
  for (const auto* it = begin; it != end; ++it) {
    const double w = static_cast<double>(it->second) / static_cast<double>(total);
    h -= w * log2_ratio(it->second, total);
  }
  return h;
}

void check_points(const std::vector<double>& points) {
  if (points.empty()) throw DomainError("need at least one point");
  for (double x : points)
    if (!(x >= 0.0 && x < 1.0))
      throw DomainError("points must lie in [0,1)");
}

}  // namespace

DyadicHistogram histogram(const std::vector<double>& points, int level) {
  check_level(level);
  check_points(points);
  std::vector<std::uint64_t> idx;
  idx.reserve(points.size());
  for (double x : points) idx.push_back(cell_of(x, level));
  std::sort(idx.begin(), idx.end());
  DyadicHistogram h;
  h.level = level;
  h.total = idx.size();
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && idx[j] == idx[i]) ++j;
    h.cells.emplace_back(idx[i], j - i);
    i = j;
  }
  return h;
}

double shannon_entropy(const DyadicHistogram& h, bool bias_correct) {
  if (h.total == 0) throw DomainError("histogram has no mass");
  double e = entropy_of_span(h.cells.data(), h.cells.data() + h.cells.size(),
                             h.total);
  if (bias_correct)
    e += static_cast<double>(h.cells.size() - 1) /
         (2.0 * static_cast<double>(h.total) * std::numbers::ln2);
  return e;
}

DyadicHistogram coarsen(const DyadicHistogram& h, int level) {
  check_level(level);
  if (level > h.level)
    throw DomainError("coarsen target must not exceed the source level");
  const int shift = h.level - level;
  DyadicHistogram out;
  out.level = level;
  out.total = h.total;
  for (const auto& [cell, count] : h.cells) {
    const std::uint64_t coarse = cell >> shift;
    if (!out.cells.empty() && out.cells.back().first == coarse)
      out.cells.back().second += count;
    else
      out.cells.emplace_back(coarse, count);
  }
  return out;
}

DyadicHistogram merge(const DyadicHistogram& a, const DyadicHistogram& b) {
  if (a.level != b.level)
    throw DomainError("merge requires histograms at the same level");
  DyadicHistogram out;
  out.level = a.level;
  out.total = a.total + b.total;
  out.cells.reserve(a.cells.size() + b.cells.size());
  std::size_t i = 0, j = 0;
  while (i < a.cells.size() || j < b.cells.size()) {
    if (j == b.cells.size() ||
        (i < a.cells.size() && a.cells[i].first < b.cells[j].first)) {
      out.cells.push_back(a.cells[i++]);
    } else if (i == a.cells.size() || b.cells[j].first < a.cells[i].first) {
      out.cells.push_back(b.cells[j++]);
    } else {
      out.cells.emplace_back(a.cells[i].first,
                             a.cells[i].second + b.cells[j].second);
      ++i;
      ++j;
    }
  }
  return out;
}

double tv_distance(const DyadicHistogram& a, const DyadicHistogram& b) {
  if (a.level != b.level)
    throw DomainError("tv_distance requires histograms at the same level");
  if (a.total == 0 || b.total == 0)
    throw DomainError("tv_distance requires nonempty histograms");
  const double na = static_cast<double>(a.total);
  const double nb = static_cast<double>(b.total);
  double tv = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.cells.size() || j < b.cells.size()) {
    if (j == b.cells.size() ||
        (i < a.cells.size() && a.cells[i].first < b.cells[j].first)) {
      tv += static_cast<double>(a.cells[i++].second) / na;
    } else if (i == a.cells.size() || b.cells[j].first < a.cells[i].first) {
      tv += static_cast<double>(b.cells[j++].second) / nb;
    } else {
      tv += std::abs(static_cast<double>(a.cells[i].second) / na -
                     static_cast<double>(b.cells[j].second) / nb);
      ++i;
      ++j;
    }
  }
  return tv / 2.0;
}

double conditional_entropy(const std::vector<double>& points, int m, int n) {
  check_level(m);
  if (n < 0 || n >= m)
    throw DomainError("conditional entropy needs 0 <= n < m");
  DyadicHistogram fine = histogram(points, m);
  return shannon_entropy(fine) - shannon_entropy(coarsen(fine, n));
}

DyadicHistogram component(const std::vector<double>& points, double x, int i,
                          int m) {
  if (i < 0 || m < 0) throw DomainError("component levels must be nonnegative");
  check_level(i + m);
  if (!(x >= 0.0 && x < 1.0)) throw DomainError("x must lie in [0,1)");
  check_points(points);
  const std::uint64_t cell = cell_of(x, i);
  std::vector<double> local;
  for (double y : points) {
    if (cell_of(y, i) != cell) continue;
    local.push_back(std::ldexp(y, i) - static_cast<double>(cell));
  }
  if (local.empty())
    throw EmptyComponent("no points in the level-i cell of x");
  return histogram(local, m);
}

std::vector<double> entropy_by_level(const std::vector<double>& points,
                                     int k_max) {
  check_level(k_max);
  std::vector<double> h(static_cast<std::size_t>(k_max) + 1);
  DyadicHistogram cur = histogram(points, k_max);
  h[static_cast<std::size_t>(k_max)] = shannon_entropy(cur);
  for (int k = k_max - 1; k >= 0; --k) {
    cur = coarsen(cur, k);
    h[static_cast<std::size_t>(k)] = shannon_entropy(cur);
  }
  return h;
}

double mean_component_entropy(const std::vector<double>& points, int n,
                              int m) {
  if (n < 1 || m < 1) throw DomainError("needs n >= 1 and m >= 1");
  check_level(n + m);
  std::vector<double> h = entropy_by_level(points, n + m);
  double acc = 0.0;
  for (int i = 1; i <= n; ++i) acc += h[i + m] - h[i];
  return acc / (static_cast<double>(n) * static_cast<double>(m));
}

PorosityProfile porosity_profile(const std::vector<double>& points, double h,
                                 double delta, int m, int n1, int n2,
                                 int probes, std::uint64_t seed) {
  if (m < 1) throw DomainError("porosity needs m >= 1");
  if (n1 < 0 || n2 <= n1) throw DomainError("porosity needs 0 <= n1 < n2");
  if (probes < 1) throw DomainError("porosity needs probes >= 1");
  check_level(n2 + m);
  check_points(points);

  // One fine histogram per level; a component is a contiguous cell slice.
  std::vector<DyadicHistogram> fine;
  fine.reserve(static_cast<std::size_t>(n2 - n1) + 1);
  DyadicHistogram top = histogram(points, n2 + m);
  for (int i = n2; i >= n1; --i) {
    fine.push_back(i == n2 ? top : coarsen(top, i + m));
  }
  std::reverse(fine.begin(), fine.end());  // fine[i - n1] has level i + m

  SplitMix64 rng(seed);
  PorosityProfile out;
  out.h = h;
  out.delta = delta;
  out.m = m;
  out.n1 = n1;
  out.n2 = n2;
  out.samples = probes;
  int hits = 0;
  for (int p = 0; p < probes; ++p) {
    for (;;) {
      const int i = n1 + static_cast<int>(rng.below(
                             static_cast<std::uint64_t>(n2 - n1) + 1));
      const double x = points[rng.below(points.size())];
      const DyadicHistogram& fh = fine[static_cast<std::size_t>(i - n1)];
      const std::uint64_t lo = cell_of(x, i) << m;
      const std::uint64_t hi = lo + (std::uint64_t{1} << m);
      const auto* begin =
          std::lower_bound(fh.cells.data(), fh.cells.data() + fh.cells.size(),
                           lo, [](const auto& c, std::uint64_t v) {
                             return c.first < v;
                           });
      const auto* end =
          std::lower_bound(begin, fh.cells.data() + fh.cells.size(), hi,
                           [](const auto& c, std::uint64_t v) {
                             return c.first < v;
                           });
      std::uint64_t mass = 0;
      for (const auto* it = begin; it != end; ++it) mass += it->second;
      if (mass == 0) {  // unreachable when x comes from the points
        ++out.resampled_empty;
        continue;
      }
      const double ce = entropy_of_span(begin, end, mass);
      if (ce / m <= h + delta) ++hits;
      break;
    }
  }
  out.fraction = static_cast<double>(hits) / probes;
  out.empty_rate = static_cast<double>(out.resampled_empty) /
                   (static_cast<double>(probes) + out.resampled_empty);
  return out;
}

DyadicHistogram circle_convolve(const DyadicHistogram& a,
                                const DyadicHistogram& b) {
  if (a.level != b.level)
    throw DomainError("convolution requires histograms at the same level");
  if (a.total == 0 || b.total == 0) throw DomainError("histogram has no mass");
  if (a.total > (std::uint64_t{1} << 32) || b.total > (std::uint64_t{1} << 32))
    throw DomainError("convolution totals above 2^32 would overflow counts");
  const std::uint64_t mask = (std::uint64_t{1} << a.level) - 1;
  std::unordered_map<std::uint64_t, std::uint64_t> acc;
  acc.reserve(a.cells.size() * 2);
  for (const auto& [ca, na] : a.cells)
    for (const auto& [cb, nb] : b.cells) acc[(ca + cb) & mask] += na * nb;
  DyadicHistogram out;
  out.level = a.level;
  out.total = a.total * b.total;
  out.cells.assign(acc.begin(), acc.end());
  std::sort(out.cells.begin(), out.cells.end());
  return out;
}

void write_histogram_csv(const DyadicHistogram& h, std::ostream& out) {
  if (h.level > 24)
    throw ResolutionError("dense CSV format refuses level > 24");
  out << h.level << ',' << h.total << '\n';
  std::uint64_t next = 0;
  for (const auto& [cell, count] : h.cells) {
    for (; next < cell; ++next) out << 0 << '\n';
    out << count << '\n';
    next = cell + 1;
  }
  for (const std::uint64_t cap = std::uint64_t{1} << h.level; next < cap;
       ++next)
    out << 0 << '\n';
}

DyadicHistogram read_histogram_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty histogram CSV");
  const std::size_t comma = line.find(',');
  if (comma == std::string::npos)
    throw ConfigError("histogram CSV header must be level,total");
  DyadicHistogram h;
  std::uint64_t declared_total = 0;
  try {
    h.level = std::stoi(line.substr(0, comma));
    declared_total = std::stoull(line.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("bad histogram CSV header: " + line);
  }
  if (h.level < 0 || h.level > 24)
    throw ConfigError("histogram CSV level out of range");
  const std::uint64_t cap = std::uint64_t{1} << h.level;
  for (std::uint64_t cell = 0; cell < cap; ++cell) {
    if (!std::getline(in, line))
      throw ConfigError("histogram CSV is missing count rows");
    std::uint64_t count = 0;
    try {
      count = std::stoull(line);
    } catch (const std::exception&) {
      throw ConfigError("bad histogram CSV count: " + line);
    }
    if (count > 0) h.cells.emplace_back(cell, count);
    h.total += count;
  }
  if (h.total != declared_total)
    throw ConfigError("histogram CSV total does not match counts");
  if (h.total == 0) throw ConfigError("histogram CSV has no mass");
  return h;
}

}  // namespace furst
