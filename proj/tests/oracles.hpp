#pragma once

// Brute-force references used only by tests. None of these call into the
// library; they are written from the formulas so a shared bug cannot hide.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Points = std::vector<std::vector<double>>;

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// Full O(n^2) distance table, sort each row, average inverse of the K smallest.
inline std::vector<double> densities(const Points& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<double> lambda(n, 0.0);
  if (n < 2) return lambda;
  const std::size_t kk = std::min(k, n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(std::max(euclid(pts[i], pts[j]), 1e-12));
    std::sort(row.begin(), row.end());
    double acc = 0.0;
    for (std::size_t m = 0; m < kk; ++m) acc += 1.0 / row[m];
    lambda[i] = acc / static_cast<double>(kk);
  }
  return lambda;
}

inline double entropy_bits(const Points& pts, std::size_t k) {
  if (pts.size() < 2) return 0.0;
  const auto lambda = densities(pts, k);
  double total = 0.0;
  for (double l : lambda) total += l;
  double h = 0.0;
  for (double l : lambda) {
    const double g = l / total;
    if (g > 0.0) h -= g * std::log(g) / std::log(2.0);
  }
  return h;
}

// Textbook DBSCAN with Chebyshev radius; noise may later become a border point
// of the first cluster that reaches it. Returns surviving clusters as sorted
// index lists, the whole set sorted.
struct Vox {
  int x, y;
};

inline std::vector<std::vector<std::size_t>> dbscan(const std::vector<Vox>& v, int eps, std::size_t min_pts,
                                                    std::size_t min_size) {
  const std::size_t n = v.size();
  // First occurrence wins; later duplicates are dropped.
  std::vector<bool> live(n, true);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (live[j] && v[j].x == v[i].x && v[j].y == v[i].y) live[i] = false;
  auto neigh = [&](std::size_t i) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < n; ++j)
      if (live[j] && std::abs(v[i].x - v[j].x) <= eps && std::abs(v[i].y - v[j].y) <= eps) out.push_back(j);
    return out;
  };
  constexpr int kUnset = -2, kNoise = -1;
  std::vector<int> label(n, kUnset);
  int c = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!live[i] || label[i] != kUnset) continue;
    auto nb = neigh(i);
    if (nb.size() < min_pts) {
      label[i] = kNoise;
      continue;
    }
    label[i] = c;
    std::vector<std::size_t> queue(nb.begin(), nb.end());
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t j = queue[q];
      if (label[j] == kNoise) label[j] = c;
      if (label[j] != kUnset) continue;
      label[j] = c;
      auto nb2 = neigh(j);
      if (nb2.size() >= min_pts) queue.insert(queue.end(), nb2.begin(), nb2.end());
    }
    ++c;
  }
  std::vector<std::vector<std::size_t>> groups(static_cast<std::size_t>(c));
  for (std::size_t i = 0; i < n; ++i)
    if (live[i] && label[i] >= 0) groups[static_cast<std::size_t>(label[i])].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& g : groups)
    if (g.size() >= min_size) out.push_back(g);
  std::sort(out.begin(), out.end());
  return out;
}

// Even-odd crossing test with the half-open rule on y.
inline bool ray_inside(double px, double py, const std::vector<std::pair<double, double>>& poly) {
  bool in = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto [xi, yi] = poly[i];
    const auto [xj, yj] = poly[j];
    if ((yi > py) != (yj > py)) {
      const double x = xj + (py - yj) * (xi - xj) / (yi - yj);
      if (px < x) in = !in;
    }
  }
  return in;
}

inline double seg_dist(double px, double py, std::pair<double, double> a, std::pair<double, double> b) {
  const double dx = b.first - a.first, dy = b.second - a.second;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((px - a.first) * dx + (py - a.second) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (a.first + t * dx), py - (a.second + t * dy));
}

// Mean absolute difference form: sum_ij |a_i - a_j| / (2 n sum a).
inline double gini(const std::vector<double>& a) {
  double num = 0.0, sum = 0.0;
  for (double x : a) {
    sum += x;
    for (double y : a) num += std::abs(x - y);
  }
  return num / (2.0 * static_cast<double>(a.size()) * sum);
}

// |X_k| for k = 1..N/2 by the O(N^2) definition.
inline std::vector<double> dft_magnitudes(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    std::complex<double> acc{};
    for (std::size_t t = 0; t < n; ++t)
      acc += x[t] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n));
    out.push_back(std::abs(acc));
  }
  return out;
}

// The SOZ rule read off its prose: a single confined cluster, not sine-sparse,
// transient-sparse, mostly gray, and any white-matter reach comes with vascular reach.
inline bool soz_rule(bool p1, bool ps, bool pa, bool pg, bool pw, bool pv) {
  if (!p1 || ps || !pa || !pg) return false;
  if (pw && !pv) return false;
  return true;
}

// Decision table for one stage. Returns "rare", "overlap" or "non_rare".
inline std::string fuse_table(bool dl_overlap, bool k_rare, double conf, double t_c) {
  if (!dl_overlap) return k_rare ? "rare" : "non_rare";
  if (k_rare && conf > t_c) return "rare";
  return "overlap";
}

// Label set validity by counting memberships.
inline bool label_set_ok(const std::vector<std::pair<std::string, std::vector<std::string>>>& supers,
                         const std::vector<std::string>& classes) {
  std::map<std::string, int> seen;
  std::set<std::string> names;
  for (const auto& [name, members] : supers) {
    if (members.empty() || !names.insert(name).second) return false;
    for (const auto& m : members) {
      if (std::find(classes.begin(), classes.end(), m) == classes.end()) return false;
      ++seen[m];
    }
  }
  for (const auto& c : classes)
    if (seen[c] != 1) return false;
  return true;
}

struct Counts {
  double tp, fp, fn, tn;
};

inline Counts binary_counts(const std::vector<std::string>& pred, const std::vector<std::string>& truth,
                            const std::string& pos) {
  Counts c{0, 0, 0, 0};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == pos, t = truth[i] == pos;
    if (p && t) c.tp += 1;
    else if (p) c.fp += 1;
    else if (t) c.fn += 1;
    else c.tn += 1;
  }
  return c;
}

}  // namespace oracle
