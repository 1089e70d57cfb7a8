#include "raresage/rarity.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "raresage/error.hpp"

namespace raresage {

const char* to_string(Metric metric) {
  return metric == Metric::cosine ? "cosine" : "euclidean";
}

Metric parse_metric(const std::string& name) {
  if (name == "euclidean") return Metric::euclidean;
  if (name == "cosine") return Metric::cosine;
  throw ConfigError("unknown metric '" + name + "' (expected euclidean|cosine)");
}

double distance(std::span<const double> a, std::span<const double> b, Metric metric) {
  if (metric == Metric::euclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double d = a[j] - b[j];
      s += d * d;
    }
    return std::sqrt(s);
  }
  return std::max(0.0, 1.0 - cosine_similarity(a, b));
}

std::vector<double> knn_densities(std::span<const std::vector<double>> points, std::size_t k,
                                  Metric metric) {
  const std::size_t n = points.size();
  if (n < 2) throw DegenerateClassError("need at least two points for a neighbour density");
  if (k == 0) throw ValidationError("neighbour count must be positive");
  k = std::min(k, n - 1);

  std::vector<double> density(n);
  // Max-heap of the k smallest (distance, index) pairs seen so far.
  std::vector<std::pair<double, std::size_t>> heap;
  heap.reserve(k + 1);
  for (std::size_t i = 0; i < n; ++i) {
    heap.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = std::max(distance(points[i], points[j], metric), kMinDistance);
      if (heap.size() < k) {
        heap.emplace_back(d, j);
        std::push_heap(heap.begin(), heap.end());
      } else if (std::pair{d, j} < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = {d, j};
        std::push_heap(heap.begin(), heap.end());
      }
    }
    double s = 0.0;
    for (const auto& [d, j] : heap) s += 1.0 / d;
    density[i] = s / static_cast<double>(heap.size());
  }
  return density;
}

double density_entropy(std::span<const double> densities) {
  double total = 0.0;
  for (double v : densities) total += v;
  if (!(total > 0.0)) return 0.0;
  double theta = 0.0;
  for (double v : densities) {
    const double g = v / total;
    if (g > 0.0) theta -= g * std::log2(g);
  }
  return theta;
}

double point_entropy(std::span<const std::vector<double>> points, std::size_t k, Metric metric) {
  if (points.size() <= 1) return 0.0;
  auto lambda = knn_densities(points, k, metric);
  return density_entropy(lambda);
}

namespace {

std::vector<std::vector<double>> class_points(const Dataset& ds, const std::string& cls) {
  std::vector<std::vector<double>> pts;
  for (auto i : ds.indices_of(cls)) pts.push_back(ds[i].features);
  return pts;
}

}  // namespace

double knn_density(const Dataset& ds, const std::string& cls, std::size_t index, std::size_t k,
                   Metric metric) {
  if (index >= ds.size() || ds[index].label != cls) {
    throw ValidationError("observation " + std::to_string(index) + " is not labeled '" + cls + "'");
  }
  const auto members = ds.indices_of(cls);
  if (members.size() < 2) {
    throw DegenerateClassError("class '" + cls + "' has fewer than two members");
  }
  std::vector<std::vector<double>> pts;
  std::size_t pos = 0;
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (members[m] == index) pos = m;
    pts.push_back(ds[members[m]].features);
  }
  return knn_densities(pts, k, metric)[pos];
}

double class_entropy(const Dataset& ds, const std::string& cls, std::size_t k, Metric metric) {
  ds.class_index(cls);
  return point_entropy(class_points(ds, cls), k, metric);
}

double EntropyProfile::theta_of(const std::string& cls) const {
  auto it = std::find(classes.begin(), classes.end(), cls);
  if (it == classes.end()) throw ValidationError("class '" + cls + "' not in profile");
  return theta[static_cast<std::size_t>(it - classes.begin())];
}

EntropyProfile profile_from_thetas(std::vector<std::string> classes, std::vector<double> theta,
                                   std::size_t k, Metric metric) {
  if (classes.size() != theta.size() || classes.empty()) {
    throw ValidationError("profile needs one θ per class and at least one class");
  }
  EntropyProfile p;
  p.classes = std::move(classes);
  p.theta = std::move(theta);
  p.k = k;
  p.metric = metric;
  const double m = static_cast<double>(p.theta.size());
  double sum = 0.0;
  for (double t : p.theta) sum += t;
  p.mean = sum / m;
  double sq = 0.0;
  for (double t : p.theta) sq += (t - p.mean) * (t - p.mean);
  p.stddev = std::sqrt(sq / m);
  return p;
}

EntropyProfile entropy_profile(const Dataset& ds, std::size_t k, Metric metric) {
  std::vector<double> theta;
  for (const auto& c : ds.classes()) {
    if (ds.count_of(c) == 0) throw ValidationError("class '" + c + "' has no observations");
    theta.push_back(class_entropy(ds, c, k, metric));
  }
  return profile_from_thetas(ds.classes(), std::move(theta), k, metric);
}

bool RarityVerdict::is_rare(const std::string& cls) const {
  return std::find(rare_classes.begin(), rare_classes.end(), cls) != rare_classes.end();
}

RarityVerdict identify_rare(const EntropyProfile& profile, double multiplier) {
  if (!(multiplier > 0.0)) throw ConfigError("rarity multiplier must be positive");
  RarityVerdict v;
  v.multiplier = multiplier;
  double scale = 0.0;
  for (double t : profile.theta) scale = std::max(scale, std::abs(t));
  const double bound = multiplier * profile.stddev;
  const double noise = 1e-12 * scale;
  double best = -1.0;
  for (std::size_t i = 0; i < profile.theta.size(); ++i) {
    const double dev = std::abs(profile.theta[i] - profile.mean);
    v.deviation.push_back(dev);
    if (dev > bound && dev - bound > noise) {
      v.rare_classes.push_back(profile.classes[i]);
      if (dev > best) {
        best = dev;
        v.rarest = profile.classes[i];
      }
    }
  }
  return v;
}

std::vector<double> class_centroid(const Dataset& ds, const std::string& cls) {
  const auto members = ds.indices_of(cls);
  if (members.empty()) throw ValidationError("class '" + cls + "' has no observations");
  std::vector<double> c(ds.dim(), 0.0);
  for (auto i : members) {
    for (std::size_t j = 0; j < c.size(); ++j) c[j] += ds[i].features[j];
  }
  for (double& v : c) v /= static_cast<double>(members.size());
  return c;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    dot += a[j] * b[j];
    na += a[j] * a[j];
    nb += b[j] * b[j];
  }
  if (na == 0.0 || nb == 0.0) throw UndefinedError("cosine similarity of a zero-norm vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

OverlapResult select_overlap(std::vector<std::pair<std::string, double>> similarity) {
  if (similarity.empty()) throw ValidationError("no candidate overlap classes");
  OverlapResult r;
  std::size_t best = 0;
  for (std::size_t i = 1; i < similarity.size(); ++i) {
    if (similarity[i].second > similarity[best].second) best = i;
  }
  r.overlap_class = similarity[best].first;
  r.similarity = std::move(similarity);
  return r;
}

OverlapResult find_overlap_class(const Dataset& ds, const std::string& rare_class) {
  ds.class_index(rare_class);
  if (ds.classes().size() < 2) throw ValidationError("overlap class needs at least two classes");
  auto is_zero = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
  };
  const auto rare_c = class_centroid(ds, rare_class);
  if (is_zero(rare_c)) throw UndefinedError("zero-norm centroid for class '" + rare_class + "'");
  std::vector<std::pair<std::string, double>> sims;
  for (const auto& c : ds.classes()) {
    if (c == rare_class) continue;
    const auto centroid = class_centroid(ds, c);
    if (is_zero(centroid)) throw UndefinedError("zero-norm centroid for class '" + c + "'");
    sims.emplace_back(c, cosine_similarity(rare_c, centroid));
  }
  return select_overlap(std::move(sims));
}

}  // namespace raresage
