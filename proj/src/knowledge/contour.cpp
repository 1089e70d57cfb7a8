#include "raresage/knowledge/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <optional>

#include "raresage/error.hpp"

namespace raresage::soz {

std::vector<double> sobel_magnitude(const GrayImage& image) {
  const auto w = static_cast<long>(image.width);
  const auto h = static_cast<long>(image.height);
  auto px = [&](long x, long y) {
    x = std::clamp(x, 0L, w - 1);
    y = std::clamp(y, 0L, h - 1);
    return image.pixels[static_cast<std::size_t>(y * w + x)];
  };
  std::vector<double> mag(image.pixels.size());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const double gx = (px(x + 1, y - 1) + 2 * px(x + 1, y) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x - 1, y) + px(x - 1, y + 1));
      const double gy = (px(x - 1, y + 1) + 2 * px(x, y + 1) + px(x + 1, y + 1)) -
                        (px(x - 1, y - 1) + 2 * px(x, y - 1) + px(x + 1, y - 1));
      mag[static_cast<std::size_t>(y * w + x)] = std::hypot(gx, gy);
    }
  }
  return mag;
}

double otsu_threshold(const std::vector<double>& values) {
  constexpr std::size_t kBins = 256;
  double hi = 0.0;
  for (double v : values) hi = std::max(hi, v);
  if (!(hi > 0.0)) return 0.0;
  std::array<double, kBins> hist{};
  for (double v : values) {
    auto b = static_cast<std::size_t>(v / hi * (kBins - 1));
    hist[std::min(b, kBins - 1)] += 1.0;
  }
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (std::size_t b = 0; b < kBins; ++b) sum_all += static_cast<double>(b) * hist[b];

  double w0 = 0.0, sum0 = 0.0, best = -1.0;
  std::size_t best_bin = 0;
  for (std::size_t b = 0; b < kBins; ++b) {
    w0 += hist[b];
    sum0 += static_cast<double>(b) * hist[b];
    const double w1 = total - w0;
    if (w0 == 0.0 || w1 == 0.0) continue;
    const double m0 = sum0 / w0;
    const double m1 = (sum_all - sum0) / w1;
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      best_bin = b;
    }
  }
  // Values in bins <= best_bin are background.
  return (static_cast<double>(best_bin) + 1.0) / (kBins - 1) * hi;
}

namespace {

// Clockwise in a y-down frame, starting west.
constexpr std::array<std::array<int, 2>, 8> kDirs{{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}}};

int direction_of(int dx, int dy) {
  for (int d = 0; d < 8; ++d) {
    if (kDirs[d][0] == dx && kDirs[d][1] == dy) return d;
  }
  return -1;
}

}  // namespace

Polygon extract_brain_contour(const GrayImage& image) {
  if (image.width == 0 || image.height == 0 || image.pixels.size() != image.width * image.height) {
    throw ValidationError("image is empty or its pixel count does not match its size");
  }
  const auto mag = sobel_magnitude(image);
  double hi = 0.0;
  for (double v : mag) hi = std::max(hi, v);
  if (!(hi > 0.0)) throw UndefinedError("empty contour: image has no edge pixels");
  const double t = otsu_threshold(mag);

  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<char> edge(mag.size());
  for (std::size_t i = 0; i < mag.size(); ++i) edge[i] = mag[i] >= t ? 1 : 0;
  auto fg = [&](int x, int y) {
    return x >= 0 && y >= 0 && x < w && y < h && edge[static_cast<std::size_t>(y * w + x)];
  };

  // Largest 8-connected component; its first raster pixel starts the trace.
  std::vector<int> comp(mag.size(), -1);
  int best_comp = -1;
  std::size_t best_size = 0, best_start = 0;
  int next_id = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto idx = static_cast<std::size_t>(y * w + x);
      if (!edge[idx] || comp[idx] >= 0) continue;
      const int id = next_id++;
      std::size_t size = 0;
      std::deque<std::pair<int, int>> queue{{x, y}};
      comp[idx] = id;
      while (!queue.empty()) {
        auto [cx, cy] = queue.front();
        queue.pop_front();
        ++size;
        for (const auto& d : kDirs) {
          const int nx = cx + d[0], ny = cy + d[1];
          if (!fg(nx, ny)) continue;
          auto& c = comp[static_cast<std::size_t>(ny * w + nx)];
          if (c < 0) {
            c = id;
            queue.emplace_back(nx, ny);
          }
        }
      }
      if (size > best_size) {
        best_size = size;
        best_comp = id;
        best_start = idx;
      }
    }
  }
  if (best_comp < 0) throw UndefinedError("empty contour: no edge pixels above threshold");

  auto in_comp = [&](int x, int y) {
    return fg(x, y) && comp[static_cast<std::size_t>(y * w + x)] == best_comp;
  };

  const int sx = static_cast<int>(best_start % image.width);
  const int sy = static_cast<int>(best_start / image.width);
  Polygon contour{{sx + 0.5, sy + 0.5}};
  int px = sx, py = sy;
  int back = 0;  // west of the start pixel is background
  std::optional<std::pair<int, int>> first_move;
  const std::size_t limit = 4 * mag.size() + 8;
  for (std::size_t step = 0; step < limit; ++step) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      if (in_comp(px + kDirs[d][0], py + kDirs[d][1])) {
        found = d;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const int qx = px + kDirs[found][0], qy = py + kDirs[found][1];
    // Stop when the start pixel would be left the same way as the first time.
    if (px == sx && py == sy && first_move && *first_move == std::pair{qx, qy}) break;
    if (!first_move) first_move = std::pair{qx, qy};
    const int prev = (found + 7) % 8;
    const int bx = px + kDirs[prev][0], by = py + kDirs[prev][1];
    px = qx;
    py = qy;
    back = direction_of(bx - px, by - py);
    if (!(px == sx && py == sy)) contour.push_back({px + 0.5, py + 0.5});
  }
  if (contour.size() < 3) throw UndefinedError("empty contour: edge component too small");
  return contour;
}

}  // namespace raresage::soz
