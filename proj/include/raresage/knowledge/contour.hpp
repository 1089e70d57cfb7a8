#pragma once

#include <cstddef>
#include <vector>

#include "raresage/knowledge/geometry.hpp"

namespace raresage::soz {

/// Row-major grayscale image, pixel (x, y) at index y * width + x, y down.
struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }
};

/// 3x3 Sobel gradient magnitude, replicated borders.
std::vector<double> sobel_magnitude(const GrayImage& image);

/// Otsu threshold over a 256-bin histogram of `values` on [0, max].
double otsu_threshold(const std::vector<double>& values);

/// Brain boundary: Sobel magnitude, Otsu-thresholded to an edge mask, outer
/// boundary of the largest 8-connected edge component traced by Moore-neighbour
/// tracing. Vertices are pixel centres (x + 0.5, y + 0.5).
/// Throws UndefinedError when the image has no edge pixels.
Polygon extract_brain_contour(const GrayImage& image);

}  // namespace raresage::soz
