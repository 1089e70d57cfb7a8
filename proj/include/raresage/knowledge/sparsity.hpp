#pragma once

#include <span>
#include <vector>

namespace raresage::soz {

/// Gini sparsity of a nonnegative vector:
///   G = sum_k (2k - n - 1) a_(k) / (n * sum a),  a sorted ascending, k = 1..n.
/// 0 for a constant vector, (n-1)/n for a one-hot vector.
/// Throws UndefinedError when every entry is zero, ValidationError on a
/// negative or non-finite entry or an empty vector.
double gini_index(std::span<const double> values);

/// |DFT| at bins 1..N/2 (DC excluded).
std::vector<double> spectrum_magnitudes(std::span<const double> signal);

/// Gini index of the magnitude spectrum, bins 1..N/2. Needs N >= 16.
double sine_sparsity(std::span<const double> signal);

/// Zero-pads to the next power of two (at least 16).
std::vector<double> pad_pow2(std::span<const double> signal);

/// Detail coefficients of a full multilevel orthonormal Haar decomposition,
/// finest level first. Input length must be a power of two.
std::vector<double> haar_details(std::span<const double> signal);

/// Gini index of |Haar detail coefficients| of the zero-padded signal.
/// Stand-in for an activelet basis: transient-adapted, pluggable.
double wavelet_sparsity(std::span<const double> signal);

}  // namespace raresage::soz
