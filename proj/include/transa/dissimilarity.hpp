#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

namespace transa {

enum class Dissimilarity { L1, L2, L2Squared };

std::string to_string(Dissimilarity d);
Dissimilarity dissimilarity_from_string(const std::string& name);  // "l1" | "l2" | "l2sq"

// Score-side norm of a residual vector: |v|_1, |v|_2 or |v|_2^2.
inline double residual_norm(std::span<const double> v, Dissimilarity d) {
  double acc = 0.0;
  switch (d) {
    case Dissimilarity::L1:
      for (double x : v) acc += std::fabs(x);
      return acc;
    case Dissimilarity::L2:
      for (double x : v) acc += x * x;
      return std::sqrt(acc);
    case Dissimilarity::L2Squared:
      for (double x : v) acc += x * x;
      return acc;
  }
  return acc;
}

// Margin computations use a degree-1 homogeneous norm: L1 when the model
// scores with L1, plain L2 otherwise (including the squared-L2 score).
inline double margin_norm(std::span<const double> v, Dissimilarity d) {
  double acc = 0.0;
  if (d == Dissimilarity::L1) {
    for (double x : v) acc += std::fabs(x);
    return acc;
  }
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline double margin_distance(std::span<const double> a, std::span<const double> b,
                              Dissimilarity d) {
  double acc = 0.0;
  if (d == Dissimilarity::L1) {
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::fabs(a[i] - b[i]);
    return acc;
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

}  // namespace transa
