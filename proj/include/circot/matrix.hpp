#pragma once

#include <cstddef>
#include <vector>

namespace circot {

// Dense row-major matrix. Indexing is unchecked; callers validate shapes.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  double max_value() const {
    double m = 0.0;
    for (double v : data) m = v > m ? v : m;
    return m;
  }
};

}  // namespace circot
