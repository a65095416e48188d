#include "hetfair/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hetfair {

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows * cols) {
    throw std::invalid_argument("tensor data of length " + std::to_string(data_.size()) +
                                " does not fit shape (" + std::to_string(rows) + ", " +
                                std::to_string(cols) + ")");
  }
}

std::string Tensor::shape_string() const {
  return "(" + std::to_string(rows_) + ", " + std::to_string(cols_) + ")";
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

}  // namespace hetfair
