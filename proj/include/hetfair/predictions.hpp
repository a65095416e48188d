#pragma once

#include <vector>

#include "hetfair/graph.hpp"

namespace hetfair {

/// Hard class predictions with the class-1 probability they were cut from.
/// predicted[u] == 1 iff prob_class1[u] >= 0.5.
struct Predictions {
  LabelVector predicted;
  std::vector<double> prob_class1;

  std::size_t size() const { return predicted.size(); }
  static Predictions from_probabilities(std::vector<double> prob_class1);
};

}  // namespace hetfair
