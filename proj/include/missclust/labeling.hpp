#pragma once

#include <stdexcept>
#include <vector>

namespace missclust {

// Cluster assignment, one label in [0, k) per individual.
struct Labeling {
  std::vector<int> labels;
  int k = 0;

  Labeling() = default;
  Labeling(std::vector<int> l, int k_) : labels(std::move(l)), k(k_) {
    if (k <= 0) throw std::invalid_argument("Labeling: k must be positive");
    for (int v : labels)
      if (v < 0 || v >= k) throw std::invalid_argument("Labeling: label out of range");
  }

  std::size_t size() const { return labels.size(); }

  friend bool operator==(const Labeling& a, const Labeling& b) {
    return a.k == b.k && a.labels == b.labels;
  }
};

}  // namespace missclust
