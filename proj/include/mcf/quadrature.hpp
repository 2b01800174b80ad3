#pragma once

#include <cstddef>
#include <vector>

namespace mcf {

struct GaussRule {
  std::vector<double> nodes;    // ascending, in (-1, 1)
  std::vector<double> weights;  // sum to 2
};

/// Gauss-Legendre rule with `count` nodes on [-1, 1].
GaussRule gauss_legendre(std::size_t count);

}  // namespace mcf
