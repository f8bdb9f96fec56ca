#pragma once

#include <string>
#include <vector>

#include "pnmn/graph.hpp"

namespace pnmn::ad {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_input;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares reverse-mode gradients of a scalar output against central finite
/// differences for every element of the named inputs (all differentiable
/// inputs when `names` is empty). The error for one element is
/// |analytic - numeric| / max(1, |numeric|).
///
/// Leaves the graph evaluated at its original input values.
GradCheckResult finite_difference_check(Graph& graph, Var output, double step,
                                        const std::vector<std::string>& names = {});

}  // namespace pnmn::ad
