#include "pnmn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pnmn::ad {

GradCheckResult finite_difference_check(Graph& graph, Var output, double step,
                                        const std::vector<std::string>& names) {
  if (!(step > 0.0)) throw Error("finite_difference_check: step must be positive");
  if (graph.shape(output) != Shape{1, 1}) {
    throw Error("finite_difference_check: output must be scalar, got " + to_string(graph.shape(output)));
  }
  if (!graph.evaluated()) graph.forward();

  std::vector<std::pair<std::string, Var>> targets;
  if (names.empty()) {
    targets = graph.inputs();
  } else {
    for (const auto& name : names) {
      Var v = graph.find_input(name);
      if (!v.valid()) throw Error("finite_difference_check: unknown input '" + name + "'");
      targets.emplace_back(name, v);
    }
  }

  graph.backward(output);
  std::map<std::string, Array> analytic;
  std::map<std::string, Array> base;
  for (const auto& [name, v] : targets) {
    analytic[name] = graph.grad(v);
    base[name] = graph.value(v);
  }

  GradCheckResult result;
  for (const auto& [name, v] : targets) {
    Array probe = base[name];
    for (std::size_t i = 0; i < probe.size(); ++i) {
      const double x0 = probe[i];
      probe[i] = x0 + step;
      graph.forward({{name, probe}});
      const double up = graph.value(output)[0];
      probe[i] = x0 - step;
      graph.forward({{name, probe}});
      const double down = graph.value(output)[0];
      probe[i] = x0;
      const double numeric = (up - down) / (2.0 * step);
      const double a = analytic[name][i];
      const double err = std::abs(a - numeric) / std::max(1.0, std::abs(numeric));
      if (err >= result.max_relative_error) {
        result = {err, name, i, a, numeric};
      }
    }
    graph.forward({{name, base[name]}});
  }
  return result;
}

}  // namespace pnmn::ad
