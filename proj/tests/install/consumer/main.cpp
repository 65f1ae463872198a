#include <sensegraph/eval.hpp>
#include <sensegraph/synth.hpp>

#include <cstdio>

int main() {
  const auto data = sensegraph::make_synthetic({});
  sensegraph::ExperimentGrid grid;
  grid.seeds = {0, 1};
  const auto results = sensegraph::run_experiment(data.embeddings[0], data.inventory, data.truth, grid);
  std::printf("%zu runs, mean %.4f\n", results[0].runs.size(), results[0].mean);
  return results[0].runs.size() == 2 ? 0 : 1;
}
