#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fltp/federation.hpp"
#include "fltp/model.hpp"
#include "fltp/scenario.hpp"

namespace fltp {

enum class SelectionMetric { NLL, AU };

struct AlConfig {
  FlConfig fl;
  double f2 = 0.15;  // candidate sampling fraction
  SelectionMetric metric = SelectionMetric::NLL;

  void validate(std::size_t num_clients) const;
};

// Value of one scenario under the selection metric, computed on the target
// agent's full-trajectory best mode only. NLL is the per-step Laplace
// negative log-likelihood (both coordinates); AU is the per-step sum of the
// predicted scales.
double scenario_value(SelectionMetric metric, const PredictionOutput& out,
                      const Scenario& scenario);

// Mean scenario value over the client's dataset.
double client_value(SelectionMetric metric, const ParamVector& params,
                    const ClientDataset& dataset);

// The k highest-valued candidates; equal values go to the smaller client id.
// Returned in rank order.
std::vector<std::uint32_t> select_nll(const std::vector<std::pair<std::uint32_t, double>>& values,
                                      std::size_t k);

// The k candidates whose values sit closest to the candidate median (mean of
// the two middle values for even counts); ties at equal distance go to the
// smaller client id. Returned in rank order.
std::vector<std::uint32_t> select_au(const std::vector<std::pair<std::uint32_t, double>>& values,
                                     std::size_t k);

// Active-selection loop: round 1 trains a weighted random draw exactly like
// run_fltp; later rounds draw floor(f2*C) candidates, score them against the
// current global model, and train the biased pick. Non-candidates are logged
// with value 0 but never compete in the selection.
RunResult run_alfltp(const std::vector<ClientDataset>& data, const AlConfig& config,
                     const ParamVector& w0, const EvalFn& eval = nullptr);

}  // namespace fltp
