#pragma once

#include <cstdint>
#include <vector>

#include "fltp/model.hpp"
#include "fltp/scenario.hpp"

namespace fltp {

// Mixture-coefficient probabilities below this are clamped before the log in
// the cross entropy; keeps a fully saturated softmax from producing -inf.
inline constexpr double kProbFloor = 1e-12;

struct LossBreakdown {
  double l_reg = 0.0;
  double l_cls = 0.0;
  double total = 0.0;
  std::vector<std::uint32_t> f_best;  // per-agent winning mode
};

// Ground-truth futures shifted into each agent's centered frame.
std::vector<std::vector<Vec2>> center_futures(const Scenario& scenario,
                                              const std::vector<Vec2>& centers);

// Per agent, the mode minimizing the summed L2 distance to the (centered)
// ground-truth future. Ties go to the smallest mode index.
std::vector<std::uint32_t> best_mode(const PredictionOutput& out,
                                     const std::vector<std::vector<Vec2>>& future);

// Laplace negative log-likelihood of the winning mode, averaged over agents
// and prediction steps, summed over the two coordinates:
//   (1/m)(1/T_pre) sum_i sum_t sum_d [ log(2 b_d) + |y_d - mu_d| / b_d ].
// Can be negative (small scales drive log(2b) below zero).
double regression_loss(const PredictionOutput& out,
                       const std::vector<std::vector<Vec2>>& future,
                       const std::vector<std::uint32_t>& f_best);

// Soft assignment targets: softmax over modes of the negated summed L2
// distance to the ground truth. Flat [agent][mode], rows sum to 1.
std::vector<double> soft_targets(const PredictionOutput& out,
                                 const std::vector<std::vector<Vec2>>& future);

// Cross entropy between the soft targets and the predicted coefficients,
// averaged over agents.
double classification_loss(const PredictionOutput& out, const std::vector<double>& targets);

// l_reg + l_cls for one scenario; futures are centered by the output's own
// per-agent centers.
LossBreakdown total_loss(const PredictionOutput& out, const Scenario& scenario);

// Mean scenario loss over a client's dataset.
double local_objective(const ParamVector& params, const ClientDataset& dataset);

}  // namespace fltp
