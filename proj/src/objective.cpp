#include "fltp/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fltp/error.hpp"

namespace fltp {

std::vector<std::vector<Vec2>> center_futures(const Scenario& scenario,
                                              const std::vector<Vec2>& centers) {
  std::vector<std::vector<Vec2>> out(scenario.agents.size());
  for (std::size_t i = 0; i < scenario.agents.size(); ++i) {
    const AgentTrack& track = scenario.agents[i];
    out[i].resize(track.future.size());
    for (std::size_t t = 0; t < track.future.size(); ++t) {
      out[i][t] = track.future[t] - centers[i];
    }
  }
  return out;
}

namespace {

// Summed L2 distance between mode f of agent i and the centered future.
double mode_distance(const PredictionOutput& out, const std::vector<Vec2>& future,
                     std::size_t agent, std::size_t mode) {
  double sum = 0.0;
  for (std::size_t t = 0; t < out.dims.t_pre; ++t) {
    const std::size_t k = out.loc_index(agent, mode, t);
    const double dx = future[t].x - out.mu[k];
    const double dy = future[t].y - out.mu[k + 1];
    sum += std::hypot(dx, dy);
  }
  return sum;
}

}  // namespace

std::vector<std::uint32_t> best_mode(const PredictionOutput& out,
                                     const std::vector<std::vector<Vec2>>& future) {
  std::vector<std::uint32_t> best(out.num_agents, 0);
  for (std::size_t i = 0; i < out.num_agents; ++i) {
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::uint32_t f = 0; f < out.dims.modes; ++f) {
      const double d = mode_distance(out, future[i], i, f);
      if (d < best_dist) {  // strict: ties keep the smaller index
        best_dist = d;
        best[i] = f;
      }
    }
  }
  return best;
}

double regression_loss(const PredictionOutput& out,
                       const std::vector<std::vector<Vec2>>& future,
                       const std::vector<std::uint32_t>& f_best) {
  const std::size_t m = out.num_agents;
  double sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = 0; t < out.dims.t_pre; ++t) {
      const std::size_t k = out.loc_index(i, f_best[i], t);
      const double y[2] = {future[i][t].x, future[i][t].y};
      for (int d = 0; d < 2; ++d) {
        const double b = out.scale[k + d];
        if (!(b > 0.0)) {
          throw ValidationError("regression_loss: non-positive scale b=" + std::to_string(b));
        }
        sum += std::log(2.0 * b) + std::abs(y[d] - out.mu[k + d]) / b;
      }
    }
  }
  return sum / (static_cast<double>(m) * out.dims.t_pre);
}

std::vector<double> soft_targets(const PredictionOutput& out,
                                 const std::vector<std::vector<Vec2>>& future) {
  const std::size_t F = out.dims.modes;
  std::vector<double> targets(out.num_agents * F);
  std::vector<double> neg_dist(F);
  for (std::size_t i = 0; i < out.num_agents; ++i) {
    double max_val = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < F; ++f) {
      neg_dist[f] = -mode_distance(out, future[i], i, f);
      max_val = std::max(max_val, neg_dist[f]);
    }
    double denom = 0.0;
    for (std::size_t f = 0; f < F; ++f) {
      neg_dist[f] = std::exp(neg_dist[f] - max_val);
      denom += neg_dist[f];
    }
    for (std::size_t f = 0; f < F; ++f) targets[i * F + f] = neg_dist[f] / denom;
  }
  return targets;
}

double classification_loss(const PredictionOutput& out, const std::vector<double>& targets) {
  const std::size_t F = out.dims.modes;
  double sum = 0.0;
  for (std::size_t i = 0; i < out.num_agents; ++i) {
    for (std::size_t f = 0; f < F; ++f) {
      const double p_hat = std::max(out.mode_probs[i * F + f], kProbFloor);
      sum -= targets[i * F + f] * std::log(p_hat);
    }
  }
  return sum / static_cast<double>(out.num_agents);
}

LossBreakdown total_loss(const PredictionOutput& out, const Scenario& scenario) {
  const auto future = center_futures(scenario, out.centers);
  LossBreakdown result;
  result.f_best = best_mode(out, future);
  result.l_reg = regression_loss(out, future, result.f_best);
  result.l_cls = classification_loss(out, soft_targets(out, future));
  result.total = result.l_reg + result.l_cls;
  return result;
}

double local_objective(const ParamVector& params, const ClientDataset& dataset) {
  if (dataset.scenarios.empty()) {
    throw ValidationError("local_objective: empty dataset for client " +
                          std::to_string(dataset.client_id));
  }
  double sum = 0.0;
  for (const Scenario& s : dataset.scenarios) {
    sum += total_loss(forward(params, s), s).total;
  }
  return sum / static_cast<double>(dataset.scenarios.size());
}

}  // namespace fltp
