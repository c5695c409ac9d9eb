#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fltp/scenario.hpp"

namespace fltp {

// Floor added to every Laplace scale output; keeps scales positive and the
// 1/b term in the NLL bounded.
inline constexpr double kScaleFloor = 1e-3;

struct ModelDims {
  std::uint32_t t_obs = 20;
  std::uint32_t t_pre = 30;
  std::uint32_t modes = 6;   // F
  std::uint32_t hidden = 64; // H

  bool operator==(const ModelDims&) const = default;

  std::size_t input_dim() const { return 2ull * (t_obs - 1); }        // flattened displacements
  std::size_t head_dim() const { return 2ull * modes * t_pre; }       // per-agent mu / b outputs
  std::size_t param_count() const;

  void validate() const;  // throws ValidationError
};

// Offsets of each weight block inside the flat parameter vector. Layout:
// W1(H x D_in), b1(H), W2(H x H), b2(H), W_loc(head x 2H), b_loc(head),
// W_b(head x 2H), b_b(head), W_m(F x 2H), b_m(F). Matrices row-major.
struct ParamLayout {
  std::size_t w1, b1, w2, b2, w_loc, b_loc, w_b, b_b, w_m, b_m;
  std::size_t total;

  explicit ParamLayout(const ModelDims& d);
};

// Flat parameter vector; the unit of federated exchange and averaging.
struct ParamVector {
  ModelDims dims;
  std::vector<double> values;

  bool operator==(const ParamVector&) const = default;
};

// Xavier-uniform weights (range sqrt(6/(fan_in+fan_out))), zero biases.
ParamVector init_params(std::uint64_t seed, const ModelDims& dims);

// Per-agent Laplace mixture parameters in the agent-centered frame (centered
// at the agent's last observed position, kept in `centers`).
struct PredictionOutput {
  ModelDims dims;
  std::size_t num_agents = 0;
  std::vector<double> mu;          // [agent][mode][t][xy]
  std::vector<double> scale;       // same shape, every entry >= kScaleFloor
  std::vector<double> mode_probs;  // [agent][mode], rows sum to 1
  std::vector<Vec2> centers;       // per-agent centering offset

  PredictionOutput() = default;
  PredictionOutput(const ModelDims& d, std::size_t agents);

  std::size_t loc_index(std::size_t agent, std::size_t mode, std::size_t t) const {
    return (((agent * dims.modes) + mode) * dims.t_pre + t) * 2;
  }
  std::size_t prob_index(std::size_t agent, std::size_t mode) const {
    return agent * dims.modes + mode;
  }
};

// One forward pass over all agents of a scenario. Pure; throws
// ValidationError if the scenario does not match `dims`.
PredictionOutput forward(const ParamVector& params, const Scenario& scenario);

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;
};

// Mean total loss over the batch and its exact gradient with respect to every
// parameter. The best-mode indices and the soft classification targets are
// held constant under differentiation.
LossGrad loss_and_grad(const ParamVector& params, std::span<const Scenario* const> batch);
LossGrad loss_and_grad(const ParamVector& params, const std::vector<Scenario>& batch);

}  // namespace fltp
