#pragma once

#include <cstdint>
#include <vector>

#include "fltp/model.hpp"
#include "fltp/scenario.hpp"

namespace fltp {

struct TrainHyper {
  double eta = 5e-4;      // learning rate
  double lambda = 1e-4;   // weight decay
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint32_t batch_size = 32;
  std::uint32_t epochs = 4;
  // Applies the decay along the gradient (w -= eta*lambda*g) instead of the
  // decoupled w -= eta*lambda*w. Off by default; see README.
  bool literal_decay = false;

  void validate() const;
};

// AdamW accumulators. Fresh (all-zero, t=0) at the start of every
// client_update; never shipped between server and clients.
struct OptimizerState {
  std::vector<double> theta;  // first moment
  std::vector<double> sigma;  // second moment, elementwise, always >= 0
  std::uint64_t t = 0;

  explicit OptimizerState(std::size_t n) : theta(n, 0.0), sigma(n, 0.0) {}
};

// One AdamW step: decay, moment updates, bias-corrected parameter update.
// Usable with any gradient source, not just the predictor.
void adamw_step(std::vector<double>& w, const std::vector<double>& grad, const TrainHyper& hyper,
                OptimizerState& state);

// E epochs of shuffled mini-batch AdamW over the client's scenarios. The
// final batch of an epoch may be smaller and uses its own mean. Returns the
// updated weights; the optimizer state is discarded unless the caller passes
// state_out. Throws NumericError naming the batch if a loss or gradient goes
// non-finite.
ParamVector client_update(const ParamVector& w, const ClientDataset& dataset,
                          const TrainHyper& hyper, std::uint64_t seed,
                          OptimizerState* state_out = nullptr);

}  // namespace fltp
