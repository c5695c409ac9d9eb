#include "fltp/trainer.hpp"

#include <cmath>
#include <numeric>
#include <span>
#include <string>

#include "fltp/error.hpp"
#include "fltp/rng.hpp"

namespace fltp {

void TrainHyper::validate() const {
  if (!(eta > 0.0)) throw ValidationError("eta must be > 0");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw ValidationError("beta1 must be in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw ValidationError("beta2 must be in (0,1)");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (batch_size == 0) throw ValidationError("batch_size must be >= 1");
  if (epochs == 0) throw ValidationError("epochs must be >= 1");
}

void adamw_step(std::vector<double>& w, const std::vector<double>& grad, const TrainHyper& hyper,
                OptimizerState& state) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(state.t));
  const double decay = 1.0 - hyper.eta * hyper.lambda;

  for (std::size_t k = 0; k < w.size(); ++k) {
    const double g = grad[k];
    if (hyper.literal_decay) {
      w[k] -= hyper.eta * hyper.lambda * g;
    } else {
      w[k] *= decay;
    }
    state.theta[k] = hyper.beta1 * state.theta[k] + (1.0 - hyper.beta1) * g;
    state.sigma[k] = hyper.beta2 * state.sigma[k] + (1.0 - hyper.beta2) * g * g;
    const double theta_hat = state.theta[k] / bc1;
    const double sigma_hat = state.sigma[k] / bc2;
    w[k] -= hyper.eta * theta_hat / (std::sqrt(sigma_hat) + hyper.epsilon);
  }
}

ParamVector client_update(const ParamVector& w, const ClientDataset& dataset,
                          const TrainHyper& hyper, std::uint64_t seed,
                          OptimizerState* state_out) {
  hyper.validate();
  if (dataset.scenarios.empty()) {
    throw ValidationError("client_update: empty dataset for client " +
                          std::to_string(dataset.client_id));
  }

  ParamVector result = w;
  OptimizerState state(w.values.size());
  Rng rng(seed);

  const std::size_t n = dataset.scenarios.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<const Scenario*> batch;
  batch.reserve(hyper.batch_size);

  for (std::uint32_t epoch = 0; epoch < hyper.epochs; ++epoch) {
    // Fisher-Yates off the dedicated per-call stream.
    for (std::size_t i = n - 1; i > 0; --i) {
      const std::size_t j = static_cast<std::size_t>(rng.uniform_int(0, i));
      std::swap(order[i], order[j]);
    }

    for (std::size_t start = 0; start < n; start += hyper.batch_size) {
      const std::size_t end = std::min(n, start + hyper.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(&dataset.scenarios[order[k]]);

      const LossGrad lg = loss_and_grad(result, std::span<const Scenario* const>(batch));
      bool finite = std::isfinite(lg.loss);
      for (double g : lg.grad.values) {
        if (!std::isfinite(g)) {
          finite = false;
          break;
        }
      }
      if (!finite) {
        throw NumericError("non-finite loss/gradient at client " +
                           std::to_string(dataset.client_id) + ", epoch " +
                           std::to_string(epoch + 1) + ", batch starting at index " +
                           std::to_string(start));
      }

      adamw_step(result.values, lg.grad.values, hyper, state);
    }
  }

  if (state_out) *state_out = std::move(state);
  return result;
}

}  // namespace fltp
