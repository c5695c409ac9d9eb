#include "fltp/federation.hpp"

#include <cmath>
#include <string>

#include "fltp/error.hpp"
#include "fltp/parallel.hpp"

namespace fltp {

void FlConfig::validate(std::size_t num_clients) const {
  if (!(f1 > 0.0 && f1 <= 1.0)) throw ValidationError("f1 must be in (0, 1]");
  if (eval_every == 0) throw ValidationError("eval_every must be >= 1");
  if (num_clients == 0) throw ValidationError("no client datasets");
  if (selection_count(f1, num_clients) < 1) {
    throw ValidationError("floor(f1 * C) must be >= 1, got f1=" + std::to_string(f1) +
                          " with C=" + std::to_string(num_clients));
  }
  hyper.validate();
}

std::vector<std::uint32_t> sample_weighted(const std::vector<std::uint64_t>& sizes, std::size_t n,
                                           Rng& rng) {
  const std::size_t c_count = sizes.size();
  if (n > c_count) {
    throw ValidationError("cannot sample " + std::to_string(n) + " clients out of " +
                          std::to_string(c_count));
  }
  std::uint64_t total = 0;
  for (std::uint64_t k : sizes) {
    if (k == 0) throw ValidationError("sample_weighted: client sizes must be positive");
    total += k;
  }

  std::vector<std::uint32_t> remaining(c_count);
  for (std::size_t i = 0; i < c_count; ++i) remaining[i] = static_cast<std::uint32_t>(i);

  std::vector<std::uint32_t> drawn;
  drawn.reserve(n);
  for (std::size_t d = 0; d < n; ++d) {
    const double u = rng.uniform() * static_cast<double>(total);
    std::size_t pick = remaining.size() - 1;  // rounding fallback
    double acc = 0.0;
    for (std::size_t j = 0; j < remaining.size(); ++j) {
      acc += static_cast<double>(sizes[remaining[j]]);
      if (u < acc) {
        pick = j;
        break;
      }
    }
    const std::uint32_t id = remaining[pick];
    drawn.push_back(id);
    total -= sizes[id];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return drawn;
}

ParamVector aggregate(const std::map<std::uint32_t, ParamVector>& models,
                      const std::map<std::uint32_t, std::uint64_t>& sizes) {
  if (models.empty()) throw ValidationError("aggregate: no models");

  std::uint64_t total = 0;
  for (const auto& [id, model] : models) {
    const auto it = sizes.find(id);
    if (it == sizes.end()) {
      throw ValidationError("aggregate: missing size for client " + std::to_string(id));
    }
    if (it->second == 0) throw ValidationError("aggregate: zero size for client " + std::to_string(id));
    total += it->second;
  }

  const ParamVector& first = models.begin()->second;
  ParamVector result;
  result.dims = first.dims;
  result.values.assign(first.values.size(), 0.0);

  bool first_model = true;
  for (const auto& [id, model] : models) {  // std::map iterates in ascending id order
    if (model.values.size() != result.values.size()) {
      throw ValidationError("aggregate: parameter length mismatch for client " +
                            std::to_string(id));
    }
    const double weight =
        static_cast<double>(sizes.at(id)) / static_cast<double>(total);
    if (first_model) {
      for (std::size_t k = 0; k < result.values.size(); ++k) {
        result.values[k] = weight * model.values[k];
      }
      first_model = false;
    } else {
      for (std::size_t k = 0; k < result.values.size(); ++k) {
        result.values[k] += weight * model.values[k];
      }
    }
  }
  return result;
}

namespace {

std::vector<std::uint64_t> client_sizes(const std::vector<ClientDataset>& data) {
  std::vector<std::uint64_t> sizes(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].client_id != i) {
      throw ValidationError("client datasets must be ordered by id; position " +
                            std::to_string(i) + " holds client " +
                            std::to_string(data[i].client_id));
    }
    if (data[i].scenarios.empty()) {
      throw ValidationError("client " + std::to_string(i) + " has no scenarios");
    }
    sizes[i] = data[i].scenarios.size();
  }
  return sizes;
}

}  // namespace

RunResult run_fltp(const std::vector<ClientDataset>& data, const FlConfig& config,
                   const ParamVector& w0, const EvalFn& eval) {
  config.validate(data.size());
  const std::vector<std::uint64_t> sizes = client_sizes(data);
  const std::size_t per_round = selection_count(config.f1, data.size());

  RunResult result;
  result.params = w0;
  result.rounds.reserve(config.rounds);

  for (std::uint32_t r = 1; r <= config.rounds; ++r) {
    Rng sample_rng(derive_seed(config.seed, r, kSamplingStreamTag));
    const std::vector<std::uint32_t> selected = sample_weighted(sizes, per_round, sample_rng);

    std::vector<ParamVector> updates(selected.size());
    parallel_for(selected.size(), config.threads, [&](std::size_t i) {
      const std::uint32_t c = selected[i];
      try {
        updates[i] = client_update(result.params, data[c], config.hyper,
                                   derive_seed(config.seed, r, c));
      } catch (const NumericError& e) {
        throw NumericError("round " + std::to_string(r) + ": " + e.what());
      }
    });

    std::map<std::uint32_t, ParamVector> models;
    std::map<std::uint32_t, std::uint64_t> selected_sizes;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      selected_sizes[selected[i]] = sizes[selected[i]];
      models.emplace(selected[i], std::move(updates[i]));
    }
    result.params = aggregate(models, selected_sizes);

    RoundLog log;
    log.round = r;
    log.selected = selected;
    if (eval && r % config.eval_every == 0) log.metrics = eval(result.params);
    result.rounds.push_back(std::move(log));
  }
  return result;
}

RunResult run_local(const std::vector<ClientDataset>& data, std::uint32_t client_id,
                    const FlConfig& config, const ParamVector& w0, const EvalFn& eval) {
  config.validate(data.size());
  client_sizes(data);  // ordering + non-empty checks
  if (client_id >= data.size()) {
    throw ValidationError("local client " + std::to_string(client_id) + " out of range");
  }

  RunResult result;
  result.params = w0;
  result.rounds.reserve(config.rounds);
  for (std::uint32_t r = 1; r <= config.rounds; ++r) {
    try {
      result.params = client_update(result.params, data[client_id], config.hyper,
                                    derive_seed(config.seed, r, client_id));
    } catch (const NumericError& e) {
      throw NumericError("round " + std::to_string(r) + ": " + e.what());
    }
    RoundLog log;
    log.round = r;
    log.selected = {client_id};
    if (eval && r % config.eval_every == 0) log.metrics = eval(result.params);
    result.rounds.push_back(std::move(log));
  }
  return result;
}

}  // namespace fltp
