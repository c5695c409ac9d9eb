#include "fltp/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "fltp/error.hpp"
#include "fltp/parallel.hpp"

namespace fltp {

void AlConfig::validate(std::size_t num_clients) const {
  fl.validate(num_clients);
  if (!(f2 > 0.0 && f2 <= 1.0)) throw ValidationError("f2 must be in (0, 1]");
  if (selection_count(f2, num_clients) < selection_count(fl.f1, num_clients)) {
    throw ValidationError("floor(f2 * C) must be >= floor(f1 * C)");
  }
}

double scenario_value(SelectionMetric metric, const PredictionOutput& out,
                      const Scenario& scenario) {
  const std::size_t target = scenario.target_index;
  const std::size_t t_pre = out.dims.t_pre;
  const Vec2 center = out.centers[target];
  const AgentTrack& track = scenario.agents[target];

  // Full-trajectory best mode of the target agent.
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < out.dims.modes; ++f) {
    double dist = 0.0;
    for (std::size_t t = 0; t < t_pre; ++t) {
      const std::size_t k = out.loc_index(target, f, t);
      const Vec2 y = track.future[t] - center;
      dist += std::hypot(y.x - out.mu[k], y.y - out.mu[k + 1]);
    }
    if (dist < best_dist) {
      best_dist = dist;
      best = f;
    }
  }

  double sum = 0.0;
  for (std::size_t t = 0; t < t_pre; ++t) {
    const std::size_t k = out.loc_index(target, best, t);
    const Vec2 y = track.future[t] - center;
    const double yd[2] = {y.x, y.y};
    for (int d = 0; d < 2; ++d) {
      const double b = out.scale[k + d];
      if (!(b > 0.0)) {
        throw ValidationError("scenario_value: non-positive scale b=" + std::to_string(b));
      }
      if (metric == SelectionMetric::NLL) {
        sum += std::log(2.0 * b) + std::abs(yd[d] - out.mu[k + d]) / b;
      } else {
        sum += b;
      }
    }
  }
  return sum / static_cast<double>(t_pre);
}

double client_value(SelectionMetric metric, const ParamVector& params,
                    const ClientDataset& dataset) {
  if (dataset.scenarios.empty()) {
    throw ValidationError("client_value: empty dataset for client " +
                          std::to_string(dataset.client_id));
  }
  double sum = 0.0;
  for (const Scenario& s : dataset.scenarios) {
    sum += scenario_value(metric, forward(params, s), s);
  }
  return sum / static_cast<double>(dataset.scenarios.size());
}

std::vector<std::uint32_t> select_nll(const std::vector<std::pair<std::uint32_t, double>>& values,
                                      std::size_t k) {
  if (k > values.size()) {
    throw ValidationError("select_nll: k=" + std::to_string(k) + " exceeds candidate count " +
                          std::to_string(values.size()));
  }
  std::vector<std::pair<std::uint32_t, double>> sorted = values;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::uint32_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = sorted[i].first;
  return out;
}

std::vector<std::uint32_t> select_au(const std::vector<std::pair<std::uint32_t, double>>& values,
                                     std::size_t k) {
  if (k > values.size()) {
    throw ValidationError("select_au: k=" + std::to_string(k) + " exceeds candidate count " +
                          std::to_string(values.size()));
  }
  if (values.empty()) return {};

  std::vector<double> vals(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) vals[i] = values[i].second;
  std::sort(vals.begin(), vals.end());
  const std::size_t mid = vals.size() / 2;
  const double median =
      vals.size() % 2 == 1 ? vals[mid] : 0.5 * (vals[mid - 1] + vals[mid]);

  std::vector<std::pair<std::uint32_t, double>> sorted = values;
  std::sort(sorted.begin(), sorted.end(), [median](const auto& a, const auto& b) {
    const double da = std::abs(a.second - median);
    const double db = std::abs(b.second - median);
    if (da != db) return da < db;
    return a.first < b.first;
  });
  std::vector<std::uint32_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = sorted[i].first;
  return out;
}

RunResult run_alfltp(const std::vector<ClientDataset>& data, const AlConfig& config,
                     const ParamVector& w0, const EvalFn& eval) {
  config.validate(data.size());
  std::vector<std::uint64_t> sizes(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].client_id != i) {
      throw ValidationError("client datasets must be ordered by id");
    }
    if (data[i].scenarios.empty()) {
      throw ValidationError("client " + std::to_string(i) + " has no scenarios");
    }
    sizes[i] = data[i].scenarios.size();
  }

  const std::size_t train_count = selection_count(config.fl.f1, data.size());
  const std::size_t candidate_count = selection_count(config.f2, data.size());
  const std::uint64_t seed = config.fl.seed;

  RunResult result;
  result.params = w0;
  result.rounds.reserve(config.fl.rounds);

  auto train_selected = [&](std::uint32_t round, const std::vector<std::uint32_t>& selected) {
    std::vector<ParamVector> updates(selected.size());
    parallel_for(selected.size(), config.fl.threads, [&](std::size_t i) {
      const std::uint32_t c = selected[i];
      try {
        updates[i] = client_update(result.params, data[c], config.fl.hyper,
                                   derive_seed(seed, round, c));
      } catch (const NumericError& e) {
        throw NumericError("round " + std::to_string(round) + ": " + e.what());
      }
    });
    std::map<std::uint32_t, ParamVector> models;
    std::map<std::uint32_t, std::uint64_t> selected_sizes;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      selected_sizes[selected[i]] = sizes[selected[i]];
      models.emplace(selected[i], std::move(updates[i]));
    }
    result.params = aggregate(models, selected_sizes);
  };

  for (std::uint32_t r = 1; r <= config.fl.rounds; ++r) {
    RoundLog log;
    log.round = r;

    if (r == 1) {
      // No global model to score against yet: plain weighted sampling.
      Rng sample_rng(derive_seed(seed, r, kSamplingStreamTag));
      log.selected = sample_weighted(sizes, train_count, sample_rng);
      train_selected(r, log.selected);
    } else {
      Rng sample_rng(derive_seed(seed, r, kSamplingStreamTag));
      log.candidates = sample_weighted(sizes, candidate_count, sample_rng);

      std::vector<double> candidate_values(log.candidates.size());
      parallel_for(log.candidates.size(), config.fl.threads, [&](std::size_t i) {
        candidate_values[i] =
            client_value(config.metric, result.params, data[log.candidates[i]]);
      });

      // Log every client's value; non-candidates reset to 0 and stay out of
      // the ranking below (NLL values can be negative, so a 0 would corrupt
      // a joint top-k).
      std::vector<std::pair<std::uint32_t, double>> ranked;
      ranked.reserve(log.candidates.size());
      log.values.assign(data.size(), {0, 0.0});
      for (std::size_t i = 0; i < data.size(); ++i) log.values[i].first = static_cast<std::uint32_t>(i);
      for (std::size_t i = 0; i < log.candidates.size(); ++i) {
        log.values[log.candidates[i]].second = candidate_values[i];
      }
      for (std::uint32_t id = 0; id < data.size(); ++id) {
        const bool is_candidate =
            std::find(log.candidates.begin(), log.candidates.end(), id) != log.candidates.end();
        if (is_candidate) ranked.emplace_back(id, log.values[id].second);
      }

      log.selected = config.metric == SelectionMetric::NLL ? select_nll(ranked, train_count)
                                                           : select_au(ranked, train_count);
      train_selected(r, log.selected);
    }

    if (eval && r % config.fl.eval_every == 0) log.metrics = eval(result.params);
    result.rounds.push_back(std::move(log));
  }
  return result;
}

}  // namespace fltp
