#include "fltp/metrics.hpp"

#include <cmath>
#include <limits>

#include "fltp/error.hpp"
#include "fltp/parallel.hpp"
#include "fltp/selection.hpp"

namespace fltp {

namespace {

struct ScenarioMetrics {
  double nll = 0.0;
  double ade = 0.0;
  double fde = 0.0;
  bool miss = false;
};

ScenarioMetrics eval_scenario(const ParamVector& params, const Scenario& s) {
  const PredictionOutput out = forward(params, s);
  const std::size_t target = s.target_index;
  const std::size_t t_pre = out.dims.t_pre;
  const Vec2 center = out.centers[target];
  const AgentTrack& track = s.agents[target];
  const Vec2 endpoint = track.future[t_pre - 1] - center;

  // Endpoint-best mode; ties keep the smaller index.
  std::size_t best = 0;
  double best_endpoint = std::numeric_limits<double>::infinity();
  bool miss = true;
  for (std::size_t f = 0; f < out.dims.modes; ++f) {
    const std::size_t k = out.loc_index(target, f, t_pre - 1);
    const double dist = std::hypot(endpoint.x - out.mu[k], endpoint.y - out.mu[k + 1]);
    if (dist < best_endpoint) {
      best_endpoint = dist;
      best = f;
    }
    if (dist <= kMissThresholdMeters) miss = false;
  }

  double ade = 0.0;
  for (std::size_t t = 0; t < t_pre; ++t) {
    const std::size_t k = out.loc_index(target, best, t);
    const Vec2 y = track.future[t] - center;
    ade += std::hypot(y.x - out.mu[k], y.y - out.mu[k + 1]);
  }

  ScenarioMetrics m;
  m.ade = ade / static_cast<double>(t_pre);
  m.fde = best_endpoint;
  m.miss = miss;
  m.nll = scenario_value(SelectionMetric::NLL, out, s);
  return m;
}

}  // namespace

EvalReport evaluate(const ParamVector& params, const std::vector<Scenario>& validation,
                    unsigned threads) {
  if (validation.empty()) throw ValidationError("evaluate: empty validation set");

  std::vector<ScenarioMetrics> per_scenario(validation.size());
  parallel_for(validation.size(), threads,
               [&](std::size_t i) { per_scenario[i] = eval_scenario(params, validation[i]); });

  EvalReport report;
  report.n_scenarios = validation.size();
  std::size_t misses = 0;
  for (const ScenarioMetrics& m : per_scenario) {  // ordered reduction
    report.nll += m.nll;
    report.min_ade += m.ade;
    report.min_fde += m.fde;
    if (m.miss) ++misses;
  }
  const double inv_n = 1.0 / static_cast<double>(validation.size());
  report.nll *= inv_n;
  report.min_ade *= inv_n;
  report.min_fde *= inv_n;
  report.mr = static_cast<double>(misses) * inv_n;
  return report;
}

}  // namespace fltp
