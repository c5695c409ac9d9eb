#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fltp/error.hpp"
#include "fltp/federation.hpp"
#include "fltp/model.hpp"
#include "fltp/objective.hpp"
#include "fltp/scenario.hpp"
#include "fltp/selection.hpp"

using namespace fltp;

namespace {

const ModelDims kDims{4, 3, 2, 4};
using ValueVec = std::vector<std::pair<std::uint32_t, double>>;

// Greedy one-at-a-time oracle: repeatedly scan for the best remaining
// candidate under the rule's ordering. Shares no sorting code with the
// implementation.
std::vector<std::uint32_t> oracle_top_k(const ValueVec& values, std::size_t k) {
  ValueVec pool = values;
  std::vector<std::uint32_t> out;
  while (out.size() < k) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      if (pool[j].second > pool[best].second ||
          (pool[j].second == pool[best].second && pool[j].first < pool[best].first)) {
        best = j;
      }
    }
    out.push_back(pool[best].first);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

double oracle_median(const ValueVec& values) {
  std::vector<double> v;
  for (const auto& [id, val] : values) v.push_back(val);
  std::sort(v.begin(), v.end());
  return v.size() % 2 == 1 ? v[v.size() / 2]
                           : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

std::vector<std::uint32_t> oracle_median_closest(const ValueVec& values, std::size_t k) {
  const double med = oracle_median(values);
  ValueVec pool = values;
  std::vector<std::uint32_t> out;
  while (out.size() < k) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      const double dj = std::abs(pool[j].second - med);
      const double db = std::abs(pool[best].second - med);
      if (dj < db || (dj == db && pool[j].first < pool[best].first)) best = j;
    }
    out.push_back(pool[best].first);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

PredictionOutput constant_output(std::uint32_t t_pre, std::uint32_t modes, std::size_t agents,
                                 double mu_fill, double b_fill) {
  ModelDims dims{2, t_pre, modes, 1};
  PredictionOutput out(dims, agents);
  for (double& m : out.mu) m = mu_fill;
  for (double& b : out.scale) b = b_fill;
  const double uniform = 1.0 / modes;
  for (double& p : out.mode_probs) p = uniform;
  return out;
}

std::vector<ClientDataset> make_clients(std::uint64_t seed, std::size_t c_count) {
  GeneratorConfig cfg;
  cfg.seed = seed;
  cfg.num_clients = static_cast<std::uint32_t>(c_count);
  cfg.scenarios_per_client = 3;
  cfg.t_obs = kDims.t_obs;
  cfg.t_pre = kDims.t_pre;
  cfg.agents_min = 1;
  cfg.agents_max = 2;
  return partition_clients(cfg);
}

}  // namespace

TEST_CASE("scenario_value AU averages the scales of the best mode") {
  // b = (0.3, 0.2) at every step: per-step sum is 0.5 for any mode.
  Scenario s;
  s.target_index = 0;
  s.agents.resize(1);
  s.agents[0].observed = {{0, 0}, {1, 0}};
  s.agents[0].future = {{2, 0}, {3, 0}, {4, 0}};

  PredictionOutput out = constant_output(3, 2, 1, 0.0, 0.0);
  out.centers[0] = s.agents[0].observed.back();
  for (std::size_t f = 0; f < 2; ++f) {
    for (std::size_t t = 0; t < 3; ++t) {
      const std::size_t k = out.loc_index(0, f, t);
      out.scale[k] = 0.3;
      out.scale[k + 1] = 0.2;
    }
  }
  CHECK(scenario_value(SelectionMetric::AU, out, s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("scenario_value NLL vanishes at exact prediction with b = 1/2") {
  Scenario s;
  s.target_index = 0;
  s.agents.resize(1);
  s.agents[0].observed = {{0, 0}, {1, 1}};
  s.agents[0].future = {{2, 3}, {4, 5}};

  PredictionOutput out = constant_output(2, 2, 1, 0.0, 0.5);
  out.centers[0] = s.agents[0].observed.back();
  for (std::size_t t = 0; t < 2; ++t) {
    const std::size_t k = out.loc_index(0, 0, t);
    out.mu[k] = s.agents[0].future[t].x - out.centers[0].x;
    out.mu[k + 1] = s.agents[0].future[t].y - out.centers[0].y;
  }
  CHECK(scenario_value(SelectionMetric::NLL, out, s) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("scenario_value NLL equals regression_loss on the target-only restriction") {
  GeneratorConfig cfg;
  cfg.t_obs = kDims.t_obs;
  cfg.t_pre = kDims.t_pre;
  cfg.agents_min = 3;
  cfg.agents_max = 3;
  Rng rng(15);
  const Scenario full = generate_scenario(rng, Regime::B, cfg);
  const ParamVector params = init_params(4, kDims);
  const PredictionOutput out = forward(params, full);

  const double value = scenario_value(SelectionMetric::NLL, out, full);

  // One-agent scenario holding only the target agent, with its outputs.
  Scenario solo;
  solo.target_index = 0;
  solo.agents = {full.agents[full.target_index]};
  PredictionOutput restricted(kDims, 1);
  restricted.centers[0] = out.centers[full.target_index];
  for (std::size_t f = 0; f < kDims.modes; ++f) {
    for (std::size_t t = 0; t < kDims.t_pre; ++t) {
      const std::size_t src = out.loc_index(full.target_index, f, t);
      const std::size_t dst = restricted.loc_index(0, f, t);
      restricted.mu[dst] = out.mu[src];
      restricted.mu[dst + 1] = out.mu[src + 1];
      restricted.scale[dst] = out.scale[src];
      restricted.scale[dst + 1] = out.scale[src + 1];
    }
  }
  const auto futures = center_futures(solo, restricted.centers);
  const auto f_best = best_mode(restricted, futures);
  CHECK(value == doctest::Approx(regression_loss(restricted, futures, f_best)).epsilon(1e-12));
}

TEST_CASE("client_value is the mean scenario value and stays finite") {
  const auto clients = make_clients(19, 2);
  const ParamVector params = init_params(5, kDims);
  for (SelectionMetric metric : {SelectionMetric::NLL, SelectionMetric::AU}) {
    const double v = client_value(metric, params, clients[0]);
    CHECK(std::isfinite(v));
    double mean = 0.0;
    for (const Scenario& s : clients[0].scenarios) {
      mean += scenario_value(metric, forward(params, s), s);
    }
    mean /= static_cast<double>(clients[0].scenarios.size());
    CHECK(v == doctest::Approx(mean).epsilon(1e-12));

    ClientDataset one;
    one.scenarios = {clients[0].scenarios[0]};
    CHECK(client_value(metric, params, one) ==
          doctest::Approx(scenario_value(metric, forward(params, one.scenarios[0]),
                                         one.scenarios[0]))
              .epsilon(1e-12));
  }
  ClientDataset empty;
  CHECK_THROWS_AS((void)client_value(SelectionMetric::NLL, params, empty), ValidationError);
}

TEST_CASE("select_nll picks the highest values") {
  const ValueVec values = {{0, 0.2}, {1, 0.9}, {2, 0.5}};
  CHECK(select_nll(values, 2) == std::vector<std::uint32_t>{1, 2});
}

TEST_CASE("select_nll breaks ties by smaller id") {
  const ValueVec values = {{7, 1.5}, {3, 1.5}, {5, 1.5}};
  CHECK(select_nll(values, 2) == std::vector<std::uint32_t>{3, 5});
}

TEST_CASE("select_au picks values closest to the median") {
  // {1,2,3,4,5}: median 3, closest three are {2,3,4}.
  const ValueVec odd = {{0, 1.0}, {1, 2.0}, {2, 3.0}, {3, 4.0}, {4, 5.0}};
  const auto got = select_au(odd, 3);
  CHECK(std::set<std::uint32_t>(got.begin(), got.end()) == std::set<std::uint32_t>{1, 2, 3});

  // {1,2,4,8}: median 3, closest two hold values 2 and 4.
  const ValueVec even = {{0, 1.0}, {1, 2.0}, {2, 4.0}, {3, 8.0}};
  const auto got2 = select_au(even, 2);
  CHECK(std::set<std::uint32_t>(got2.begin(), got2.end()) == std::set<std::uint32_t>{1, 2});
}

TEST_CASE("selecting every candidate returns them all") {
  const ValueVec values = {{4, -1.0}, {9, 3.0}, {2, 3.0}};
  for (auto select : {select_nll, select_au}) {
    const auto got = select(values, values.size());
    CHECK(std::set<std::uint32_t>(got.begin(), got.end()) == std::set<std::uint32_t>{2, 4, 9});
  }
  CHECK_THROWS_AS((void)select_nll(values, 4), ValidationError);
  CHECK_THROWS_AS((void)select_au(values, 4), ValidationError);
}

TEST_CASE("both selectors match brute-force oracles on 1000 random instances") {
  Rng rng(2468);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(3, 50));
    const std::size_t k = static_cast<std::size_t>(rng.uniform_int(1, n));
    ValueVec values;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse grid forces duplicate values, exercising the tie rules.
      const double v = std::floor(rng.uniform(-5.0, 5.0) * 4.0) / 4.0;
      values.emplace_back(static_cast<std::uint32_t>(i * 3 + 1), v);
    }
    CHECK(select_nll(values, k) == oracle_top_k(values, k));
    CHECK(select_au(values, k) == oracle_median_closest(values, k));
  }
}

TEST_CASE("select_nll is invariant under strictly increasing transforms") {
  Rng rng(1357);
  for (int trial = 0; trial < 100; ++trial) {
    ValueVec values, mapped;
    for (std::uint32_t i = 0; i < 12; ++i) {
      const double v = rng.uniform(-4.0, 4.0);
      values.emplace_back(i, v);
      mapped.emplace_back(i, std::atan(v) * 2.0 + 7.0);
    }
    CHECK(select_nll(values, 5) == select_nll(mapped, 5));
  }
}

TEST_CASE("select_au is invariant under a common shift") {
  Rng rng(9753);
  for (int trial = 0; trial < 100; ++trial) {
    ValueVec values, shifted;
    const double delta = rng.uniform(-10.0, 10.0);
    for (std::uint32_t i = 0; i < 11; ++i) {
      const double v = rng.uniform(-4.0, 4.0);
      values.emplace_back(i, v);
      shifted.emplace_back(i, v + delta);
    }
    CHECK(select_au(values, 4) == select_au(shifted, 4));
  }
}

TEST_CASE("run_alfltp honours the candidate/selection protocol") {
  const auto data = make_clients(33, 6);
  AlConfig cfg;
  cfg.fl.rounds = 4;
  cfg.fl.f1 = 0.34;  // floor -> 2
  cfg.fl.seed = 3;
  cfg.fl.hyper.epochs = 1;
  cfg.f2 = 0.67;  // floor -> 4
  cfg.metric = SelectionMetric::AU;

  const ParamVector w0 = init_params(15, kDims);
  const RunResult result = run_alfltp(data, cfg, w0);
  REQUIRE(result.rounds.size() == 4);

  CHECK(result.rounds[0].candidates.empty());
  CHECK(result.rounds[0].values.empty());
  CHECK(result.rounds[0].selected.size() == 2);

  for (std::size_t r = 1; r < result.rounds.size(); ++r) {
    const RoundLog& log = result.rounds[r];
    CHECK(log.candidates.size() == 4);
    CHECK(log.selected.size() == 2);
    const std::set<std::uint32_t> cand(log.candidates.begin(), log.candidates.end());
    for (std::uint32_t id : log.selected) CHECK(cand.count(id) == 1);
    REQUIRE(log.values.size() == data.size());
    for (const auto& [id, value] : log.values) {
      if (cand.count(id) == 0) CHECK(value == 0.0);  // reset, log only
    }
  }
}

TEST_CASE("f2 == f1 forces the selection to equal the candidates") {
  const auto data = make_clients(41, 4);
  AlConfig cfg;
  cfg.fl.rounds = 3;
  cfg.fl.f1 = 0.5;
  cfg.fl.seed = 8;
  cfg.fl.hyper.epochs = 1;
  cfg.f2 = 0.5;
  cfg.metric = SelectionMetric::NLL;

  const RunResult result = run_alfltp(data, cfg, init_params(2, kDims));
  for (std::size_t r = 1; r < result.rounds.size(); ++r) {
    const auto& log = result.rounds[r];
    CHECK(std::set<std::uint32_t>(log.selected.begin(), log.selected.end()) ==
          std::set<std::uint32_t>(log.candidates.begin(), log.candidates.end()));
  }
}

TEST_CASE("identical client data makes the tie rule pick the lowest candidate ids") {
  const auto base = make_clients(51, 2);
  std::vector<ClientDataset> data(6);
  for (std::uint32_t c = 0; c < 6; ++c) {
    data[c] = base[0];
    data[c].client_id = c;
  }

  AlConfig cfg;
  cfg.fl.rounds = 3;
  cfg.fl.f1 = 0.34;  // 2 of 6
  cfg.fl.seed = 12;
  cfg.fl.hyper.epochs = 1;
  cfg.f2 = 0.67;  // 4 of 6
  cfg.metric = SelectionMetric::NLL;

  const RunResult result = run_alfltp(data, cfg, init_params(3, kDims));
  for (std::size_t r = 1; r < result.rounds.size(); ++r) {
    const auto& log = result.rounds[r];
    std::vector<std::uint32_t> sorted_candidates = log.candidates;
    std::sort(sorted_candidates.begin(), sorted_candidates.end());
    const std::vector<std::uint32_t> expected(sorted_candidates.begin(),
                                              sorted_candidates.begin() + 2);
    CHECK(log.selected == expected);
  }
}

TEST_CASE("round 1 of alfltp matches fltp round 1 for the same seed") {
  const auto data = make_clients(61, 4);
  FlConfig fl;
  fl.rounds = 1;
  fl.f1 = 0.5;
  fl.seed = 19;
  fl.hyper.epochs = 1;

  AlConfig al;
  al.fl = fl;
  al.f2 = 0.75;
  al.metric = SelectionMetric::AU;

  const ParamVector w0 = init_params(5, kDims);
  const RunResult a = run_fltp(data, fl, w0);
  const RunResult b = run_alfltp(data, al, w0);
  CHECK(a.rounds[0].selected == b.rounds[0].selected);
  CHECK(a.params == b.params);
}

TEST_CASE("alconfig validation") {
  AlConfig cfg;
  cfg.fl.f1 = 0.5;
  cfg.f2 = 0.25;
  CHECK_THROWS_AS(cfg.validate(4), ValidationError);  // floor(f2 C) < floor(f1 C)
  cfg.f2 = 1.5;
  CHECK_THROWS_AS(cfg.validate(4), ValidationError);
}
