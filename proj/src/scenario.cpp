#include "fltp/scenario.hpp"

#include <cmath>
#include <string>

#include "fltp/error.hpp"

namespace fltp {

void GeneratorConfig::validate() const {
  if (num_clients == 0) throw ValidationError("num_clients must be >= 1");
  if (scenarios_per_client == 0) throw ValidationError("scenarios_per_client must be >= 1");
  if (agents_min < 1) throw ValidationError("agents_min must be >= 1");
  if (agents_max < agents_min) throw ValidationError("agents_max must be >= agents_min");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  if (t_obs < 2) throw ValidationError("t_obs must be >= 2");
  if (t_pre < 1) throw ValidationError("t_pre must be >= 1");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
}

Scenario generate_scenario(Rng& rng, Regime regime, const GeneratorConfig& config) {
  Scenario scenario;
  const std::uint32_t m =
      static_cast<std::uint32_t>(rng.uniform_int(config.agents_min, config.agents_max));
  scenario.agents.resize(m);
  scenario.target_index = 0;

  const std::uint32_t total_steps = config.t_obs + config.t_pre;
  for (std::uint32_t i = 0; i < m; ++i) {
    Vec2 pos{rng.uniform(-50.0, 50.0), rng.uniform(-50.0, 50.0)};
    const double speed = rng.uniform(5.0, 15.0);
    double heading = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
    double turn_rate = 0.0;
    if (regime == Regime::B && rng.uniform() < 0.5) {
      turn_rate = rng.uniform(-0.15, 0.15);  // rad per step
    }

    std::vector<Vec2> samples(total_steps);
    // Noise draws happen even at sigma=0 so the stream layout does not depend
    // on the config value.
    samples[0] = {pos.x + config.noise_sigma * rng.gaussian(),
                  pos.y + config.noise_sigma * rng.gaussian()};
    for (std::uint32_t k = 1; k < total_steps; ++k) {
      pos.x += speed * config.dt * std::cos(heading);
      pos.y += speed * config.dt * std::sin(heading);
      heading += turn_rate;
      samples[k] = {pos.x + config.noise_sigma * rng.gaussian(),
                    pos.y + config.noise_sigma * rng.gaussian()};
    }

    AgentTrack& track = scenario.agents[i];
    track.observed.assign(samples.begin(), samples.begin() + config.t_obs);
    track.future.assign(samples.begin() + config.t_obs, samples.end());
  }
  return scenario;
}

std::vector<ClientDataset> partition_clients(const GeneratorConfig& config) {
  config.validate();
  if (config.num_clients % 2 != 0) {
    throw ValidationError("num_clients must be even to split the two regimes evenly, got " +
                          std::to_string(config.num_clients));
  }

  std::vector<ClientDataset> clients(config.num_clients);
  for (std::uint32_t c = 0; c < config.num_clients; ++c) {
    ClientDataset& dataset = clients[c];
    dataset.client_id = c;
    dataset.regime = c < config.num_clients / 2 ? Regime::A : Regime::B;
    dataset.scenarios.reserve(config.scenarios_per_client);

    Rng rng(derive_seed(config.seed, c));
    for (std::uint32_t k = 0; k < config.scenarios_per_client; ++k) {
      Scenario s = generate_scenario(rng, dataset.regime, config);
      s.scenario_id =
          static_cast<std::uint64_t>(c) * config.scenarios_per_client + k;
      dataset.scenarios.push_back(std::move(s));
    }
  }
  return clients;
}

std::vector<Scenario> make_validation_set(const GeneratorConfig& config, std::uint32_t per_regime) {
  config.validate();
  std::vector<Scenario> out;
  out.reserve(2u * per_regime);
  for (Regime regime : {Regime::A, Regime::B}) {
    Rng rng(derive_seed(config.seed + 1, static_cast<std::uint64_t>(regime)));
    for (std::uint32_t k = 0; k < per_regime; ++k) {
      Scenario s = generate_scenario(rng, regime, config);
      s.scenario_id = out.size();
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace fltp
