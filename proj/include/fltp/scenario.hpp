#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fltp/rng.hpp"

namespace fltp {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const = default;

  double norm() const { return std::hypot(x, y); }
};

// One agent: T_obs observed positions followed by T_pre future positions,
// absolute coordinates in meters.
struct AgentTrack {
  std::vector<Vec2> observed;
  std::vector<Vec2> future;

  bool operator==(const AgentTrack&) const = default;
};

enum class Regime : std::uint8_t { A = 0, B = 1 };

// One driving sample: m agent tracks plus the index of the target agent the
// evaluation and selection values are computed on.
struct Scenario {
  std::uint64_t scenario_id = 0;
  std::vector<AgentTrack> agents;
  std::uint16_t target_index = 0;

  bool operator==(const Scenario&) const = default;
};

struct ClientDataset {
  std::uint32_t client_id = 0;
  Regime regime = Regime::A;
  std::vector<Scenario> scenarios;

  bool operator==(const ClientDataset&) const = default;
};

struct GeneratorConfig {
  std::uint64_t seed = 42;
  std::uint32_t num_clients = 20;
  std::uint32_t scenarios_per_client = 100;
  std::uint32_t agents_min = 2;
  std::uint32_t agents_max = 6;
  double dt = 0.1;  // seconds per step
  std::uint32_t t_obs = 20;
  std::uint32_t t_pre = 30;
  double noise_sigma = 0.1;  // meters, per recorded position

  void validate() const;  // throws ValidationError
};

// Simulates one scenario: m ~ U[agents_min, agents_max] unicycle agents,
// position U[-50,50]^2, speed U[5,15] m/s, heading U[0,2pi). Regime A drives
// straight; regime B turns at a constant U[-0.15,0.15] rad/step rate with
// probability 1/2. Recorded positions carry additive N(0, noise_sigma^2)
// noise per coordinate. target_index is always 0; scenario_id is left 0 for
// the caller to assign.
Scenario generate_scenario(Rng& rng, Regime regime, const GeneratorConfig& config);

// Splits num_clients across the two regimes (first half A, second half B) and
// generates scenarios_per_client scenarios per client from the sub-seed
// derive_seed(seed, client_id). Rejects odd num_clients.
std::vector<ClientDataset> partition_clients(const GeneratorConfig& config);

// Held-out split: per_regime scenarios from each regime, seeded from
// config.seed + 1 so it is disjoint from every training sub-stream.
std::vector<Scenario> make_validation_set(const GeneratorConfig& config, std::uint32_t per_regime);

}  // namespace fltp
