#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "fltp/metrics.hpp"
#include "fltp/model.hpp"
#include "fltp/rng.hpp"
#include "fltp/scenario.hpp"
#include "fltp/trainer.hpp"

namespace fltp {

// Round-level sampling streams live outside the 32-bit client-id space so
// derive_seed(seed, round, tag) can never collide with a client stream.
inline constexpr std::uint64_t kSamplingStreamTag = 0xF17F0001'00000000ULL;

// floor(fraction * count) evaluated as if the fraction were exact decimal
// text; the nudge keeps e.g. 0.3 * 20 from flooring to 5.
inline std::size_t selection_count(double fraction, std::size_t count) {
  return static_cast<std::size_t>(fraction * static_cast<double>(count) + 1e-9);
}

struct FlConfig {
  std::uint32_t rounds = 250;
  double f1 = 0.1;  // fraction of clients trained per round
  std::uint64_t seed = 42;
  TrainHyper hyper;
  std::uint32_t eval_every = 1;
  std::uint32_t threads = 0;  // 0 = hardware concurrency

  void validate(std::size_t num_clients) const;
};

struct RoundLog {
  std::uint32_t round = 0;
  std::vector<std::uint32_t> candidates;                  // Q_r; empty for FLTP and round 1
  std::vector<std::uint32_t> selected;                    // L_r
  std::vector<std::pair<std::uint32_t, double>> values;   // v_c per client; empty for FLTP
  std::optional<EvalReport> metrics;
};

struct RunResult {
  ParamVector params;
  std::vector<RoundLog> rounds;
};

using EvalFn = std::function<EvalReport(const ParamVector&)>;

// Draws n distinct clients, each draw proportional to K_c over the clients
// still in the pool. Returned in draw order.
std::vector<std::uint32_t> sample_weighted(const std::vector<std::uint64_t>& sizes, std::size_t n,
                                           Rng& rng);

// Convex combination weighted by relative data volume, accumulated in
// ascending client_id order.
ParamVector aggregate(const std::map<std::uint32_t, ParamVector>& models,
                      const std::map<std::uint32_t, std::uint64_t>& sizes);

// FedAvg-style loop: weighted sampling, parallel local AdamW updates, volume-
// weighted aggregation. Deterministic for a given config regardless of the
// thread count; `eval` (when set) is invoked every eval_every rounds.
RunResult run_fltp(const std::vector<ClientDataset>& data, const FlConfig& config,
                   const ParamVector& w0, const EvalFn& eval = nullptr);

// No-federation baseline: the designated client trains alone for the same
// number of rounds, with the same per-round seeds it would get under FLTP.
RunResult run_local(const std::vector<ClientDataset>& data, std::uint32_t client_id,
                    const FlConfig& config, const ParamVector& w0, const EvalFn& eval = nullptr);

}  // namespace fltp
