#pragma once

#include <cstddef>
#include <vector>

#include "fltp/model.hpp"
#include "fltp/scenario.hpp"

namespace fltp {

// Endpoint-error threshold for the miss rate.
inline constexpr double kMissThresholdMeters = 2.0;

struct EvalReport {
  double nll = 0.0;
  double min_ade = 0.0;  // meters
  double min_fde = 0.0;  // meters
  double mr = 0.0;       // fraction in [0, 1]
  std::size_t n_scenarios = 0;
};

// Target-agent metrics averaged over the validation scenarios. The best mode
// for minADE/minFDE is the one with the smallest endpoint error; a scenario
// is a miss when every mode's endpoint error exceeds the 2 m threshold. The
// NLL column uses the full-trajectory best mode, the same choice as training.
EvalReport evaluate(const ParamVector& params, const std::vector<Scenario>& validation,
                    unsigned threads = 1);

}  // namespace fltp
