#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "fltp/federation.hpp"
#include "fltp/model.hpp"
#include "fltp/scenario.hpp"
#include "fltp/selection.hpp"
#include "fltp/trainer.hpp"

namespace fltp {

enum class RunMode { Local, Fltp, AlfltpNll, AlfltpAu };

RunMode parse_run_mode(const std::string& text);  // throws ValidationError
std::string run_mode_name(RunMode mode);

// Flat key=value config file, '#' starts a comment. Unknown keys are
// rejected so typos surface as validation errors instead of silently falling
// back to defaults.
struct RunConfig {
  std::optional<RunMode> mode;
  std::optional<std::string> dataset_path;
  std::optional<std::string> out_dir;

  GeneratorConfig gen;
  ModelDims dims;
  TrainHyper hyper;

  std::uint32_t rounds = 250;
  double f1 = 0.1;
  std::optional<double> f2;
  std::uint32_t eval_every = 1;
  std::uint32_t threads = 0;

  std::uint32_t local_client = 0;
  std::uint32_t val_per_regime = 200;
  std::string eval_split = "validation";  // or "dataset"

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text);  // for tests

  FlConfig fl_config() const;
  AlConfig al_config(SelectionMetric metric) const;  // requires f2

  // Command-specific requirement checks.
  void require_for_gen() const;
  void require_for_train() const;
  void require_for_eval() const;
};

}  // namespace fltp
