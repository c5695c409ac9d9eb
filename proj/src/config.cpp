#include "fltp/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

#include "fltp/error.hpp"

namespace fltp {

RunMode parse_run_mode(const std::string& text) {
  if (text == "local") return RunMode::Local;
  if (text == "fltp") return RunMode::Fltp;
  if (text == "alfltp-nll") return RunMode::AlfltpNll;
  if (text == "alfltp-au") return RunMode::AlfltpAu;
  throw ValidationError("unknown mode '" + text +
                        "' (expected local, fltp, alfltp-nll or alfltp-au)");
}

std::string run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Local: return "local";
    case RunMode::Fltp: return "fltp";
    case RunMode::AlfltpNll: return "alfltp-nll";
    case RunMode::AlfltpAu: return "alfltp-au";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    }
    if (!kv.emplace(key, value).second) {
      throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" + key +
                            "'");
    }
  }
  return kv;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError("config key '" + key + "': cannot parse '" + value + "' as number");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + key + "': cannot parse '" + value +
                          "' as unsigned integer");
  }
  return v;
}

std::uint32_t to_u32(const std::string& key, const std::string& value) {
  const std::uint64_t v = to_u64(key, value);
  if (v > 0xffffffffULL) throw ValidationError("config key '" + key + "': value too large");
  return static_cast<std::uint32_t>(v);
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ValidationError("config key '" + key + "': cannot parse '" + value + "' as bool");
}

}  // namespace

RunConfig RunConfig::from_text(const std::string& text) {
  const auto kv = parse_key_values(text);
  RunConfig cfg;

  for (const auto& [key, value] : kv) {
    if (key == "mode") cfg.mode = parse_run_mode(value);
    else if (key == "dataset") cfg.dataset_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "seed") cfg.gen.seed = to_u64(key, value);
    else if (key == "num_clients") cfg.gen.num_clients = to_u32(key, value);
    else if (key == "scenarios_per_client") cfg.gen.scenarios_per_client = to_u32(key, value);
    else if (key == "agents_min") cfg.gen.agents_min = to_u32(key, value);
    else if (key == "agents_max") cfg.gen.agents_max = to_u32(key, value);
    else if (key == "dt") cfg.gen.dt = to_double(key, value);
    else if (key == "t_obs") cfg.gen.t_obs = to_u32(key, value);
    else if (key == "t_pre") cfg.gen.t_pre = to_u32(key, value);
    else if (key == "noise_sigma") cfg.gen.noise_sigma = to_double(key, value);
    else if (key == "modes") cfg.dims.modes = to_u32(key, value);
    else if (key == "hidden") cfg.dims.hidden = to_u32(key, value);
    else if (key == "eta") cfg.hyper.eta = to_double(key, value);
    else if (key == "lambda") cfg.hyper.lambda = to_double(key, value);
    else if (key == "beta1") cfg.hyper.beta1 = to_double(key, value);
    else if (key == "beta2") cfg.hyper.beta2 = to_double(key, value);
    else if (key == "epsilon") cfg.hyper.epsilon = to_double(key, value);
    else if (key == "batch_size") cfg.hyper.batch_size = to_u32(key, value);
    else if (key == "epochs") cfg.hyper.epochs = to_u32(key, value);
    else if (key == "literal_decay") cfg.hyper.literal_decay = to_bool(key, value);
    else if (key == "rounds") cfg.rounds = to_u32(key, value);
    else if (key == "f1") cfg.f1 = to_double(key, value);
    else if (key == "f2") cfg.f2 = to_double(key, value);
    else if (key == "eval_every") cfg.eval_every = to_u32(key, value);
    else if (key == "threads") cfg.threads = to_u32(key, value);
    else if (key == "local_client") cfg.local_client = to_u32(key, value);
    else if (key == "val_per_regime") cfg.val_per_regime = to_u32(key, value);
    else if (key == "eval_split") {
      if (value != "validation" && value != "dataset") {
        throw ValidationError("eval_split must be 'validation' or 'dataset'");
      }
      cfg.eval_split = value;
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }

  // Model horizons follow the generator's.
  cfg.dims.t_obs = cfg.gen.t_obs;
  cfg.dims.t_pre = cfg.gen.t_pre;
  return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_text(buf.str());
}

FlConfig RunConfig::fl_config() const {
  FlConfig fl;
  fl.rounds = rounds;
  fl.f1 = f1;
  fl.seed = gen.seed;
  fl.hyper = hyper;
  fl.eval_every = eval_every;
  fl.threads = threads;
  return fl;
}

AlConfig RunConfig::al_config(SelectionMetric metric) const {
  if (!f2) throw ValidationError("alfltp modes require the f2 key");
  AlConfig al;
  al.fl = fl_config();
  al.f2 = *f2;
  al.metric = metric;
  return al;
}

void RunConfig::require_for_gen() const {
  gen.validate();
  if (!dataset_path) throw ValidationError("gen-data requires the dataset key (output path)");
}

void RunConfig::require_for_train() const {
  gen.validate();
  dims.validate();
  hyper.validate();
  if (!mode) throw ValidationError("train requires the mode key");
  if (!dataset_path) throw ValidationError("train requires the dataset key");
  if (!out_dir) throw ValidationError("train requires the out_dir key");
  if ((*mode == RunMode::AlfltpNll || *mode == RunMode::AlfltpAu) && !f2) {
    throw ValidationError("mode " + run_mode_name(*mode) + " requires the f2 key");
  }
  if (val_per_regime == 0) throw ValidationError("val_per_regime must be >= 1");
}

void RunConfig::require_for_eval() const {
  gen.validate();
  dims.validate();
  if (!out_dir) throw ValidationError("eval requires the out_dir key");
  if (val_per_regime == 0 && eval_split == "validation") {
    throw ValidationError("val_per_regime must be >= 1");
  }
}

}  // namespace fltp
