#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "fltp/config.hpp"
#include "fltp/dataset_io.hpp"
#include "fltp/error.hpp"
#include "fltp/federation.hpp"
#include "fltp/io_util.hpp"
#include "fltp/metrics.hpp"
#include "fltp/params_io.hpp"
#include "fltp/selection.hpp"

namespace {

using namespace fltp;

void print_usage(std::ostream& out) {
  out << "usage: fltp <command> ...\n"
         "  fltp gen-data <config>            generate and save a client dataset\n"
         "  fltp train <config>               run local / fltp / alfltp-nll / alfltp-au training\n"
         "  fltp eval <params> <data> <config> evaluate a weight file\n";
}

std::string join_ids(const std::vector<std::uint32_t>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::string metrics_csv_row(std::uint32_t round, const EvalReport& report) {
  return std::to_string(round) + "," + fmt_double(report.nll) + "," + fmt_double(report.min_ade) +
         "," + fmt_double(report.min_fde) + "," + fmt_double(report.mr);
}

int cmd_gen_data(const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  cfg.require_for_gen();

  const auto clients = partition_clients(cfg.gen);
  const auto parent = std::filesystem::path(*cfg.dataset_path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  save_dataset(clients, *cfg.dataset_path);

  std::size_t total = 0;
  for (const auto& c : clients) total += c.scenarios.size();
  std::cout << "wrote " << *cfg.dataset_path << ": clients=" << clients.size()
            << " scenarios_per_client=" << cfg.gen.scenarios_per_client << " total=" << total
            << "\n";
  return 0;
}

int cmd_train(const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  cfg.require_for_train();

  const auto data = load_dataset(*cfg.dataset_path);
  const auto& probe = data.front().scenarios.front().agents.front();
  if (probe.observed.size() != cfg.gen.t_obs || probe.future.size() != cfg.gen.t_pre) {
    throw ValidationError("dataset horizons (" + std::to_string(probe.observed.size()) + "," +
                          std::to_string(probe.future.size()) + ") do not match config (" +
                          std::to_string(cfg.gen.t_obs) + "," + std::to_string(cfg.gen.t_pre) +
                          ")");
  }

  const auto validation = make_validation_set(cfg.gen, cfg.val_per_regime);
  const ParamVector w0 = init_params(cfg.gen.seed, cfg.dims);
  const FlConfig fl = cfg.fl_config();
  const EvalFn eval = [&](const ParamVector& params) {
    return evaluate(params, validation, cfg.threads);
  };

  RunResult result;
  switch (*cfg.mode) {
    case RunMode::Local:
      result = run_local(data, cfg.local_client, fl, w0, eval);
      break;
    case RunMode::Fltp:
      result = run_fltp(data, fl, w0, eval);
      break;
    case RunMode::AlfltpNll:
      result = run_alfltp(data, cfg.al_config(SelectionMetric::NLL), w0, eval);
      break;
    case RunMode::AlfltpAu:
      result = run_alfltp(data, cfg.al_config(SelectionMetric::AU), w0, eval);
      break;
  }

  std::filesystem::create_directories(*cfg.out_dir);
  const std::filesystem::path out_dir(*cfg.out_dir);
  save_params(result.params, (out_dir / "model.ftpw").string());

  std::string metrics_csv = "round,nll,min_ade,min_fde,mr\n";
  std::string rounds_csv = "round,candidates,selected,values\n";
  for (const RoundLog& log : result.rounds) {
    if (log.metrics) {
      metrics_csv += metrics_csv_row(log.round, *log.metrics) + "\n";
      std::cerr << "round " << log.round << "/" << fl.rounds << " nll=" << fmt_double(log.metrics->nll)
                << " min_ade=" << fmt_double(log.metrics->min_ade)
                << " min_fde=" << fmt_double(log.metrics->min_fde)
                << " mr=" << fmt_double(log.metrics->mr) << "\n";
    }
    std::string values;
    for (std::size_t i = 0; i < log.values.size(); ++i) {
      if (i) values += ';';
      values += std::to_string(log.values[i].first) + ":" + fmt_double(log.values[i].second);
    }
    rounds_csv += std::to_string(log.round) + "," + join_ids(log.candidates) + "," +
                  join_ids(log.selected) + "," + values + "\n";
  }
  atomic_write_file((out_dir / "metrics.csv").string(), metrics_csv);
  atomic_write_file((out_dir / "rounds.csv").string(), rounds_csv);

  std::cout << "mode=" << run_mode_name(*cfg.mode) << " rounds=" << fl.rounds << " params="
            << (out_dir / "model.ftpw").string() << "\n";
  return 0;
}

int cmd_eval(const std::string& params_path, const std::string& data_path,
             const std::string& config_path) {
  RunConfig cfg = RunConfig::from_file(config_path);
  cfg.require_for_eval();

  const ParamVector params = load_params(params_path);
  if (!(params.dims == cfg.dims)) {
    throw ValidationError("weight file dims (t_obs=" + std::to_string(params.dims.t_obs) +
                          ",t_pre=" + std::to_string(params.dims.t_pre) +
                          ",modes=" + std::to_string(params.dims.modes) +
                          ",hidden=" + std::to_string(params.dims.hidden) +
                          ") do not match config dims");
  }

  std::vector<Scenario> scenarios;
  if (cfg.eval_split == "dataset") {
    for (const ClientDataset& c : load_dataset(data_path)) {
      for (const Scenario& s : c.scenarios) scenarios.push_back(s);
    }
  } else {
    scenarios = make_validation_set(cfg.gen, cfg.val_per_regime);
  }

  const EvalReport report = evaluate(params, scenarios, cfg.threads);
  const std::string row = metrics_csv_row(0, report);
  std::cout << "n_scenarios=" << report.n_scenarios << " nll=" << fmt_double(report.nll)
            << " min_ade=" << fmt_double(report.min_ade)
            << " min_fde=" << fmt_double(report.min_fde) << " mr=" << fmt_double(report.mr)
            << "\n";

  std::filesystem::create_directories(*cfg.out_dir);
  const std::string csv_path = (std::filesystem::path(*cfg.out_dir) / "eval.csv").string();
  std::string csv = "round,nll,min_ade,min_fde,mr\n";
  if (std::filesystem::exists(csv_path)) {
    const auto bytes = read_file_bytes(csv_path);
    csv.assign(bytes.begin(), bytes.end());
  }
  csv += row + "\n";
  atomic_write_file(csv_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    if (argc < 2) {
      print_usage(std::cerr);
      return 1;
    }
    const std::string command = argv[1];
    if (command == "gen-data" && argc == 3) return cmd_gen_data(argv[2]);
    if (command == "train" && argc == 3) return cmd_train(argv[2]);
    if (command == "eval" && argc == 5) return cmd_eval(argv[2], argv[3], argv[4]);
    print_usage(std::cerr);
    return 1;
  } catch (const fltp::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
