#include <doctest.h>

#include "fltp/config.hpp"
#include "fltp/error.hpp"

using namespace fltp;

TEST_CASE("config parsing: comments, blanks and whitespace") {
  const std::string text =
      "# full-line comment\n"
      "\n"
      "seed = 9   # trailing comment\n"
      "  num_clients=6\n"
      "mode = fltp\n"
      "eta = 1e-3\n"
      "literal_decay = true\n";
  const RunConfig cfg = RunConfig::from_text(text);
  CHECK(cfg.gen.seed == 9);
  CHECK(cfg.gen.num_clients == 6);
  CHECK(cfg.mode == RunMode::Fltp);
  CHECK(cfg.hyper.eta == doctest::Approx(1e-3));
  CHECK(cfg.hyper.literal_decay);
}

TEST_CASE("defaults hold when keys are absent") {
  const RunConfig cfg = RunConfig::from_text("");
  CHECK(cfg.gen.num_clients == 20);
  CHECK(cfg.gen.scenarios_per_client == 100);
  CHECK(cfg.gen.t_obs == 20);
  CHECK(cfg.gen.t_pre == 30);
  CHECK(cfg.dims.modes == 6);
  CHECK(cfg.dims.hidden == 64);
  CHECK(cfg.hyper.eta == doctest::Approx(5e-4));
  CHECK(cfg.hyper.lambda == doctest::Approx(1e-4));
  CHECK(cfg.hyper.batch_size == 32);
  CHECK(cfg.hyper.epochs == 4);
  CHECK(cfg.hyper.beta1 == doctest::Approx(0.9));
  CHECK(cfg.hyper.beta2 == doctest::Approx(0.999));
  CHECK(cfg.rounds == 250);
  CHECK(cfg.f1 == doctest::Approx(0.1));
  CHECK(!cfg.f2.has_value());
  CHECK(cfg.eval_every == 1);
  CHECK(cfg.val_per_regime == 200);
  CHECK(!cfg.hyper.literal_decay);
}

TEST_CASE("model horizons track the generator horizons") {
  const RunConfig cfg = RunConfig::from_text("t_obs = 8\nt_pre = 6\n");
  CHECK(cfg.dims.t_obs == 8);
  CHECK(cfg.dims.t_pre == 6);
}

TEST_CASE("unknown keys, bad values and duplicates are rejected") {
  CHECK_THROWS_AS(RunConfig::from_text("no_such_key = 1\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("eta = fast\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("rounds = -3\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("seed = 1\nseed = 2\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("just a line\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("mode = sgd\n"), ValidationError);
  CHECK_THROWS_AS(RunConfig::from_text("eval_split = both\n"), ValidationError);
}

TEST_CASE("command requirements") {
  RunConfig cfg = RunConfig::from_text("dataset = /tmp/x.ftpd\n");
  CHECK_NOTHROW(cfg.require_for_gen());
  CHECK_THROWS_AS(cfg.require_for_train(), ValidationError);  // mode + out_dir missing

  cfg = RunConfig::from_text("mode = alfltp-nll\ndataset = d\nout_dir = o\n");
  CHECK_THROWS_AS(cfg.require_for_train(), ValidationError);  // f2 missing

  cfg = RunConfig::from_text("mode = alfltp-nll\ndataset = d\nout_dir = o\nf2 = 0.3\n");
  CHECK_NOTHROW(cfg.require_for_train());
  CHECK(cfg.al_config(SelectionMetric::NLL).f2 == doctest::Approx(0.3));

  cfg = RunConfig::from_text("");
  CHECK_THROWS_AS(cfg.require_for_gen(), ValidationError);  // dataset missing
}

TEST_CASE("fl_config mirrors the flat keys") {
  const RunConfig cfg = RunConfig::from_text(
      "seed = 123\nrounds = 7\nf1 = 0.25\neval_every = 2\nthreads = 3\nepochs = 2\n");
  const FlConfig fl = cfg.fl_config();
  CHECK(fl.seed == 123);
  CHECK(fl.rounds == 7);
  CHECK(fl.f1 == doctest::Approx(0.25));
  CHECK(fl.eval_every == 2);
  CHECK(fl.threads == 3);
  CHECK(fl.hyper.epochs == 2);
}
