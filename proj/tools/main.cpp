#include "smnreg/cli.hpp"
#include "smnreg/io.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <set>
#include <string>

// Command-line front end: check | run | summarize | synth.
//
// Options can also come from a flat `key = value` config file passed with
// --config; command-line flags win over config-file values.

namespace {

struct SubcommandBindings {
  CLI::App* app = nullptr;
  smnreg::RunConfig config;
  std::string config_path;
  std::string seed_text;  // parsed manually to allow full 64-bit seeds
};

void add_common_options(SubcommandBindings& b) {
  b.app->add_option("--x", b.config.x_path, "covariate matrix CSV (rows = observations)");
  b.app->add_option("--y", b.config.y_path, "response matrix CSV (rows = observations)");
  b.app->add_flag("--header", b.config.header, "input CSVs carry a header line");
  b.app->add_option("--a", b.config.a, "prior exponent a (default (d+1)/2)");
  b.app->add_option("--mixing", b.config.mixing_spec,
                    "mixing family: gamma:<nu> | degenerate | user:<tag>");
  b.app->add_option("--seed", b.seed_text, "master RNG seed (generated and recorded if absent)");
  b.app->add_option("--out", b.config.out_dir, "output directory");
  b.app->add_option("--config", b.config_path, "flat key = value config file (flags win)");
}

void add_run_options(SubcommandBindings& b) {
  b.app->add_option("--iters", b.config.iters, "total iterations");
  b.app->add_option("--burnin", b.config.burn_in, "iterations discarded before retention");
  b.app->add_option("--thin", b.config.thin, "retain every thin-th iteration");
  b.app->add_option("--chains", b.config.chains, "independent chains (split RNG streams)");
  b.app->add_flag("--force", b.config.force, "run despite failed propriety conditions");
}

void add_synth_options(SubcommandBindings& b) {
  b.app->add_option("--n", b.config.n, "observations (when no --x is given)");
  b.app->add_option("--p", b.config.p, "covariates (when no --x is given)");
  b.app->add_option("--d", b.config.d, "response dimension (when no --beta is given)");
  b.app->add_option("--beta", b.config.beta_path, "true coefficient matrix CSV (p x d)");
  b.app->add_option("--sigma", b.config.sigma_path, "true scale matrix CSV (d x d)");
}

int finalize(SubcommandBindings& b) {
  std::set<std::string> given;
  for (const auto* opt : b.app->get_options())
    if (opt->count() > 0 && opt->get_lnames().size() == 1) given.insert(opt->get_lnames()[0]);

  if (!b.config_path.empty()) {
    const smnreg::KvDoc doc = smnreg::read_kv_file(b.config_path);
    smnreg::KvDoc without_seed;
    for (const auto& kv : doc) {
      if (kv.first == "seed" && !given.count("seed")) {
        b.seed_text = kv.second;
        continue;
      }
      without_seed.push_back(kv);
    }
    smnreg::apply_config_file(b.config, without_seed, given);
  }
  if (!b.seed_text.empty()) b.config.seed = std::stoull(b.seed_text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DA Gibbs sampler for multivariate linear regression with "
               "scale-mixture-of-normals errors"};
  app.require_subcommand(1);

  SubcommandBindings check_b, run_b, synth_b;
  std::string trace_path, summarize_out;

  check_b.app = app.add_subcommand(
      "check", "validate propriety conditions and classify geometric ergodicity");
  add_common_options(check_b);

  run_b.app = app.add_subcommand("run", "run the sampler and write trace files");
  add_common_options(run_b);
  add_run_options(run_b);

  auto* summarize_app =
      app.add_subcommand("summarize", "posterior summaries and MCMC standard errors of a trace");
  summarize_app->add_option("trace", trace_path, "trace CSV written by `run`")->required();
  summarize_app->add_option("--out", summarize_out, "output directory (default: beside the trace)");

  synth_b.app = app.add_subcommand("synth", "generate a synthetic dataset from the model");
  add_common_options(synth_b);
  add_synth_options(synth_b);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : smnreg::kExitValidation;
  }

  try {
    if (check_b.app->parsed()) {
      finalize(check_b);
      return smnreg::cmd_check(check_b.config, std::cout, std::cerr);
    }
    if (run_b.app->parsed()) {
      finalize(run_b);
      return smnreg::cmd_run(run_b.config, std::cout, std::cerr);
    }
    if (summarize_app->parsed())
      return smnreg::cmd_summarize(trace_path, summarize_out, std::cout, std::cerr);
    if (synth_b.app->parsed()) {
      finalize(synth_b);
      return smnreg::cmd_synth(synth_b.config, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return smnreg::kExitValidation;
  }
  return smnreg::kExitValidation;
}
