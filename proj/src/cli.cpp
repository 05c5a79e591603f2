#include "smnreg/cli.hpp"

#include "smnreg/diagnostics.hpp"
#include "smnreg/ergodicity.hpp"
#include "smnreg/model.hpp"
#include "smnreg/sampler.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <random>
#include <vector>

namespace smnreg {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

double parse_real(const std::string& text, const std::string& what) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("invalid " + what + " '" + text + "'");
  }
  if (pos != text.size() || !std::isfinite(value))
    throw std::invalid_argument("invalid " + what + " '" + text + "'");
  return value;
}

struct LoadedProblem {
  Dataset data;
  PriorSpec prior;
  MixingDensity mixing;
};

LoadedProblem load_problem(const RunConfig& config) {
  if (config.x_path.empty() || config.y_path.empty())
    throw std::invalid_argument("both --x and --y are required");
  if (config.mixing_spec.empty())
    throw std::invalid_argument("--mixing is required (gamma:<nu>, degenerate, or user:<tag>)");
  Eigen::MatrixXd X = load_matrix_csv(config.x_path, config.header);
  Eigen::MatrixXd Y = load_matrix_csv(config.y_path, config.header);
  Dataset data(std::move(X), std::move(Y));
  const int d = data.d();
  PriorSpec prior = config.a ? PriorSpec(*config.a) : PriorSpec::standard_noninformative(d);
  MixingDensity mixing = parse_mixing(config.mixing_spec, d);
  return LoadedProblem{std::move(data), prior, std::move(mixing)};
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
  if (seed) return *seed;
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

GEVerdict verdict_for(const MixingDensity& mixing, const Dims& dims, double a) {
  if (mixing.family() == MixingDensity::Family::GammaNuHalf)
    return gamma_rule(mixing.nu(), dims, a);
  return classify_ge(mixing.origin(), dims, a);
}

std::string join_grid(const std::vector<double>& grid) {
  std::string s;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) s += ",";
    s += fmt(grid[i]);
  }
  return s;
}

}  // namespace

MixingDensity parse_mixing(const std::string& spec, int d) {
  // Accept both flag syntax (gamma:4.5) and config syntax (gamma(4.5)).
  std::string s = spec;
  if (!s.empty() && s.back() == ')') {
    s.pop_back();
    const auto open = s.find('(');
    if (open != std::string::npos) s[open] = ':';
  }

  if (s.rfind("gamma:", 0) == 0) {
    const double nu = parse_real(s.substr(6), "gamma degrees of freedom");
    return MixingDensity::gamma_nu_half(nu, d);
  }
  if (s == "degenerate") return MixingDensity::degenerate_one(d);
  if (s.rfind("user", 0) == 0) {
    if (s == "user")
      throw std::invalid_argument(
          "user mixing requires a declared origin tag: user:zero:<delta>, user:poly:<c>, or "
          "user:faster");
    if (s.rfind("user:zero:", 0) == 0) {
      const double delta = parse_real(s.substr(10), "zero-near-origin delta");
      return MixingDensity::user_defined(nullptr, OriginBehavior::zero_near_origin(delta), d);
    }
    if (s.rfind("user:poly:", 0) == 0) {
      std::size_t pos = 0;
      double c = 0.0;
      const std::string text = s.substr(10);
      try {
        c = std::stod(text, &pos);
      } catch (const std::exception&) {
        pos = std::string::npos;
      }
      if (pos != text.size() || !std::isfinite(c))
        throw std::invalid_argument("invalid polynomial origin power '" + text + "'");
      return MixingDensity::user_defined(nullptr, OriginBehavior::polynomial(c), d);
    }
    if (s == "user:faster")
      return MixingDensity::user_defined(nullptr, OriginBehavior::faster_than_polynomial(), d);
    throw std::invalid_argument("unknown user mixing tag '" + spec + "'");
  }
  throw std::invalid_argument("unknown mixing family '" + spec +
                              "' (expected gamma:<nu>, degenerate, or user:<tag>)");
}

void apply_config_file(RunConfig& config, const KvDoc& doc,
                       const std::set<std::string>& cli_given) {
  for (const auto& [key, value] : doc) {
    if (cli_given.count(key)) continue;
    if (key == "command") continue;  // provenance line in recorded configs
    if (key == "x") config.x_path = value;
    else if (key == "y") config.y_path = value;
    else if (key == "header") config.header = (value == "true" || value == "1" || value == "yes");
    else if (key == "a") config.a = std::stod(value);
    else if (key == "mixing") config.mixing_spec = value;
    else if (key == "iters") config.iters = std::stol(value);
    else if (key == "burnin") config.burn_in = std::stol(value);
    else if (key == "thin") config.thin = std::stol(value);
    else if (key == "seed") config.seed = std::stoull(value);
    else if (key == "chains") config.chains = std::stoi(value);
    else if (key == "force") config.force = (value == "true" || value == "1" || value == "yes");
    else if (key == "out") config.out_dir = value;
    else if (key == "n") config.n = std::stoi(value);
    else if (key == "p") config.p = std::stoi(value);
    else if (key == "d") config.d = std::stoi(value);
    else if (key == "beta") config.beta_path = value;
    else if (key == "sigma") config.sigma_path = value;
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

int cmd_check(const RunConfig& config, std::ostream& out, std::ostream& err) {
  ProprietyReport propriety;
  KvDoc doc;
  try {
    LoadedProblem problem = load_problem(config);
    const Dataset& data = problem.data;
    const Dims dims{data.n(), data.p(), data.d()};
    const double a = problem.prior.a;
    const MixingDensity& mixing = problem.mixing;

    propriety = validate_propriety(data, problem.prior);
    const CheckOutcome cond_m = check_condition_m(mixing);
    const GEVerdict verdict = verdict_for(mixing, dims, a);

    out << "dataset: n = " << dims.n << ", p = " << dims.p << ", d = " << dims.d
        << ", a = " << fmt(a) << ", mixing = " << mixing.name() << "\n";
    out << "origin behavior: " << to_string(mixing.origin()) << "\n\n";

    out << "propriety (necessary conditions):\n";
    out << "  rank([X:Y]) = " << propriety.rank_of_lambda << " (required " << propriety.required_rank
        << ")  -> " << (propriety.rank_ok ? "ok" : "FAIL: rank condition rank([X:Y]) = p + d")
        << "\n";
    out << "  slack n - p - 2d + 2a = " << fmt(propriety.slack) << "  -> "
        << (propriety.sample_size_ok ? "ok" : "FAIL: sample-size condition n > p + 2d - 2a")
        << "\n\n";

    out << "integrability of u^{d/2} h (tail): " << to_string(cond_m) << "\n";
    out << "geometric ergodicity: " << to_string(verdict.status) << "\n";
    out << "  " << verdict.detail << "\n";
    out << "  (sufficient-condition verdict";
    if (cond_m != CheckOutcome::Yes)
      out << ", assuming tail integrability of u^{d/2} h as declared";
    out << ")\n";

    doc = {{"command", std::string("check")},
           {"n", std::to_string(dims.n)},
           {"p", std::to_string(dims.p)},
           {"d", std::to_string(dims.d)},
           {"a", fmt(a)},
           {"mixing", mixing.name()},
           {"origin", to_string(mixing.origin())},
           {"propriety.rank", std::to_string(propriety.rank_of_lambda)},
           {"propriety.rank_required", std::to_string(propriety.required_rank)},
           {"propriety.rank_ok", yes_no(propriety.rank_ok)},
           {"propriety.slack", fmt(propriety.slack)},
           {"propriety.sample_size_ok", yes_no(propriety.sample_size_ok)},
           {"propriety.ok", yes_no(propriety.ok())},
           {"condition_m", to_string(cond_m)},
           {"ge.status", to_string(verdict.status)},
           {"ge.clause", to_string(verdict.clause)},
           {"ge.detail", verdict.detail}};
    if (std::isfinite(verdict.power)) doc.emplace_back("ge.power", fmt(verdict.power));
    if (std::isfinite(verdict.threshold)) doc.emplace_back("ge.threshold", fmt(verdict.threshold));

    if (mixing.family() == MixingDensity::Family::GammaNuHalf) {
      const double nu = mixing.nu();
      if (nu + dims.d - 2 > 0) {
        // Canonical choice: the ratio I_{d-2}/I_d is exactly affine with
        // slope 1/(nu+d-2), so this lambda gives the tight constant bound.
        const double lambda = 1.0 / (nu + dims.d - 2);
        const DriftParams drift = drift_params(mixing, dims, a, lambda);
        out << "\ndrift certificate (gamma mixing, lambda = 1/(nu+d-2)):\n";
        out << "  lambda = " << fmt(drift.lambda) << ", L = " << fmt(drift.L) << "\n";
        out << "  lambda' = " << fmt(drift.lambda_prime) << ", L' = " << fmt(drift.L_prime)
            << ", qualifies (lambda' < 1): " << yes_no(drift.qualifies) << "\n";
        doc.emplace_back("drift.lambda", fmt(drift.lambda));
        doc.emplace_back("drift.L", fmt(drift.L));
        doc.emplace_back("drift.lambda_prime", fmt(drift.lambda_prime));
        doc.emplace_back("drift.L_prime", fmt(drift.L_prime));
        doc.emplace_back("drift.qualifies", yes_no(drift.qualifies));
        doc.emplace_back("drift.s_grid", join_grid(drift.s_grid));

        const double eps1 = drift.epsilon_of_l(1.0);
        out << "  minorization epsilon(1) = " << fmt(eps1) << "\n";
        doc.emplace_back("minorization.epsilon_at_1", fmt(eps1));
        if (propriety.rank_ok) {
          const double v_init = drift_function(ols_init(data), data);
          if (v_init > 0.0) {
            const double eps_v = drift.epsilon_of_l(v_init);
            out << "  V(init) = " << fmt(v_init) << ", epsilon(V(init)) = " << fmt(eps_v) << "\n";
            doc.emplace_back("minorization.v_init", fmt(v_init));
            doc.emplace_back("minorization.epsilon_at_v_init", fmt(eps_v));
          }
        }
      } else {
        out << "\ndrift certificate unavailable: nu + d - 2 <= 0, the ratio integral diverges\n";
        doc.emplace_back("drift.available", "no");
      }
    }

    if (!config.out_dir.empty()) {
      fs::create_directories(config.out_dir);
      const std::string path = (fs::path(config.out_dir) / "check_report.txt").string();
      write_kv_file(path, doc);
      out << "\nreport written to " << path << "\n";
    }
  } catch (const std::exception& e) {
    err << "check failed: " << e.what() << "\n";
    return kExitValidation;
  }
  if (!propriety.ok()) {
    err << "propriety conditions failed\n";
    return kExitValidation;
  }
  return kExitOk;
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.out_dir.empty()) throw std::invalid_argument("--out directory is required");
    if (config.chains < 1) throw std::invalid_argument("--chains must be >= 1");
    if (config.burn_in < 0) throw std::invalid_argument("--burnin must be >= 0");
    if (config.iters <= config.burn_in)
      throw std::invalid_argument("--iters must exceed --burnin");
    if (config.thin < 1) throw std::invalid_argument("--thin must be >= 1");

    LoadedProblem problem = load_problem(config);
    const Dataset& data = problem.data;
    const Dims dims{data.n(), data.p(), data.d()};

    const ProprietyReport propriety = validate_propriety(data, problem.prior);
    if (!propriety.ok()) {
      if (!config.force) {
        err << "refusing to run: necessary propriety conditions fail ("
            << (propriety.rank_ok ? "" : "rank condition rank([X:Y]) = p + d")
            << (!propriety.rank_ok && !propriety.sample_size_ok ? "; " : "")
            << (propriety.sample_size_ok ? "" : "sample-size condition n > p + 2d - 2a")
            << "); pass --force to override\n";
        return kExitValidation;
      }
      err << "warning: propriety conditions fail, continuing because --force was given\n";
    }
    const GEVerdict verdict = verdict_for(problem.mixing, dims, problem.prior.a);
    if (verdict.status != GEVerdict::Status::Guaranteed)
      err << "warning: geometric ergodicity not guaranteed by the classification ("
          << verdict.detail << "); the chain remains valid, standard-error "
          << "guarantees may not apply\n";

    const std::uint64_t master_seed = resolve_seed(config.seed);
    fs::create_directories(config.out_dir);

    KvDoc resolved{{"command", std::string("run")},
                   {"x", config.x_path},
                   {"y", config.y_path},
                   {"header", config.header ? "true" : "false"},
                   {"a", fmt(problem.prior.a)},
                   {"mixing", config.mixing_spec},
                   {"iters", std::to_string(config.iters)},
                   {"burnin", std::to_string(config.burn_in)},
                   {"thin", std::to_string(config.thin)},
                   {"seed", std::to_string(master_seed)},
                   {"chains", std::to_string(config.chains)},
                   {"force", config.force ? "true" : "false"},
                   {"out", config.out_dir}};
    write_kv_file((fs::path(config.out_dir) / "config.txt").string(), resolved);

    const ChainState init = ols_init(data);
    std::vector<std::string> failures(config.chains);
    std::vector<long> rows(config.chains, 0);

#pragma omp parallel for schedule(dynamic) if (config.chains > 1)
    for (int c = 0; c < config.chains; ++c) {
      const std::uint64_t chain_seed = rng::derive_seed(master_seed, {static_cast<std::uint64_t>(c)});
      const std::string trace_path =
          (fs::path(config.out_dir) / ("trace_" + std::to_string(c) + ".csv")).string();
      TraceMeta meta{dims.n,     dims.p,         dims.d,      problem.prior.a,
                     problem.mixing.name(), chain_seed, config.iters, config.burn_in,
                     config.thin};
      long written = 0;
      try {
        TraceWriter writer(trace_path, dims.p, dims.d);
        RunHooks hooks;
        hooks.on_retained = [&writer, &written](long iter, const ChainState& state,
                                                const Eigen::VectorXd&) {
          writer.append(iter, state);
          written = writer.rows_written();
        };
        run_chain(init, config.iters, config.burn_in, config.thin, data, problem.prior,
                  problem.mixing, chain_seed, false, &hooks);
      } catch (const std::exception& e) {
        failures[c] = e.what();
      }
      rows[c] = written;
      try {
        const KvDoc extras{{"master_seed", std::to_string(master_seed)},
                           {"chain", std::to_string(c)}};
        write_trace_meta(trace_meta_path(trace_path), meta, written, extras);
      } catch (const std::exception& e) {
        if (failures[c].empty()) failures[c] = e.what();
      }
    }

    bool any_failed = false;
    for (int c = 0; c < config.chains; ++c) {
      const std::string trace_path =
          (fs::path(config.out_dir) / ("trace_" + std::to_string(c) + ".csv")).string();
      if (failures[c].empty()) {
        out << "wrote " << trace_path << " (" << rows[c] << " rows)\n";
      } else {
        err << "chain " << c << " aborted after " << rows[c]
            << " retained rows (partial trace flushed): " << failures[c] << "\n";
        any_failed = true;
      }
    }
    return any_failed ? kExitRuntime : kExitOk;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_summarize(const std::string& trace_path, const std::string& out_dir, std::ostream& out,
                  std::ostream& err) {
  try {
    const ChainTrace trace = read_trace_csv(trace_path);
    if (trace.states.empty()) throw std::runtime_error(trace_path + ": empty trace");
    const SummaryTable table = summarize(trace);

    write_summary_text(out, table);

    const fs::path trace_fs(trace_path);
    const fs::path dir = out_dir.empty() ? trace_fs.parent_path() : fs::path(out_dir);
    if (!dir.empty()) fs::create_directories(dir);
    const std::string stem = trace_fs.stem().string();
    const std::string csv_path = (dir / (stem + "_summary.csv")).string();
    std::ofstream text_file((dir / (stem + "_summary.txt")).string());
    write_summary_csv(csv_path, table);
    write_summary_text(text_file, table);
    out << "\nsummary written to " << csv_path << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "summarize failed: " << e.what() << "\n";
    return kExitValidation;
  }
}

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    if (config.out_dir.empty()) throw std::invalid_argument("--out directory is required");
    if (config.mixing_spec.empty()) throw std::invalid_argument("--mixing is required");
    const std::uint64_t seed = resolve_seed(config.seed);

    Eigen::MatrixXd X;
    if (!config.x_path.empty()) {
      X = load_matrix_csv(config.x_path, config.header);
    } else {
      if (config.n < 1 || config.p < 1)
        throw std::invalid_argument("--n and --p (or --x) are required");
      // Default design: intercept column of ones, remaining columns iid
      // standard normal.
      X.resize(config.n, config.p);
      X.col(0).setOnes();
      rng::Stream design(rng::derive_seed(seed, {0}));
      for (int i = 0; i < config.n; ++i)
        for (int j = 1; j < config.p; ++j) X(i, j) = design.normal();
    }
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());

    Eigen::MatrixXd beta;
    if (!config.beta_path.empty()) {
      beta = load_matrix_csv(config.beta_path, config.header);
      if (beta.rows() != p) throw std::invalid_argument("--beta must have p rows");
    } else {
      if (config.d < 1) throw std::invalid_argument("--d (or --beta) is required");
      beta = Eigen::MatrixXd::Ones(p, config.d);
    }
    const int d = static_cast<int>(beta.cols());

    Eigen::MatrixXd sigma;
    if (!config.sigma_path.empty()) {
      sigma = load_matrix_csv(config.sigma_path, config.header);
      if (sigma.rows() != d || sigma.cols() != d)
        throw std::invalid_argument("--sigma must be d x d");
    } else {
      sigma = Eigen::MatrixXd::Identity(d, d);
    }

    const MixingDensity mixing = parse_mixing(config.mixing_spec, d);
    const Dataset data =
        generate_synthetic(beta, sigma, X, mixing, rng::derive_seed(seed, {1}));

    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    write_matrix_csv((dir / "x.csv").string(), data.X());
    write_matrix_csv((dir / "y.csv").string(), data.Y());
    write_matrix_csv((dir / "beta_true.csv").string(), beta);
    write_matrix_csv((dir / "sigma_true.csv").string(), sigma);
    const KvDoc meta{{"command", std::string("synth")}, {"n", std::to_string(n)},
                     {"p", std::to_string(p)},          {"d", std::to_string(d)},
                     {"mixing", mixing.name()},         {"seed", std::to_string(seed)}};
    write_kv_file((dir / "synth_meta.txt").string(), meta);
    out << "wrote " << (dir / "x.csv").string() << " and " << (dir / "y.csv").string() << " (n = "
        << n << ", p = " << p << ", d = " << d << ")\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "synth failed: " << e.what() << "\n";
    return kExitValidation;
  }
}

}  // namespace smnreg
