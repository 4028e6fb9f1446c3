// Command-line front end: simulate -> fit -> calibrate -> test -> dpl -> report.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "genemix/data_model.hpp"
#include "genemix/report.hpp"
#include "genemix/sampler.hpp"
#include "genemix/trace.hpp"

namespace fs = std::filesystem;
using namespace genemix;

namespace {

struct Settings {
  // shared
  std::uint64_t seed = 1;
  Index workers = 1;
  Index iterations = 100000;
  Index burn_in = 50000;
  std::string out = ".";

  // simulate
  std::string scenario = "null_model";
  Index individuals = 100;
  Index controls = 50;
  Index cases = 50;
  std::string loci = "20,20";
  Index subpopulations = 5;
  std::string weights = "0.1,0.4,0.2,0.15,0.15";
  std::string dpl;
  double frequency_shape = 0.5;
  double genetic_effect = 1.5;
  double gene_gene_effect = 1.0;
  double env_effect = 1.5;
  double interaction_effect = 1.0;
  Index env_dim = 1;
  std::string env_kind = "c";

  // fit
  std::string genotypes;
  std::string environment;
  Index M = 30;
  double alpha = 10.0;
  Index thinning = 10;
  double tmcmc_scale = 0.05;
  double move_mix = 0.5;
  Index tmcmc_steps = 1;
  Index checkpoint_every = 1000;
  Index stop_after = 0;
  bool resume = false;
  std::string trace;
  bool csv = false;

  // calibrate / test / dpl
  double percentile = 55.0;
  std::string thresholds;
  double top_fraction = 0.10;
};

template <typename T>
std::vector<T> parse_list(const std::string& s, const char* what) {
  std::vector<T> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::istringstream v(item);
    T x;
    if (!(v >> x) || !(v >> std::ws).eof()) throw std::invalid_argument(std::string("bad ") + what + " list '" + s + "'");
    out.push_back(x);
  }
  return out;
}

CovariateKind parse_kind(const std::string& s) {
  if (s == "c" || s == "continuous") return CovariateKind::continuous;
  if (s == "b" || s == "binary") return CovariateKind::binary;
  throw std::invalid_argument("unknown environment kind '" + s + "' (use c or b)");
}

std::string out_path(const Settings& s, const std::string& name) {
  fs::create_directories(s.out);
  return (fs::path(s.out) / name).string();
}

std::string trace_path(const Settings& s) { return s.trace.empty() ? out_path(s, "trace.bin") : s.trace; }

template <typename F>
void write_file(const std::string& path, F&& body) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  body(f);
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

Trace load_trace(const std::string& path, bool with_mixtures) {
  if (!fs::exists(path)) throw std::runtime_error("missing trace '" + path + "'");
  return read_trace(path, with_mixtures);
}

void cmd_simulate(const Settings& s) {
  const auto loci = parse_list<Index>(s.loci, "loci");
  if (s.scenario == "null_model") {
    ModelDims dims{s.controls, s.cases, s.env_dim, loci};
    NullHyper hyper;
    hyper.M = s.M;
    hyper.alpha = s.alpha;
    hyper.env_kind = parse_kind(s.env_kind);
    const NullDataset d = generate_null_dataset(dims, hyper, s.seed);
    save_genotypes(out_path(s, "genotypes.csv"), d.genotypes);
    save_environment(out_path(s, "environment.csv"), d.environment);
    write_file(out_path(s, "truth.txt"), [&](std::ostream& o) {
      o << "seed=" << s.seed << "\n";
      write_truth(o, d.truth);
    });
    return;
  }
  ScenarioConfig cfg;
  cfg.scenario = parse_scenario(s.scenario);
  cfg.n_individuals = s.individuals;
  cfg.loci = loci;
  cfg.n_subpopulations = s.subpopulations;
  cfg.mixing_weights = parse_list<double>(s.weights, "weights");
  if (!s.dpl.empty()) cfg.dpl_positions = parse_list<Index>(s.dpl, "dpl");
  cfg.frequency_shape = s.frequency_shape;
  cfg.genetic_effect = s.genetic_effect;
  cfg.gene_gene_effect = s.gene_gene_effect;
  cfg.env_effect = s.env_effect;
  cfg.interaction_effect = s.interaction_effect;
  cfg.env_dim = s.env_dim;
  cfg.env_kind = parse_kind(s.env_kind);
  cfg.seed = s.seed;
  const ScenarioDataset d = generate_scenario_dataset(cfg);
  save_genotypes(out_path(s, "genotypes.csv"), d.genotypes);
  save_environment(out_path(s, "environment.csv"), d.environment);
  write_file(out_path(s, "truth.txt"), [&](std::ostream& o) {
    o << "seed=" << s.seed << "\n";
    write_truth(o, d.truth);
  });
}

void cmd_fit(const Settings& s) {
  const std::string gpath = s.genotypes.empty() ? out_path(s, "genotypes.csv") : s.genotypes;
  const std::string epath = s.environment.empty() ? out_path(s, "environment.csv") : s.environment;
  const GenotypeDataset data = load_genotypes(gpath);
  const EnvCovariates env = load_environment(epath);
  check_consistent(data, env);

  ChainConfig cfg;
  cfg.M = s.M;
  cfg.alpha = s.alpha;
  cfg.iterations = s.iterations;
  cfg.burn_in = s.burn_in;
  cfg.thinning = s.thinning;
  cfg.workers = s.workers;
  cfg.seed = s.seed;
  cfg.trace_path = trace_path(s);
  cfg.tmcmc_scale = s.tmcmc_scale;
  cfg.move_mix = s.move_mix;
  cfg.tmcmc_steps = s.tmcmc_steps;
  cfg.checkpoint_every = s.checkpoint_every;
  cfg.stop_after = s.stop_after;
  cfg.resume = s.resume;
  const RunResult r = run_chain(data, env, cfg);
  std::cerr << "fit: iterations " << r.last_iteration << "/" << cfg.iterations << ", snapshots written "
            << r.snapshots_written << ", TMCMC acceptance " << r.acceptance_rate << ", workers " << cfg.workers << "\n";
  if (s.csv) {
    const Trace t = load_trace(cfg.trace_path, true);
    write_file(cfg.trace_path + ".csv", [&](std::ostream& o) { write_trace_csv(o, t); });
  }
}

void cmd_calibrate(const Settings& s) {
  const std::string path = trace_path(s);
  const Trace t = load_trace(path, false);
  const ThresholdSet th = calibrate_thresholds(t, s.percentile, fs::path(path).filename().string());
  const std::string dst = s.thresholds.empty() ? out_path(s, "thresholds.txt") : s.thresholds;
  write_file(dst, [&](std::ostream& o) { write_thresholds(o, th); });
}

void cmd_test(const Settings& s) {
  const Trace t = load_trace(trace_path(s), false);
  const std::string tpath = s.thresholds.empty() ? out_path(s, "thresholds.txt") : s.thresholds;
  std::ifstream in(tpath);
  if (!in) throw std::runtime_error("missing thresholds '" + tpath + "'");
  const ThresholdSet th = read_thresholds(in);
  const TestReport rep = run_test_battery(t, th);
  write_file(out_path(s, "report.txt"), [&](std::ostream& o) { write_report_text(o, rep); });
  write_file(out_path(s, "report.csv"), [&](std::ostream& o) { write_report_table(o, rep); });
  std::cout << rep.interpretation << "\n";
}

std::vector<std::string> gene_names_of(const Trace& t) {
  auto it = t.header.find("genes");
  if (it == t.header.end() || it->second.empty()) return {};
  std::vector<std::string> names;
  std::stringstream in(it->second);
  std::string g;
  while (std::getline(in, g, ',')) names.push_back(g);
  return names;
}

void cmd_dpl(const Settings& s) {
  const Trace t = load_trace(trace_path(s), false);
  for (const DplTable& tab : detect_dpl(t, s.top_fraction, gene_names_of(t))) {
    write_file(out_path(s, "dpl_" + tab.gene + ".csv"), [&](std::ostream& o) { write_dpl_csv(o, tab); });
    std::cout << tab.gene << ": flagged loci";
    for (Index r : tab.call.flagged) std::cout << ' ' << r;
    std::cout << "\n";
  }
}

void cmd_report(const Settings& s) {
  const Trace t = load_trace(trace_path(s), true);
  const TraceSummary sum = summarize_trace(t);
  write_file(out_path(s, "summary.txt"), [&](std::ostream& o) { write_summary(o, t, sum); });
  write_file(out_path(s, "tau_histogram.csv"), [&](std::ostream& o) {
    o << "tau,probability\n";
    for (Index k = 0; k < sum.tau_histogram.size(); ++k) o << (k + 1) << ',' << sum.tau_histogram[k] << '\n';
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian semiparametric gene-gene and gene-environment interaction analysis"};
  app.require_subcommand(1, 0);
  app.set_config("--config", "", "key=value configuration file");
  Settings s;

  app.add_option("--seed", s.seed, "Top-level random seed");
  app.add_option("--workers", s.workers, "Worker threads for the Gibbs sweep")
      ->envname("GENEMIX_WORKERS")
      ->check(CLI::PositiveNumber);
  app.add_option("--iterations", s.iterations, "MCMC iterations");
  app.add_option("--burn-in", s.burn_in, "Burn-in iterations");
  app.add_option("--out", s.out, "Output directory");

  app.add_option("--scenario", s.scenario,
                 "null_model, gxg_and_gxe, null, env_only, genetic_only or additive_independent");
  app.add_option("--individuals", s.individuals, "Scenario sample size");
  app.add_option("--controls", s.controls, "Null-model controls");
  app.add_option("--cases", s.cases, "Null-model cases");
  app.add_option("--loci", s.loci, "Loci per gene, comma separated");
  app.add_option("--subpopulations", s.subpopulations, "Scenario subpopulations");
  app.add_option("--weights", s.weights, "Subpopulation mixing weights");
  app.add_option("--dpl", s.dpl, "DPL position per gene (0-based), comma separated");
  app.add_option("--frequency-shape", s.frequency_shape, "Beta(a,a) shape of subpopulation frequencies");
  app.add_option("--genetic-effect", s.genetic_effect);
  app.add_option("--gene-gene-effect", s.gene_gene_effect);
  app.add_option("--env-effect", s.env_effect);
  app.add_option("--interaction-effect", s.interaction_effect);
  app.add_option("--env-dim", s.env_dim, "Environmental covariates");
  app.add_option("--env-kind", s.env_kind, "c (continuous) or b (binary)");

  app.add_option("--genotypes", s.genotypes, "Genotype file");
  app.add_option("--environment", s.environment, "Environment file");
  app.add_option("--M", s.M, "Mixture slots per triplet");
  app.add_option("--alpha", s.alpha, "Dirichlet-process precision");
  app.add_option("--thinning", s.thinning, "Keep every n-th post-burn-in iteration");
  app.add_option("--tmcmc-scale", s.tmcmc_scale, "Initial TMCMC step size");
  app.add_option("--move-mix", s.move_mix, "Probability of the additive TMCMC move");
  app.add_option("--tmcmc-steps", s.tmcmc_steps, "TMCMC steps per iteration");
  app.add_option("--checkpoint-every", s.checkpoint_every, "Checkpoint cadence in iterations");
  app.add_option("--stop-after", s.stop_after, "Stop after this iteration, leaving a checkpoint");
  app.add_flag("--resume", s.resume, "Continue from the trace checkpoint");
  app.add_option("--trace", s.trace, "Trace file (default <out>/trace.bin)");
  app.add_flag("--csv", s.csv, "Also export scalar statistics as CSV");

  app.add_option("--percentile", s.percentile, "Calibration percentile");
  app.add_option("--thresholds", s.thresholds, "Threshold file (default <out>/thresholds.txt)");
  app.add_option("--top-fraction", s.top_fraction, "Fraction of loci nominated as DPL");

  struct Sub {
    const char* name;
    const char* help;
    void (*run)(const Settings&);
  };
  const Sub subs[] = {
      {"simulate", "Generate genotype, environment and truth files", cmd_simulate},
      {"fit", "Run the MCMC and write a trace", cmd_fit},
      {"calibrate", "Thresholds from a null-data trace", cmd_calibrate},
      {"test", "Posterior hypothesis tests", cmd_test},
      {"dpl", "Disease-predisposing locus tables", cmd_dpl},
      {"report", "Trace summary with tau posteriors", cmd_report},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> commands;
  for (const Sub& sub : subs) commands.emplace_back(app.add_subcommand(sub.name, sub.help)->fallthrough(), &sub);

  CLI11_PARSE(app, argc, argv);
  try {
    for (const auto& [cmd, sub] : commands)
      if (cmd->parsed()) sub->run(s);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
