#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "genemix/data_model.hpp"
#include "genemix/dp_mixture.hpp"
#include "genemix/interaction_prior.hpp"
#include "genemix/tmcmc.hpp"
#include "genemix/trace.hpp"
#include "genemix/types.hpp"

namespace genemix {

struct ChainConfig {
  Index M = 30;
  double alpha = 10.0;
  Index iterations = 100000;
  Index burn_in = 50000;
  Index thinning = 10;
  Index workers = 1;
  std::uint64_t seed = 1;
  std::string trace_path;

  /// Base TMCMC step size for every coordinate.
  double tmcmc_scale = 0.05;
  double move_mix = 0.5;
  /// Metropolis-Hastings steps on the interaction block per iteration.
  Index tmcmc_steps = 1;
  Index adapt_window = 100;

  /// Checkpoint cadence in iterations; 0 writes only at the end.
  Index checkpoint_every = 1000;
  /// Stop after this iteration (0 = run to the end), leaving a checkpoint.
  Index stop_after = 0;
  bool resume = false;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  Index n_snapshots() const { return (iterations - burn_in) / thinning; }
  /// Settings that determine the chain's output, for the trace header.
  TraceHeader header_entries() const;
};

/// Contiguous split of the control triplets across W workers, then of the
/// case triplets. Entry w lists worker w's triplet ids in sweep order.
std::vector<std::vector<Index>> partition_triplets(Index n_controls, Index n_cases, Index n_genes,
                                                   Index workers);

std::string checkpoint_path(const std::string& trace_path);

/// Full MCMC: per iteration a parallel Gibbs sweep over every triplet
/// (controls, then cases), then TMCMC on the interaction block.
class Chain {
 public:
  Chain(const GenotypeDataset& data, const EnvCovariates& env, const ChainConfig& cfg);

  /// Interaction parameters at their prior means, every mixture tied to one
  /// base-measure draw.
  void initialize();

  /// Runs iteration t (1-based) of the sweep and the TMCMC block.
  void step(Index t);
  void sweep_mixtures(Index t);
  void update_interaction(Index t);

  const InteractionState& interaction() const { return interaction_; }
  InteractionState& interaction() { return interaction_; }
  const std::vector<MixtureState>& mixtures() const { return mixtures_; }
  std::vector<MixtureState>& mixtures() { return mixtures_; }
  const ModelContext& context() const { return ctx_; }
  const std::vector<CountVector>& counts() const { return counts_; }
  const ScaleAdapter& adapter() const { return adapter_; }
  Index accepted() const { return accepted_; }
  Index proposed() const { return proposed_; }
  double log_target() const;

  Snapshot snapshot(Index t) const;

  void save_checkpoint(const std::string& path, Index t, std::uint64_t trace_bytes) const;
  /// Returns the iteration and trace length stored in the checkpoint.
  std::pair<Index, std::uint64_t> load_checkpoint(const std::string& path);

 private:
  ChainConfig cfg_;
  ModelContext ctx_;
  ParameterLayout layout_;
  std::vector<CountVector> counts_;
  std::vector<std::vector<Index>> partition_;
  InteractionState interaction_;
  std::vector<MixtureState> mixtures_;
  ScaleAdapter adapter_;
  Index accepted_ = 0;
  Index proposed_ = 0;
};

struct RunResult {
  Index last_iteration = 0;
  Index snapshots_written = 0;
  double acceptance_rate = 0.0;
  double final_multiplier = 1.0;
  bool completed = false;
};

/// Runs the chain and writes the trace to cfg.trace_path, checkpointing to
/// checkpoint_path(cfg.trace_path). With cfg.resume the run continues from
/// the checkpoint and the trace is truncated to the checkpointed length.
RunResult run_chain(const GenotypeDataset& data, const EnvCovariates& env, const ChainConfig& cfg);

/// Mean, median and batch-means Monte Carlo standard error of one series.
struct SeriesSummary {
  Index n = 0;
  double mean = 0.0;
  double median = 0.0;
  double mcse = 0.0;
};

SeriesSummary summarize_series(const std::vector<double>& x);

struct TraceSummary {
  std::map<std::string, SeriesSummary> statistics;
  /// Posterior distribution of tau over all triplets and snapshots; entry
  /// t - 1 is the mass at tau = t.
  VectorXd tau_histogram;
  /// Same, per (gene, status).
  std::vector<std::array<VectorXd, 2>> tau_histogram_by_gene;
};

/// Throws std::invalid_argument on an empty trace.
TraceSummary summarize_trace(const Trace& trace);

}  // namespace genemix
