#include "genemix/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <thread>

namespace genemix {

namespace {

constexpr char kCheckpointMagic[8] = {'G', 'E', 'N', 'E', 'M', 'I', 'X', 'C'};

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <typename T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_doubles(std::ostream& out, const double* p, Index n) {
  out.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& in, double* p, Index n) {
  in.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace

void ChainConfig::validate() const {
  if (M < 1) throw std::invalid_argument("ChainConfig: M must be at least 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("ChainConfig: alpha must be positive");
  if (iterations < 1) throw std::invalid_argument("ChainConfig: iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw std::invalid_argument("ChainConfig: burn_in must lie in [0, iterations)");
  if (thinning < 1) throw std::invalid_argument("ChainConfig: thinning must be at least 1");
  if (workers < 1) throw std::invalid_argument("ChainConfig: workers must be at least 1");
  if (!(tmcmc_scale >= 0.0)) throw std::invalid_argument("ChainConfig: tmcmc_scale must be nonnegative");
  if (!(move_mix >= 0.0 && move_mix <= 1.0))
    throw std::invalid_argument("ChainConfig: move_mix must lie in [0,1]");
  if (tmcmc_steps < 0) throw std::invalid_argument("ChainConfig: tmcmc_steps must be nonnegative");
  if (adapt_window < 1) throw std::invalid_argument("ChainConfig: adapt_window must be positive");
  if (checkpoint_every < 0 || stop_after < 0)
    throw std::invalid_argument("ChainConfig: checkpoint settings must be nonnegative");
}

TraceHeader ChainConfig::header_entries() const {
  return {
      {"alpha", format_double(alpha)},
      {"iterations", std::to_string(iterations)},
      {"burn_in", std::to_string(burn_in)},
      {"thinning", std::to_string(thinning)},
      {"seed", std::to_string(seed)},
      {"tmcmc_scale", format_double(tmcmc_scale)},
      {"move_mix", format_double(move_mix)},
      {"tmcmc_steps", std::to_string(tmcmc_steps)},
      {"adapt_window", std::to_string(adapt_window)},
  };
}

std::vector<std::vector<Index>> partition_triplets(Index n_controls, Index n_cases, Index n_genes,
                                                   Index workers) {
  if (workers < 1) throw std::invalid_argument("partition_triplets: workers must be at least 1");
  std::vector<std::vector<Index>> out(workers);
  const Index n1 = n_controls * n_genes;
  const Index n2 = n_cases * n_genes;
  for (Index w = 0; w < workers; ++w) {
    for (Index t = w * n1 / workers; t < (w + 1) * n1 / workers; ++t) out[w].push_back(t);
    for (Index t = w * n2 / workers; t < (w + 1) * n2 / workers; ++t) out[w].push_back(n1 + t);
  }
  return out;
}

std::string checkpoint_path(const std::string& trace_path) { return trace_path + ".ckpt"; }

Chain::Chain(const GenotypeDataset& data, const EnvCovariates& env, const ChainConfig& cfg)
    : cfg_(cfg), ctx_(data, env), layout_(ctx_.dims()) {
  cfg_.validate();
  check_consistent(data, env);
  const ModelDims& dims = ctx_.dims();
  counts_.reserve(ctx_.n_triplets());
  for (Index t = 0; t < ctx_.n_triplets(); ++t) {
    const Index g = ctx_.individual_of(t);
    const int k = ctx_.status_of(t);
    const Index i = k == kControl ? g : g - dims.n_controls;
    counts_.push_back(data.minor_counts(i, ctx_.gene_of(t), k));
  }
  partition_ = partition_triplets(dims.n_controls, dims.n_cases, dims.n_genes(), cfg_.workers);
  adapter_ = ScaleAdapter(cfg_.adapt_window);
}

void Chain::initialize() {
  interaction_ = InteractionState::at_prior_means(ctx_.dims());
  mixtures_.clear();
  mixtures_.reserve(ctx_.n_triplets());
  for (Index t = 0; t < ctx_.n_triplets(); ++t) {
    CounterRng rng(cfg_.seed, kStreamInit, static_cast<std::uint64_t>(t));
    mixtures_.push_back(tied_mixture(cfg_.M, ctx_.triplet_hyper(interaction_, t), rng));
  }
  if (!std::isfinite(log_target()))
    throw std::runtime_error("chain initialization gives a non-finite log target");
  adapter_ = ScaleAdapter(cfg_.adapt_window);
  accepted_ = proposed_ = 0;
}

void Chain::sweep_mixtures(Index t) {
  auto work = [this, t](Index w) {
    for (Index id : partition_[w]) {
      CounterRng rng(cfg_.seed, static_cast<std::uint64_t>(id), static_cast<std::uint64_t>(t));
      const BetaHyper hyper = ctx_.triplet_hyper(interaction_, id);
      gibbs_sweep(mixtures_[id], counts_[id], cfg_.alpha, hyper, rng);
    }
  };
  if (cfg_.workers == 1) {
    work(0);
    return;
  }
  std::vector<std::exception_ptr> errors(cfg_.workers);
  {
    std::vector<std::jthread> pool;
    pool.reserve(cfg_.workers);
    for (Index w = 0; w < cfg_.workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void Chain::update_interaction(Index t) {
  if (cfg_.tmcmc_steps == 0) return;
  CounterRng rng(cfg_.seed, kStreamTmcmc, static_cast<std::uint64_t>(t));
  std::vector<G0Stats> stats;
  stats.reserve(mixtures_.size());
  for (const auto& m : mixtures_) stats.push_back(g0_stats(m));
  const LogTarget target = [&](const VectorXd& theta) {
    return log_joint(layout_.unpack(theta), stats, ctx_);
  };

  VectorXd theta = layout_.pack(interaction_);
  double current = target(theta);
  TmcmcConfig tc;
  tc.move_mix = cfg_.move_mix;
  for (Index s = 0; s < cfg_.tmcmc_steps; ++s) {
    tc.scales = VectorXd::Constant(layout_.size(), cfg_.tmcmc_scale * adapter_.multiplier());
    const StepResult r = mh_step(theta, current, target, tc, layout_.positive(), rng);
    ++proposed_;
    accepted_ += r.accepted ? 1 : 0;
    if (t <= cfg_.burn_in) adapter_.record(r.accepted);
  }
  if (t >= cfg_.burn_in) adapter_.freeze();
  interaction_ = layout_.unpack(theta);
}

void Chain::step(Index t) {
  sweep_mixtures(t);
  update_interaction(t);
}

double Chain::log_target() const {
  return log_joint(interaction_, std::span<const MixtureState>(mixtures_), ctx_);
}

Snapshot Chain::snapshot(Index t) const {
  Snapshot s;
  s.iteration = t;
  s.b = interaction_.b;
  s.phi = interaction_.phi;
  s.a = interaction_.a();
  s.mu = interaction_.mu;
  s.beta = interaction_.beta;
  s.mixtures = mixtures_;
  s.stats = snapshot_stats(mixtures_, ctx_.dims());
  return s;
}

void Chain::save_checkpoint(const std::string& path, Index t, std::uint64_t trace_bytes) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + tmp + "'");
    out.write(kCheckpointMagic, 8);
    TraceHeader h = cfg_.header_entries();
    put_dims(h, ctx_.dims(), cfg_.M);
    const std::string text = encode_header(h);
    put(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    put(out, static_cast<std::int64_t>(t));
    put(out, trace_bytes);
    const VectorXd theta = layout_.pack(interaction_);
    put_doubles(out, theta.data(), theta.size());
    put(out, adapter_.multiplier());
    put(out, static_cast<std::int64_t>(adapter_.window_accepts()));
    put(out, static_cast<std::int64_t>(adapter_.window_steps()));
    put(out, static_cast<std::uint8_t>(adapter_.frozen()));
    put(out, static_cast<std::int64_t>(accepted_));
    put(out, static_cast<std::int64_t>(proposed_));
    for (const auto& m : mixtures_) {
      put(out, static_cast<std::uint32_t>(m.n_distinct()));
      put(out, static_cast<std::uint32_t>(m.z));
      for (int c : m.config) put(out, static_cast<std::int32_t>(c));
      const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d = m.distinct;
      put_doubles(out, d.data(), d.size());
    }
    if (!out) throw std::runtime_error("checkpoint write failed");
  }
  std::filesystem::rename(tmp, path);
}

std::pair<Index, std::uint64_t> Chain::load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kCheckpointMagic, 8) != 0) throw std::runtime_error("checkpoint: bad magic");
  const auto len = get<std::uint64_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  TraceHeader h = cfg_.header_entries();
  put_dims(h, ctx_.dims(), cfg_.M);
  if (!in || text != encode_header(h))
    throw std::runtime_error("checkpoint '" + path + "' was written with a different configuration");
  const auto t = static_cast<Index>(get<std::int64_t>(in));
  const auto trace_bytes = get<std::uint64_t>(in);
  VectorXd theta(layout_.size());
  get_doubles(in, theta.data(), theta.size());
  interaction_ = layout_.unpack(theta);
  const auto mult = get<double>(in);
  const auto acc = get<std::int64_t>(in);
  const auto steps = get<std::int64_t>(in);
  const auto frozen = get<std::uint8_t>(in);
  adapter_ = ScaleAdapter(cfg_.adapt_window);
  adapter_.restore(mult, acc, steps, frozen != 0);
  accepted_ = get<std::int64_t>(in);
  proposed_ = get<std::int64_t>(in);
  mixtures_.assign(ctx_.n_triplets(), MixtureState{});
  for (Index id = 0; id < ctx_.n_triplets(); ++id) {
    MixtureState& m = mixtures_[id];
    const auto tau = static_cast<Index>(get<std::uint32_t>(in));
    m.z = get<std::uint32_t>(in);
    m.config.resize(cfg_.M);
    m.occupancy.assign(tau, 0);
    for (auto& c : m.config) {
      c = get<std::int32_t>(in);
      if (c < 0 || c >= tau) throw std::runtime_error("checkpoint: label out of range");
      ++m.occupancy[c];
    }
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> d(
        tau, ctx_.dims().loci[ctx_.gene_of(id)]);
    get_doubles(in, d.data(), d.size());
    m.distinct = d;
    m.check();
  }
  return {t, trace_bytes};
}

RunResult run_chain(const GenotypeDataset& data, const EnvCovariates& env, const ChainConfig& cfg) {
  cfg.validate();
  if (cfg.trace_path.empty()) throw std::invalid_argument("run_chain: trace path is required");
  Chain chain(data, env, cfg);
  const ModelDims dims = dims_of(data, env);
  TraceHeader header = cfg.header_entries();
  put_dims(header, dims, cfg.M);
  std::string genes;
  for (const auto& g : data.gene_names()) genes += (genes.empty() ? "" : ",") + g;
  header["genes"] = genes;
  const std::string ckpt = checkpoint_path(cfg.trace_path);

  Index start = 1;
  TraceWriter writer;
  if (cfg.resume) {
    const auto [t, bytes] = chain.load_checkpoint(ckpt);
    writer = TraceWriter::resume(cfg.trace_path, header, dims, cfg.M, bytes);
    start = t + 1;
  } else {
    chain.initialize();
    writer = TraceWriter(cfg.trace_path, header, dims, cfg.M);
  }

  RunResult result;
  result.last_iteration = start - 1;
  for (Index t = start; t <= cfg.iterations; ++t) {
    chain.step(t);
    if (t > cfg.burn_in && (t - cfg.burn_in) % cfg.thinning == 0) {
      writer.append(chain.snapshot(t));
      ++result.snapshots_written;
    }
    const bool stop = cfg.stop_after > 0 && t == cfg.stop_after;
    if ((cfg.checkpoint_every > 0 && t % cfg.checkpoint_every == 0) || t == cfg.iterations || stop) {
      writer.flush();
      chain.save_checkpoint(ckpt, t, writer.bytes());
    }
    result.last_iteration = t;
    if (stop) break;
  }
  writer.flush();
  result.completed = result.last_iteration == cfg.iterations;
  result.acceptance_rate = chain.proposed() > 0
                               ? static_cast<double>(chain.accepted()) / static_cast<double>(chain.proposed())
                               : 0.0;
  result.final_multiplier = chain.adapter().multiplier();
  return result;
}

SeriesSummary summarize_series(const std::vector<double>& x) {
  if (x.empty()) throw std::invalid_argument("summarize_series: empty series");
  SeriesSummary s;
  s.n = static_cast<Index>(x.size());
  const Eigen::Map<const VectorXd> v(x.data(), s.n);
  s.mean = v.mean();
  std::vector<double> sorted = x;
  std::sort(sorted.begin(), sorted.end());
  s.median = s.n % 2 == 1 ? sorted[s.n / 2] : 0.5 * (sorted[s.n / 2 - 1] + sorted[s.n / 2]);
  if (s.n < 4) {
    const double var = s.n > 1 ? (v.array() - s.mean).square().sum() / static_cast<double>(s.n - 1) : 0.0;
    s.mcse = std::sqrt(var / static_cast<double>(s.n));
    return s;
  }
  // Batch means with floor(sqrt(n)) batches; a trailing partial batch is dropped.
  const auto batches = static_cast<Index>(std::sqrt(static_cast<double>(s.n)));
  const Index size = s.n / batches;
  VectorXd means(batches);
  for (Index b = 0; b < batches; ++b) means[b] = v.segment(b * size, size).mean();
  const double var = (means.array() - means.mean()).square().sum() / static_cast<double>(batches - 1);
  s.mcse = std::sqrt(var / static_cast<double>(batches));
  return s;
}

TraceSummary summarize_trace(const Trace& trace) {
  if (trace.snapshots.empty()) throw std::invalid_argument("summarize_trace: empty trace");
  const Index J = trace.dims.n_genes();
  const Index M = trace.n_slots;
  std::map<std::string, std::vector<double>> series;
  TraceSummary out;
  out.tau_histogram = VectorXd::Zero(M);
  out.tau_histogram_by_gene.assign(J, {VectorXd::Zero(M), VectorXd::Zero(M)});
  double tau_total = 0.0;
  for (const auto& s : trace.snapshots) {
    series["b"].push_back(s.b);
    series["phi"].push_back(s.phi);
    series["d_star"].push_back(s.stats.d_star);
    series["d_star_e"].push_back(s.stats.d_star_e);
    series["d_star_emin"].push_back(s.stats.d_star_emin);
    for (Index j = 0; j < J; ++j) {
      const std::string g = std::to_string(j);
      series["d_hat_" + g].push_back(s.stats.d_hat[j]);
      series["d_e_" + g].push_back(s.stats.d_e[j]);
      series["d_emin_" + g].push_back(s.stats.d_emin[j]);
    }
    if (s.mixtures.empty()) continue;
    double mean_tau = 0.0;
    for (std::size_t t = 0; t < s.mixtures.size(); ++t) {
      const Index tau = s.mixtures[t].n_distinct();
      const Index g = static_cast<Index>(t) / J;
      const Index j = static_cast<Index>(t) % J;
      const int k = g < trace.dims.n_controls ? kControl : kCase;
      out.tau_histogram[tau - 1] += 1.0;
      out.tau_histogram_by_gene[j][k][tau - 1] += 1.0;
      mean_tau += static_cast<double>(tau);
    }
    tau_total += static_cast<double>(s.mixtures.size());
    series["mean_tau"].push_back(mean_tau / static_cast<double>(s.mixtures.size()));
  }
  if (tau_total > 0.0) {
    out.tau_histogram /= tau_total;
    for (auto& per_gene : out.tau_histogram_by_gene)
      for (auto& h : per_gene)
        if (h.sum() > 0.0) h /= h.sum();
  }
  for (const auto& [name, values] : series) out.statistics[name] = summarize_series(values);
  return out;
}

}  // namespace genemix
