#include "genemix/dp_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace genemix {

namespace {

double clamp_freq(double p) { return std::clamp(p, kFreqFloor, 1.0 - kFreqFloor); }

double log_beta_fn(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Removes label l, moving the last label into its place.
void drop_label(MixtureState& s, int l) {
  const int last = static_cast<int>(s.distinct.rows()) - 1;
  if (l != last) {
    s.distinct.row(l) = s.distinct.row(last);
    s.occupancy[l] = s.occupancy[last];
    for (int& c : s.config)
      if (c == last) c = l;
  }
  s.distinct.conservativeResize(last, Eigen::NoChange);
  s.occupancy.pop_back();
}

void append_label(MixtureState& s, const RowVectorXd& p) {
  const Index t = s.distinct.rows();
  s.distinct.conservativeResize(t + 1, Eigen::NoChange);
  s.distinct.row(t) = p;
  s.occupancy.push_back(1);
}

RowVectorXd draw_freqs(const CountVector* counts, const BetaHyper& hyper, CounterRng& rng) {
  RowVectorXd p(hyper.loci());
  for (Index r = 0; r < hyper.loci(); ++r) {
    const double n1 = counts ? (*counts)[r] : 0.0;
    const double n2 = counts ? 2.0 - n1 : 0.0;
    p[r] = clamp_freq(sample_beta(rng, n1 + hyper.nu1[r], n2 + hyper.nu2[r]));
  }
  return p;
}

}  // namespace

void BetaHyper::validate() const {
  if (nu1.size() != nu2.size()) throw std::domain_error("BetaHyper: shape vectors differ in length");
  for (Index r = 0; r < nu1.size(); ++r)
    if (!(nu1[r] > 0.0 && nu2[r] > 0.0) || !std::isfinite(nu1[r]) || !std::isfinite(nu2[r]))
      throw std::domain_error("BetaHyper: shapes must be positive and finite");
}

void MixtureState::check() const {
  const Index tau = distinct.rows();
  if (static_cast<Index>(occupancy.size()) != tau)
    throw std::logic_error("MixtureState: occupancy size differs from distinct count");
  if (z < 0 || z >= n_slots()) throw std::logic_error("MixtureState: allocation out of range");
  std::vector<int> seen(tau, 0);
  for (int c : config) {
    if (c < 0 || c >= tau) throw std::logic_error("MixtureState: label out of range");
    ++seen[c];
  }
  for (Index l = 0; l < tau; ++l)
    if (seen[l] != occupancy[l] || seen[l] == 0)
      throw std::logic_error("MixtureState: occupancy counts are inconsistent");
  if ((distinct.array() <= 0.0).any() || (distinct.array() >= 1.0).any())
    throw std::logic_error("MixtureState: frequency outside (0,1)");
}

double genotype_log_mass(int allele1, int allele2, double p) {
  if ((allele1 != 0 && allele1 != 1) || (allele2 != 0 && allele2 != 1))
    throw std::domain_error("genotype_log_mass: alleles must be 0 or 1");
  return genotype_log_mass(allele1 + allele2, p);
}

double genotype_log_mass(int minor_count, double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::domain_error("genotype_log_mass: p must lie in (0,1)");
  return minor_count * std::log(p) + (2 - minor_count) * std::log1p(-p);
}

Index sample_allocation(const MixtureState& state, const CountVector& counts, CounterRng& rng) {
  const Index M = state.n_slots();
  if (M == 1) return 0;
  // Slots sharing a label share a likelihood.
  VectorXd per_label(state.n_distinct());
  for (Index l = 0; l < state.n_distinct(); ++l)
    per_label[l] = record_log_likelihood(counts, state.distinct.row(l));
  VectorXd logw(M);
  for (Index m = 0; m < M; ++m) logw[m] = per_label[state.config[m]];
  return sample_log_categorical(rng, logw);
}

double log_polya_urn_q0(const VectorXd& n1, const VectorXd& n2, const BetaHyper& hyper,
                        double alpha) {
  double s = std::log(alpha);
  for (Index r = 0; r < hyper.loci(); ++r) {
    if (n1[r] == 0.0 && n2[r] == 0.0) continue;
    s += log_beta_fn(n1[r] + hyper.nu1[r], n2[r] + hyper.nu2[r]) -
         log_beta_fn(hyper.nu1[r], hyper.nu2[r]);
  }
  return s;
}

double polya_urn_q0(const VectorXd& n1, const VectorXd& n2, const BetaHyper& hyper,
                    double alpha) {
  return std::exp(log_polya_urn_q0(n1, n2, hyper, alpha));
}

void sample_configuration(Index m, MixtureState& state, const CountVector& counts, double alpha,
                          const BetaHyper& hyper, CounterRng& rng) {
  const int old = state.config[m];
  if (--state.occupancy[old] == 0) drop_label(state, old);
  state.config[m] = -1;

  const bool has_data = (m == state.z);
  const Index tau = state.n_distinct();
  VectorXd logw(tau + 1);
  for (Index l = 0; l < tau; ++l) {
    logw[l] = std::log(static_cast<double>(state.occupancy[l]));
    if (has_data) logw[l] += record_log_likelihood(counts, state.distinct.row(l));
  }
  if (has_data) {
    const VectorXd n1 = counts.cast<double>();
    const VectorXd n2 = 2.0 - n1.array();
    logw[tau] = log_polya_urn_q0(n1, n2, hyper, alpha);
  } else {
    logw[tau] = std::log(alpha);
  }

  const Index pick = sample_log_categorical(rng, logw);
  if (pick == tau) {
    append_label(state, draw_freqs(has_data ? &counts : nullptr, hyper, rng));
  } else {
    ++state.occupancy[pick];
  }
  state.config[m] = static_cast<int>(pick);
}

void resample_distinct_freqs(MixtureState& state, const CountVector& counts,
                             const BetaHyper& hyper, CounterRng& rng) {
  const int data_label = state.config[state.z];
  for (Index l = 0; l < state.n_distinct(); ++l)
    state.distinct.row(l) = draw_freqs(l == data_label ? &counts : nullptr, hyper, rng);
}

Index count_distinct(const MixtureState& state) { return state.n_distinct(); }

void gibbs_sweep(MixtureState& state, const CountVector& counts, double alpha,
                 const BetaHyper& hyper, CounterRng& rng) {
  state.z = sample_allocation(state, counts, rng);
  for (Index m = 0; m < state.n_slots(); ++m)
    sample_configuration(m, state, counts, alpha, hyper, rng);
  resample_distinct_freqs(state, counts, hyper, rng);
}

MixtureState draw_polya_urn_prior(Index M, double alpha, const BetaHyper& hyper,
                                  CounterRng& rng) {
  MixtureState s;
  s.config.reserve(M);
  s.distinct.resize(0, hyper.loci());
  for (Index m = 0; m < M; ++m) {
    // Slot m joins label l w.p. M_l/(alpha+m) or opens a new one w.p. alpha/(alpha+m).
    const Index tau = s.n_distinct();
    VectorXd logw(tau + 1);
    for (Index l = 0; l < tau; ++l) logw[l] = std::log(static_cast<double>(s.occupancy[l]));
    logw[tau] = std::log(alpha);
    const Index pick = sample_log_categorical(rng, logw);
    if (pick == tau) {
      append_label(s, draw_freqs(nullptr, hyper, rng));
    } else {
      ++s.occupancy[pick];
    }
    s.config.push_back(static_cast<int>(pick));
  }
  s.z = sample_index(rng, M);
  return s;
}

MixtureState tied_mixture(Index M, const BetaHyper& hyper, CounterRng& rng) {
  MixtureState s;
  s.config.assign(M, 0);
  s.distinct = draw_freqs(nullptr, hyper, rng);
  s.occupancy = {static_cast<int>(M)};
  s.z = 0;
  return s;
}

void canonicalize(MixtureState& state) {
  const Index tau = state.n_distinct();
  std::vector<int> remap(tau, -1);
  int next = 0;
  for (int c : state.config)
    if (remap[c] < 0) remap[c] = next++;
  MatrixXd distinct(tau, state.loci());
  std::vector<int> occ(tau);
  for (Index l = 0; l < tau; ++l) {
    distinct.row(remap[l]) = state.distinct.row(l);
    occ[remap[l]] = state.occupancy[l];
  }
  for (int& c : state.config) c = remap[c];
  state.distinct = std::move(distinct);
  state.occupancy = std::move(occ);
}

}  // namespace genemix
