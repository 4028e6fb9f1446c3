#include "genemix/hypothesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "genemix/assignment.hpp"

namespace genemix {

namespace {

constexpr double kRadiusFloor = 1e-9;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::sort(v.begin(), v.end());
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

MatrixXd pairwise_distances(std::span<const ClusteringPartition> samples) {
  const Index n = static_cast<Index>(samples.size());
  MatrixXd d = MatrixXd::Zero(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) d(a, b) = d(b, a) = clustering_distance(samples[a], samples[b]);
  return d;
}

double median_upper(const MatrixXd& d) {
  const Index n = d.rows();
  if (n < 2) return kRadiusFloor;
  std::vector<double> v;
  v.reserve(n * (n - 1) / 2);
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) v.push_back(d(a, b));
  return std::max(median_of(std::move(v)), kRadiusFloor);
}

Index central_from_matrix(const MatrixXd& d, double radius) {
  Index best = 0, best_count = -1;
  for (Index l = 0; l < d.rows(); ++l) {
    const Index count = (d.row(l).array() < radius).count();
    if (count > best_count) {
      best = l;
      best_count = count;
    }
  }
  return best;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

ClusteringPartition partition_of(const MatrixXd& freqs) {
  ClusteringPartition c;
  c.block.assign(freqs.rows(), -1);
  std::vector<Index> reps;
  for (Index m = 0; m < freqs.rows(); ++m) {
    for (std::size_t b = 0; b < reps.size(); ++b) {
      if (freqs.row(m) == freqs.row(reps[b])) {
        c.block[m] = static_cast<int>(b);
        break;
      }
    }
    if (c.block[m] < 0) {
      c.block[m] = static_cast<int>(reps.size());
      reps.push_back(m);
    }
  }
  c.n_blocks = static_cast<int>(reps.size());
  return c;
}

ClusteringPartition partition_from_labels(std::span<const int> labels) {
  ClusteringPartition c;
  c.block.reserve(labels.size());
  std::map<int, int> remap;
  for (int l : labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<int>(remap.size()));
    c.block.push_back(it->second);
  }
  c.n_blocks = static_cast<int>(remap.size());
  return c;
}

ClusteringPartition partition_of(const MixtureState& state) {
  return partition_from_labels(state.config);
}

double directed_distance(const ClusteringPartition& c1, const ClusteringPartition& c2) {
  if (c1.size() != c2.size()) throw std::invalid_argument("clustering_distance: partitions differ in size");
  if (c1.size() == 0) return 0.0;
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(c1.n_blocks, c2.n_blocks);
  for (Index m = 0; m < c1.size(); ++m) ++table(c1.block[m], c2.block[m]);
  const double matched = table.rowwise().maxCoeff().sum();
  return 1.0 - matched / static_cast<double>(c1.size());
}

double clustering_distance(const ClusteringPartition& c1, const ClusteringPartition& c2) {
  return std::max(directed_distance(c1, c2), directed_distance(c2, c1));
}

double median_pairwise_distance(std::span<const ClusteringPartition> samples) {
  return median_upper(pairwise_distances(samples));
}

Index central_clustering_index(std::span<const ClusteringPartition> samples, double radius) {
  if (samples.empty()) throw std::invalid_argument("central_clustering_index: no samples");
  return central_from_matrix(pairwise_distances(samples), radius);
}

VectorXd logit_mean_freqs(const MatrixXd& freqs) {
  VectorXd out(freqs.rows());
  for (Index m = 0; m < freqs.rows(); ++m) out[m] = logit(freqs.row(m).mean());
  return out;
}

double euclidean_divergence(const VectorXd& v1, const VectorXd& v2) {
  if (v1.size() != v2.size()) throw std::invalid_argument("euclidean_divergence: length mismatch");
  return (v1 - v2).norm();
}

double min_permutation_distance(const VectorXd& v1, const VectorXd& v2) {
  if (v1.size() != v2.size()) throw std::invalid_argument("min_permutation_distance: length mismatch");
  const Index n = v1.size();
  MatrixXd cost(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) cost(i, j) = (v1[i] - v2[j]) * (v1[i] - v2[j]);
  const Assignment a = solve_assignment(cost);
  double s = 0.0;
  for (Index i = 0; i < n; ++i) s += cost(i, a.assignment[i]);
  return std::sqrt(s);
}

double percentile_nearest_rank(std::vector<double> values, double pct) {
  if (values.empty()) throw std::invalid_argument("percentile_nearest_rank: empty stream");
  if (!(pct > 0.0 && pct <= 100.0)) throw std::invalid_argument("percentile_nearest_rank: pct must be in (0,100]");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(pct * n / 100.0));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double posterior_probability_below(std::span<const double> values, double eps) {
  if (values.empty()) throw std::invalid_argument("posterior_probability_below: empty stream");
  const auto below = std::count_if(values.begin(), values.end(), [eps](double x) { return x < eps; });
  return static_cast<double>(below) / static_cast<double>(values.size());
}

std::string interpret(bool genes, bool beta, bool phi) {
  if (!genes) {
    if (!beta && !phi) return "no gene is marginally significant and the environment shows no effect";
    if (beta && !phi)
      return "the environment alters some genes without affecting disease status";
    if (!beta && phi)
      return "the environment influences gene-gene interaction, but not in a way that causes the disease";
    return "the environment alters some genes and influences gene-gene interaction, but not in a way "
           "that causes the disease";
  }
  if (!beta && !phi) return "only the genes are responsible for the disease; it appears purely genetic";
  if (beta && !phi)
    return "the environment alters some genes, which in turn cause the disease; it does not appear to "
           "influence gene-gene interaction";
  if (!beta && phi)
    return "the disease is driven by gene-gene interaction that the environment has altered; an "
           "environmental effect on the marginal gene effects is ruled out";
  return "the environment has affected both the marginal gene effects and gene-gene interaction to "
         "cause the disease";
}

MatrixXd slot_freq_matrix(const MixtureState& state) {
  MatrixXd p(state.n_slots(), state.loci());
  for (Index m = 0; m < state.n_slots(); ++m) p.row(m) = state.slot_freqs(m);
  return p;
}

SnapshotStats snapshot_stats(std::span<const MixtureState> mixtures, const ModelDims& dims) {
  const Index J = dims.n_genes();
  if (static_cast<Index>(mixtures.size()) != dims.n_individuals() * J)
    throw std::invalid_argument("snapshot_stats: one mixture per triplet is required");
  if (dims.n_controls == 0 || dims.n_cases == 0)
    throw std::invalid_argument("snapshot_stats: both groups must be non-empty");

  SnapshotStats s;
  s.d_hat.resize(J);
  s.d_e.resize(J);
  s.d_emin.resize(J);
  s.central.resize(J);
  s.locus_distance.resize(J);
  for (Index j = 0; j < J; ++j) {
    std::array<const MixtureState*, 2> centre{};
    std::array<ClusteringPartition, 2> part;
    for (int k = 0; k < 2; ++k) {
      const Index nk = dims.n_group(k);
      std::vector<ClusteringPartition> parts;
      parts.reserve(nk);
      for (Index i = 0; i < nk; ++i) parts.push_back(partition_of(mixtures[dims.individual(i, k) * J + j]));
      const MatrixXd d = pairwise_distances(parts);
      const Index c = central_from_matrix(d, median_upper(d));
      s.central[j][k] = c;
      centre[k] = &mixtures[dims.individual(c, k) * J + j];
      part[k] = std::move(parts[c]);
    }
    s.d_hat[j] = clustering_distance(part[0], part[1]);
    const MatrixXd p0 = slot_freq_matrix(*centre[0]);
    const MatrixXd p1 = slot_freq_matrix(*centre[1]);
    const VectorXd l0 = logit_mean_freqs(p0);
    const VectorXd l1 = logit_mean_freqs(p1);
    s.d_e[j] = euclidean_divergence(l0, l1);
    s.d_emin[j] = min_permutation_distance(l0, l1);
    VectorXd loc(dims.loci[j]);
    for (Index r = 0; r < dims.loci[j]; ++r) {
      const VectorXd a = p0.col(r).unaryExpr([](double p) { return logit(p); });
      const VectorXd b = p1.col(r).unaryExpr([](double p) { return logit(p); });
      loc[r] = (a - b).norm();
    }
    s.locus_distance[j] = std::move(loc);
  }
  s.d_star = s.d_hat.maxCoeff();
  s.d_star_e = s.d_e.maxCoeff();
  s.d_star_emin = s.d_emin.maxCoeff();
  return s;
}

DplCall dpl_call(const VectorXd& mean_distance, double top_fraction) {
  if (!(top_fraction > 0.0 && top_fraction <= 1.0))
    throw std::invalid_argument("dpl_call: top_fraction must lie in (0,1]");
  DplCall call;
  call.distance = mean_distance;
  const Index L = mean_distance.size();
  // Guard against 0.1 * 30 rounding to 3.0000000000000004.
  const auto k = static_cast<Index>(std::ceil(top_fraction * static_cast<double>(L) - 1e-9));
  if (k >= L) {
    call.cutoff = 0.0;
  } else {
    std::vector<double> sorted(mean_distance.data(), mean_distance.data() + L);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    call.cutoff = sorted[k];
  }
  for (Index r = 0; r < L; ++r)
    if (mean_distance[r] > call.cutoff) call.flagged.push_back(r);
  return call;
}

MatrixXd gene_gene_correlation(std::span<const MatrixXd> a_samples) {
  if (a_samples.empty()) throw std::invalid_argument("gene_gene_correlation: no samples");
  const Index J = a_samples.front().rows();
  MatrixXd out = MatrixXd::Identity(J, J);
  std::vector<double> vals(a_samples.size());
  for (Index j = 0; j < J; ++j) {
    for (Index h = j + 1; h < J; ++h) {
      for (std::size_t s = 0; s < a_samples.size(); ++s) {
        const MatrixXd& a = a_samples[s];
        vals[s] = a(j, h) / std::sqrt(a(j, j) * a(h, h));
      }
      out(j, h) = out(h, j) = median_of(vals);
    }
  }
  return out;
}

}  // namespace genemix
