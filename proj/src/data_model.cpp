#include "genemix/data_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "genemix/interaction_prior.hpp"
#include "genemix/rng.hpp"

namespace genemix {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

long long parse_int(const std::string& s, const char* what, long line) {
  long long v = 0;
  const std::string t = trim(s);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || p != t.data() + t.size() || t.empty())
    throw FormatError(std::string("expected an integer ") + what + ", got '" + t + "'", line);
  return v;
}

double parse_double(const std::string& s, long line) {
  const std::string t = trim(s);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw FormatError("non-numeric value '" + t + "'", line);
  }
  if (used != t.size()) throw FormatError("non-numeric value '" + t + "'", line);
  return v;
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Nodes and weights of the probabilists' Gauss-Hermite rule (weights sum to
// one), from the eigen-decomposition of the Jacobi matrix.
std::pair<VectorXd, VectorXd> gauss_hermite(Index n) {
  MatrixXd jac = MatrixXd::Zero(n, n);
  for (Index i = 1; i < n; ++i) jac(i, i - 1) = jac(i - 1, i) = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(jac);
  const VectorXd w = es.eigenvectors().row(0).transpose().array().square();
  return {es.eigenvalues(), w / w.sum()};
}

std::vector<std::string> default_names(const std::string& prefix, Index n) {
  std::vector<std::string> v;
  for (Index i = 0; i < n; ++i) v.push_back(prefix + std::to_string(i + 1));
  return v;
}

EnvCovariates draw_environment(Index n, Index dim, CovariateKind kind, CounterRng& rng) {
  EnvCovariates env;
  env.values.resize(n, dim);
  env.kinds.assign(dim, kind);
  for (Index i = 0; i < n; ++i)
    for (Index d = 0; d < dim; ++d)
      env.values(i, d) = kind == CovariateKind::binary ? (sample_bernoulli(rng, 0.5) ? 1.0 : 0.0)
                                                       : sample_normal(rng);
  return env;
}

}  // namespace

// -- GenotypeDataset ---------------------------------------------------------

GenotypeDataset::GenotypeDataset(Index n_controls, Index n_cases, std::vector<std::string> gene_names,
                                 std::vector<std::vector<std::string>> locus_names)
    : n_controls_(n_controls),
      n_cases_(n_cases),
      gene_names_(std::move(gene_names)),
      locus_names_(std::move(locus_names)) {
  if (n_controls < 0 || n_cases < 0) throw std::invalid_argument("GenotypeDataset: negative group size");
  if (gene_names_.size() != locus_names_.size())
    throw std::invalid_argument("GenotypeDataset: one locus-name list per gene is required");
  for (const auto& names : locus_names_) {
    if (names.empty()) throw std::invalid_argument("GenotypeDataset: every gene needs at least one locus");
    const Index L = static_cast<Index>(names.size());
    alleles_.push_back({AlleleMatrix::Zero(n_individuals(), L), AlleleMatrix::Zero(n_individuals(), L)});
  }
}

std::vector<Index> GenotypeDataset::loci_per_gene() const {
  std::vector<Index> v;
  for (Index j = 0; j < n_genes(); ++j) v.push_back(loci(j));
  return v;
}

void GenotypeDataset::set_allele(int chromosome, Index i, Index j, int k, Index r, std::uint8_t value) {
  if (value > 1) throw std::domain_error("GenotypeDataset: allele must be 0 or 1");
  if (chromosome < 0 || chromosome > 1 || k < 0 || k > 1 || i < 0 || i >= n_group(k) || j < 0 ||
      j >= n_genes() || r < 0 || r >= loci(j))
    throw std::out_of_range("GenotypeDataset: index out of range");
  alleles_[j][chromosome](individual(i, k), r) = value;
}

CountVector GenotypeDataset::minor_counts(Index i, Index j, int k) const {
  const Index g = individual(i, k);
  return (alleles_[j][0].row(g) + alleles_[j][1].row(g)).transpose();
}

// -- genotype file -----------------------------------------------------------

GenotypeDataset read_genotypes(std::istream& in) {
  struct Row {
    long line;
    Index id;
    int k;
    Index gene;
    std::string locus;
    std::uint8_t a1, a2;
  };
  std::string line;
  long lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return true;
    }
    return false;
  };

  if (!next_line()) throw FormatError("empty genotype file", 0);
  std::istringstream hdr(line);
  std::string tag;
  long long J = -1;
  if (!(hdr >> tag >> J) || tag != "#genes" || J < 1)
    throw FormatError("expected header '#genes J' with J >= 1", lineno);

  std::vector<std::string> genes;
  std::vector<Index> declared;
  std::map<std::string, Index> gene_index;
  for (long long j = 0; j < J; ++j) {
    if (!next_line()) throw FormatError("missing '#gene' declaration", lineno);
    std::istringstream g(line);
    std::string name;
    long long L = -1;
    std::string extra;
    if (!(g >> tag >> name >> L) || tag != "#gene" || L < 1 || (g >> extra))
      throw FormatError("expected '#gene <name> <L>' with L >= 1", lineno);
    if (!gene_index.emplace(name, j).second) throw FormatError("duplicate gene '" + name + "'", lineno);
    genes.push_back(name);
    declared.push_back(L);
  }

  std::vector<Row> rows;
  std::vector<std::vector<std::string>> locus_names(J);
  std::vector<std::map<std::string, Index>> locus_index(J);
  std::array<Index, 2> group_size{0, 0};
  while (next_line()) {
    if (line[0] == '#') throw FormatError("unexpected header line after the declarations", lineno);
    const auto cols = split(line, ',');
    if (cols.size() != 6)
      throw FormatError("expected 6 columns, found " + std::to_string(cols.size()), lineno);
    Row r;
    r.line = lineno;
    const long long id = parse_int(cols[0], "individual id", lineno);
    if (id < 0) throw FormatError("individual id must be nonnegative", lineno);
    r.id = id;
    const long long k = parse_int(cols[1], "status", lineno);
    if (k != 0 && k != 1) throw FormatError("status must be 0 or 1", lineno);
    r.k = static_cast<int>(k);
    const std::string gname = trim(cols[2]);
    auto git = gene_index.find(gname);
    if (git == gene_index.end()) throw FormatError("undeclared gene '" + gname + "'", lineno);
    r.gene = git->second;
    r.locus = trim(cols[3]);
    if (r.locus.empty()) throw FormatError("empty locus name", lineno);
    for (int c = 0; c < 2; ++c) {
      const long long a = parse_int(cols[4 + c], "allele", lineno);
      if (a != 0 && a != 1) throw FormatError("allele value must be 0 or 1, got " + std::to_string(a), lineno);
      (c == 0 ? r.a1 : r.a2) = static_cast<std::uint8_t>(a);
    }
    auto& idx = locus_index[r.gene];
    if (idx.find(r.locus) == idx.end()) {
      if (static_cast<Index>(locus_names[r.gene].size()) == declared[r.gene])
        throw FormatError("gene '" + gname + "' declares " + std::to_string(declared[r.gene]) +
                              " loci but row names another locus '" + r.locus + "'",
                          lineno);
      idx.emplace(r.locus, static_cast<Index>(locus_names[r.gene].size()));
      locus_names[r.gene].push_back(r.locus);
    }
    group_size[r.k] = std::max(group_size[r.k], r.id + 1);
    rows.push_back(std::move(r));
  }
  if (group_size[0] + group_size[1] == 0) throw FormatError("no individuals", lineno);
  for (long long j = 0; j < J; ++j)
    if (static_cast<Index>(locus_names[j].size()) != declared[j])
      throw FormatError("gene '" + genes[j] + "' declares " + std::to_string(declared[j]) + " loci but " +
                            std::to_string(locus_names[j].size()) + " appear",
                        lineno);

  GenotypeDataset data(group_size[0], group_size[1], genes, locus_names);
  std::vector<std::vector<bool>> seen(J);
  for (long long j = 0; j < J; ++j) seen[j].assign(data.n_individuals() * declared[j], false);
  for (const Row& r : rows) {
    const Index locus = locus_index[r.gene].at(r.locus);
    auto cell = seen[r.gene][data.individual(r.id, r.k) * declared[r.gene] + locus];
    if (cell)
      throw FormatError("duplicate row for individual " + std::to_string(r.id) + " (status " +
                            std::to_string(r.k) + "), gene '" + genes[r.gene] + "', locus '" + r.locus + "'",
                        r.line);
    cell = true;
    data.set_genotype(r.id, r.gene, r.k, locus, r.a1, r.a2);
  }
  for (long long j = 0; j < J; ++j) {
    for (int k = 0; k < 2; ++k) {
      for (Index i = 0; i < data.n_group(k); ++i) {
        for (Index l = 0; l < declared[j]; ++l) {
          if (!seen[j][data.individual(i, k) * declared[j] + l])
            throw FormatError("missing row for individual " + std::to_string(i) + " (status " +
                                  std::to_string(k) + "), gene '" + genes[j] + "', locus '" +
                                  locus_names[j][l] + "'",
                              lineno);
        }
      }
    }
  }
  return data;
}

GenotypeDataset load_genotypes(const std::string& path) {
  auto in = open_in(path);
  return read_genotypes(in);
}

void write_genotypes(std::ostream& out, const GenotypeDataset& data) {
  out << "#genes " << data.n_genes() << "\n";
  for (Index j = 0; j < data.n_genes(); ++j)
    out << "#gene " << data.gene_names()[j] << " " << data.loci(j) << "\n";
  for (int k = 0; k < 2; ++k)
    for (Index i = 0; i < data.n_group(k); ++i)
      for (Index j = 0; j < data.n_genes(); ++j)
        for (Index r = 0; r < data.loci(j); ++r)
          out << i << ',' << k << ',' << data.gene_names()[j] << ',' << data.locus_names(j)[r] << ','
              << int(data.allele(0, i, j, k, r)) << ',' << int(data.allele(1, i, j, k, r)) << '\n';
}

void save_genotypes(const std::string& path, const GenotypeDataset& data) {
  auto out = open_out(path);
  write_genotypes(out, data);
}

// -- environment file --------------------------------------------------------

EnvCovariates read_environment(std::istream& in) {
  std::string line;
  long lineno = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw FormatError("no individuals", 0);
  std::istringstream hdr(line);
  std::string tag, kinds_field;
  long long D = -1;
  if (!(hdr >> tag >> D) || tag != "#env" || D < 0) throw FormatError("expected header '#env D kinds=...'", lineno);
  hdr >> kinds_field;
  EnvCovariates env;
  if (D > 0) {
    if (kinds_field.rfind("kinds=", 0) != 0) throw FormatError("header lacks 'kinds=' annotation", lineno);
    const auto kinds = split(kinds_field.substr(6), ',');
    if (static_cast<long long>(kinds.size()) != D)
      throw FormatError("kinds lists " + std::to_string(kinds.size()) + " entries for D=" + std::to_string(D), lineno);
    for (const auto& kd : kinds) {
      if (kd == "c") env.kinds.push_back(CovariateKind::continuous);
      else if (kd == "b") env.kinds.push_back(CovariateKind::binary);
      else throw FormatError("unknown covariate kind '" + kd + "'", lineno);
    }
  }

  std::vector<std::pair<long long, std::vector<double>>> rows;
  std::vector<long> row_lines;
  while (next_line()) {
    const auto cols = split(line, ',');
    if (static_cast<long long>(cols.size()) != D + 1)
      throw FormatError("expected " + std::to_string(D + 1) + " columns, found " + std::to_string(cols.size()), lineno);
    const long long id = parse_int(cols[0], "individual id", lineno);
    std::vector<double> v(D);
    for (long long d = 0; d < D; ++d) {
      v[d] = parse_double(cols[d + 1], lineno);
      if (!std::isfinite(v[d])) throw FormatError("non-finite value", lineno);
      if (env.kinds[d] == CovariateKind::binary && v[d] != 0.0 && v[d] != 1.0)
        throw FormatError("binary covariate must be 0 or 1", lineno);
    }
    rows.emplace_back(id, std::move(v));
    row_lines.push_back(lineno);
  }
  if (rows.empty()) throw FormatError("no individuals", lineno);
  const Index N = static_cast<Index>(rows.size());
  env.values.resize(N, D);
  std::vector<bool> seen(N, false);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const long long id = rows[r].first;
    if (id < 0 || id >= N)
      throw FormatError("individual id " + std::to_string(id) + " outside 0.." + std::to_string(N - 1), row_lines[r]);
    if (seen[id]) throw FormatError("duplicate individual id " + std::to_string(id), row_lines[r]);
    seen[id] = true;
    for (long long d = 0; d < D; ++d) env.values(id, d) = rows[r].second[d];
  }
  return env;
}

EnvCovariates load_environment(const std::string& path) {
  auto in = open_in(path);
  return read_environment(in);
}

void write_environment(std::ostream& out, const EnvCovariates& env) {
  out << "#env " << env.dim() << " kinds=";
  for (Index d = 0; d < env.dim(); ++d)
    out << (d ? "," : "") << (env.kinds[d] == CovariateKind::binary ? "b" : "c");
  out << "\n";
  for (Index i = 0; i < env.n_individuals(); ++i) {
    out << i;
    for (Index d = 0; d < env.dim(); ++d) out << ',' << format_double(env.values(i, d));
    out << '\n';
  }
}

void save_environment(const std::string& path, const EnvCovariates& env) {
  auto out = open_out(path);
  write_environment(out, env);
}

void check_consistent(const GenotypeDataset& data, const EnvCovariates& env) {
  if (env.n_individuals() != data.n_individuals())
    throw FormatError("environment has " + std::to_string(env.n_individuals()) +
                          " rows but the genotype data has " + std::to_string(data.n_individuals()) +
                          " individuals",
                      0);
  if (static_cast<Index>(env.kinds.size()) != env.dim())
    throw FormatError("environment kinds do not match its dimension", 0);
}

ModelDims dims_of(const GenotypeDataset& data, const EnvCovariates& env) {
  check_consistent(data, env);
  return {data.n_controls(), data.n_cases(), env.dim(), data.loci_per_gene()};
}

// -- null-model generator ----------------------------------------------------

NullDataset generate_null_dataset(const ModelDims& dims, const NullHyper& hyper, std::uint64_t seed) {
  const Index J = dims.n_genes();
  if (J < 1 || dims.n_individuals() < 1 || dims.env_dim < 0)
    throw std::invalid_argument("generate_null_dataset: invalid dimensions");
  for (Index L : dims.loci)
    if (L < 1) throw std::invalid_argument("generate_null_dataset: every gene needs a locus");
  if (hyper.M < 1 || !(hyper.alpha > 0.0)) throw std::invalid_argument("generate_null_dataset: invalid M or alpha");

  CounterRng rng(seed, kStreamData, 0);
  const Index L = dims.max_loci();
  NullDataset out;
  NullTruth& truth = out.truth;
  truth.u.resize(L);
  truth.v.resize(L);
  for (Index r = 0; r < L; ++r) truth.u[r] = sample_normal(rng, 0.0, hyper.u_sd);
  for (Index r = 0; r < L; ++r) truth.v[r] = sample_normal(rng, 0.0, hyper.v_sd);
  truth.mu.resize(J);
  truth.lambda.resize(J);
  for (Index j = 0; j < J; ++j) truth.mu[j] = sample_normal(rng, 0.0, hyper.mu_sd);
  for (Index j = 0; j < J; ++j) truth.lambda[j] = sample_normal(rng, 0.0, hyper.lambda_sd);

  for (Index j = 0; j < J; ++j) {
    BetaHyper h{VectorXd(dims.loci[j]), VectorXd(dims.loci[j])};
    for (Index r = 0; r < dims.loci[j]; ++r) {
      if (hyper.nu_override) {
        h.nu1[r] = (*hyper.nu_override)[0];
        h.nu2[r] = (*hyper.nu_override)[1];
      } else {
        const BetaShapes bs = beta_shapes(truth.u[r], truth.v[r], truth.lambda[j], truth.mu[j], 0.0);
        h.nu1[r] = bs.nu1;
        h.nu2[r] = bs.nu2;
      }
    }
    h.validate();
    truth.gene_mixtures.push_back(draw_polya_urn_prior(hyper.M, hyper.alpha, h, rng));
    truth.mixture_of.push_back({j, j});
  }

  std::vector<std::vector<std::string>> loci;
  for (Index j = 0; j < J; ++j) loci.push_back(default_names("snp", dims.loci[j]));
  GenotypeDataset data(dims.n_controls, dims.n_cases, default_names("gene", J), loci);
  for (int k = 0; k < 2; ++k) {
    for (Index i = 0; i < dims.n_group(k); ++i) {
      for (Index j = 0; j < J; ++j) {
        const MixtureState& mix = truth.gene_mixtures[truth.mixture_of[j][k]];
        const Index z = sample_index(rng, hyper.M);
        const auto p = mix.slot_freqs(z);
        for (Index r = 0; r < dims.loci[j]; ++r) {
          const auto a1 = static_cast<std::uint8_t>(sample_bernoulli(rng, p[r]));
          const auto a2 = static_cast<std::uint8_t>(sample_bernoulli(rng, p[r]));
          data.set_genotype(i, j, k, r, a1, a2);
        }
      }
    }
  }
  out.genotypes = std::move(data);
  out.environment = draw_environment(dims.n_individuals(), dims.env_dim, hyper.env_kind, rng);
  return out;
}

// -- scenario generator ------------------------------------------------------

Scenario parse_scenario(const std::string& name) {
  static const std::map<std::string, Scenario> names = {
      {"gxg_and_gxe", Scenario::gxg_and_gxe},
      {"null", Scenario::null},
      {"env_only", Scenario::env_only},
      {"genetic_only", Scenario::genetic_only},
      {"additive_independent", Scenario::additive_independent},
  };
  auto it = names.find(name);
  if (it == names.end()) throw std::invalid_argument("unknown scenario '" + name + "'");
  return it->second;
}

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::gxg_and_gxe: return "gxg_and_gxe";
    case Scenario::null: return "null";
    case Scenario::env_only: return "env_only";
    case Scenario::genetic_only: return "genetic_only";
    case Scenario::additive_independent: return "additive_independent";
  }
  return "unknown";
}

void ScenarioConfig::validate() const {
  if (n_individuals < 2) throw std::invalid_argument("ScenarioConfig: need at least 2 individuals");
  if (loci.empty()) throw std::invalid_argument("ScenarioConfig: need at least one gene");
  for (Index L : loci)
    if (L < 1) throw std::invalid_argument("ScenarioConfig: every gene needs a locus");
  if (n_subpopulations < 1) throw std::invalid_argument("ScenarioConfig: need at least one subpopulation");
  if (static_cast<Index>(mixing_weights.size()) != n_subpopulations)
    throw std::invalid_argument("ScenarioConfig: one mixing weight per subpopulation is required");
  for (double w : mixing_weights)
    if (!(w >= 0.0)) throw std::invalid_argument("ScenarioConfig: mixing weights must be nonnegative");
  const double total = std::accumulate(mixing_weights.begin(), mixing_weights.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("ScenarioConfig: mixing weights must sum to 1");
  if (!dpl_positions.empty()) {
    if (dpl_positions.size() != loci.size())
      throw std::invalid_argument("ScenarioConfig: one DPL position per gene is required");
    for (std::size_t j = 0; j < loci.size(); ++j)
      if (dpl_positions[j] < 0 || dpl_positions[j] >= loci[j])
        throw std::invalid_argument("ScenarioConfig: DPL position out of range for gene " + std::to_string(j + 1));
  }
  if (!(frequency_shape > 0.0)) throw std::invalid_argument("ScenarioConfig: frequency_shape must be positive");
  if (env_dim < 1) throw std::invalid_argument("ScenarioConfig: env_dim must be at least 1");
}

namespace {

struct Effects {
  bool g, gg, e, ge;
};

Effects effects_of(Scenario s) {
  switch (s) {
    case Scenario::gxg_and_gxe: return {true, true, true, true};
    case Scenario::null: return {false, false, false, false};
    case Scenario::env_only: return {false, false, true, false};
    case Scenario::genetic_only: return {true, true, false, false};
    case Scenario::additive_independent: return {true, false, true, false};
  }
  return {};
}

double linear_predictor(const ScenarioConfig& cfg, const Effects& fx, const std::vector<int>& g, double e) {
  double sum = 0.0, pair = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    sum += g[j] - 1;
    for (std::size_t h = j + 1; h < g.size(); ++h) pair += (g[j] - 1) * (g[h] - 1);
  }
  double eta = 0.0;
  if (fx.g) eta += cfg.genetic_effect * sum;
  if (fx.gg) eta += cfg.gene_gene_effect * pair;
  if (fx.e) eta += cfg.env_effect * e;
  if (fx.ge) eta += cfg.interaction_effect * e * sum;
  return eta;
}

// Exact minor-allele frequency at each DPL among controls and cases.
std::pair<VectorXd, VectorXd> dpl_frequencies(const ScenarioConfig& cfg, const Effects& fx,
                                              const std::vector<std::vector<double>>& dpl_freq) {
  const Index J = static_cast<Index>(cfg.loci.size());
  VectorXd nodes, weights;
  if (cfg.env_kind == CovariateKind::binary) {
    nodes = (VectorXd(2) << -1.0, 1.0).finished();
    weights = (VectorXd(2) << 0.5, 0.5).finished();
  } else {
    std::tie(nodes, weights) = gauss_hermite(40);
  }
  Index combos = 1;
  for (Index j = 0; j < J; ++j) combos *= 3;
  std::array<double, 2> mass{0.0, 0.0};
  std::array<VectorXd, 2> allele{VectorXd::Zero(J), VectorXd::Zero(J)};
  std::vector<int> g(J);
  for (Index s = 0; s < cfg.n_subpopulations; ++s) {
    for (Index c = 0; c < combos; ++c) {
      double pg = cfg.mixing_weights[s];
      Index code = c;
      for (Index j = 0; j < J; ++j) {
        g[j] = static_cast<int>(code % 3);
        code /= 3;
        const double f = dpl_freq[s][j];
        pg *= g[j] == 0 ? (1 - f) * (1 - f) : g[j] == 1 ? 2 * f * (1 - f) : f * f;
      }
      for (Index q = 0; q < nodes.size(); ++q) {
        const double p1 = logistic(linear_predictor(cfg, fx, g, nodes[q]));
        const double w = pg * weights[q];
        const std::array<double, 2> pk{w * (1.0 - p1), w * p1};
        for (int k = 0; k < 2; ++k) {
          mass[k] += pk[k];
          for (Index j = 0; j < J; ++j) allele[k][j] += pk[k] * g[j];
        }
      }
    }
  }
  return {allele[0] / (2.0 * mass[0]), allele[1] / (2.0 * mass[1])};
}

}  // namespace

ScenarioDataset generate_scenario_dataset(const ScenarioConfig& cfg) {
  cfg.validate();
  const Index J = static_cast<Index>(cfg.loci.size());
  const Index N = cfg.n_individuals;
  const Index S = cfg.n_subpopulations;
  const Effects fx = effects_of(cfg.scenario);
  CounterRng rng(cfg.seed, kStreamData, 1);

  ScenarioTruth truth;
  truth.scenario = cfg.scenario;
  truth.genetic_effect = fx.g;
  truth.gene_gene_interaction = fx.gg;
  truth.environment_effect = fx.e;
  truth.gene_environment_interaction = fx.ge;
  truth.dpl_positions = cfg.dpl_positions;
  if (truth.dpl_positions.empty())
    for (Index L : cfg.loci) truth.dpl_positions.push_back(L / 2);

  std::vector<Index> offset(J, 0);
  for (Index j = 1; j < J; ++j) offset[j] = offset[j - 1] + cfg.loci[j - 1];
  const Index total_loci = offset[J - 1] + cfg.loci[J - 1];
  truth.subpopulation_freqs.resize(S, total_loci);
  for (Index s = 0; s < S; ++s)
    for (Index c = 0; c < total_loci; ++c)
      truth.subpopulation_freqs(s, c) =
          std::clamp(sample_beta(rng, cfg.frequency_shape, cfg.frequency_shape), kFreqFloor, 1.0 - kFreqFloor);

  const VectorXd weights = Eigen::Map<const VectorXd>(cfg.mixing_weights.data(), S);
  const VectorXd log_w = weights.array().log();

  struct Person {
    Index subpop;
    RowVectorXd env;
    std::vector<AlleleMatrix> chrom;  // per gene, 2 x L_j
    int status;
  };
  std::vector<Person> people(N);
  std::vector<int> dpl_geno(J);
  for (Index n = 0; n < N; ++n) {
    Person& p = people[n];
    p.subpop = sample_log_categorical(rng, log_w);
    p.env.resize(cfg.env_dim);
    for (Index d = 0; d < cfg.env_dim; ++d)
      p.env[d] = cfg.env_kind == CovariateKind::binary ? (sample_bernoulli(rng, 0.5) ? 1.0 : 0.0) : sample_normal(rng);
    for (Index j = 0; j < J; ++j) {
      AlleleMatrix a(2, cfg.loci[j]);
      for (Index r = 0; r < cfg.loci[j]; ++r) {
        const double f = truth.subpopulation_freqs(p.subpop, offset[j] + r);
        a(0, r) = static_cast<std::uint8_t>(sample_bernoulli(rng, f));
        a(1, r) = static_cast<std::uint8_t>(sample_bernoulli(rng, f));
      }
      dpl_geno[j] = a(0, truth.dpl_positions[j]) + a(1, truth.dpl_positions[j]);
      p.chrom.push_back(std::move(a));
    }
    const double e = cfg.env_kind == CovariateKind::binary ? 2.0 * p.env[0] - 1.0 : p.env[0];
    p.status = sample_bernoulli(rng, logistic(linear_predictor(cfg, fx, dpl_geno, e))) ? kCase : kControl;
  }

  Index n_cases = 0;
  for (const auto& p : people) n_cases += p.status;
  const Index n_controls = N - n_cases;
  if (n_cases == 0 || n_controls == 0)
    throw std::runtime_error("scenario draw produced an empty case or control group; use another seed");

  std::vector<std::vector<std::string>> loci;
  for (Index j = 0; j < J; ++j) loci.push_back(default_names("snp", cfg.loci[j]));
  GenotypeDataset data(n_controls, n_cases, default_names("gene", J), loci);
  EnvCovariates env;
  env.values.resize(N, cfg.env_dim);
  env.kinds.assign(cfg.env_dim, cfg.env_kind);
  truth.subpopulation.resize(N);
  std::array<Index, 2> next{0, 0};
  for (const auto& p : people) {
    const int k = p.status;
    const Index i = next[k]++;
    const Index g = data.individual(i, k);
    env.values.row(g) = p.env;
    truth.subpopulation[g] = p.subpop;
    for (Index j = 0; j < J; ++j)
      for (Index r = 0; r < cfg.loci[j]; ++r) data.set_genotype(i, j, k, r, p.chrom[j](0, r), p.chrom[j](1, r));
  }

  std::vector<std::vector<double>> dpl_freq(S, std::vector<double>(J));
  for (Index s = 0; s < S; ++s)
    for (Index j = 0; j < J; ++j) dpl_freq[s][j] = truth.subpopulation_freqs(s, offset[j] + truth.dpl_positions[j]);
  std::tie(truth.dpl_control_freq, truth.dpl_case_freq) = dpl_frequencies(cfg, fx, dpl_freq);

  return {std::move(data), std::move(env), std::move(truth)};
}

void write_truth(std::ostream& out, const ScenarioTruth& t) {
  auto flag = [](bool b) { return b ? "present" : "absent"; };
  out << "scenario=" << scenario_name(t.scenario) << "\n";
  out << "genetic_effect=" << flag(t.genetic_effect) << "\n";
  out << "environment_effect=" << flag(t.environment_effect) << "\n";
  out << "gene_gene_interaction=" << flag(t.gene_gene_interaction) << "\n";
  out << "gene_environment_interaction=" << flag(t.gene_environment_interaction) << "\n";
  out << "dpl_positions=";
  for (std::size_t j = 0; j < t.dpl_positions.size(); ++j) out << (j ? "," : "") << t.dpl_positions[j];
  out << "\n";
  for (Index j = 0; j < t.dpl_control_freq.size(); ++j)
    out << "dpl_freq." << j << "=" << format_double(t.dpl_control_freq[j]) << ","
        << format_double(t.dpl_case_freq[j]) << "\n";
  out << "subpopulation=";
  for (std::size_t i = 0; i < t.subpopulation.size(); ++i) out << (i ? "," : "") << t.subpopulation[i];
  out << "\n";
}

void write_truth(std::ostream& out, const NullTruth& t) {
  auto vec = [&](const char* name, const VectorXd& v) {
    out << name << "=";
    for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << format_double(v[i]);
    out << "\n";
  };
  out << "scenario=null_model\n";
  vec("u", t.u);
  vec("v", t.v);
  vec("mu", t.mu);
  vec("lambda", t.lambda);
  for (std::size_t j = 0; j < t.gene_mixtures.size(); ++j) {
    const MixtureState& m = t.gene_mixtures[j];
    out << "gene." << j << ".mixture_of=" << t.mixture_of[j][0] << "," << t.mixture_of[j][1] << "\n";
    out << "gene." << j << ".tau=" << m.n_distinct() << "\n";
    out << "gene." << j << ".config=";
    for (Index s = 0; s < m.n_slots(); ++s) out << (s ? "," : "") << m.config[s];
    out << "\n";
  }
}

}  // namespace genemix
