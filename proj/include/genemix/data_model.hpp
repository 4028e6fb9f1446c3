#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "genemix/dp_mixture.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Input rejected while parsing a genotype or environment file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, long line)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Binary minor-allele indicators x[s][i][j][k][r] for a case-control study.
/// Individuals live in one index space, controls first; (i, k) addresses the
/// i-th member of group k.
class GenotypeDataset {
 public:
  GenotypeDataset() = default;
  GenotypeDataset(Index n_controls, Index n_cases, std::vector<std::string> gene_names,
                  std::vector<std::vector<std::string>> locus_names);

  Index n_controls() const { return n_controls_; }
  Index n_cases() const { return n_cases_; }
  Index n_individuals() const { return n_controls_ + n_cases_; }
  Index n_group(int k) const { return k == kControl ? n_controls_ : n_cases_; }
  Index n_genes() const { return static_cast<Index>(gene_names_.size()); }
  Index loci(Index j) const { return static_cast<Index>(locus_names_[j].size()); }
  std::vector<Index> loci_per_gene() const;

  const std::vector<std::string>& gene_names() const { return gene_names_; }
  const std::vector<std::string>& locus_names(Index j) const { return locus_names_[j]; }

  Index individual(Index i, int k) const { return k == kControl ? i : n_controls_ + i; }

  std::uint8_t allele(int chromosome, Index i, Index j, int k, Index r) const {
    return alleles_[j][chromosome](individual(i, k), r);
  }
  void set_allele(int chromosome, Index i, Index j, int k, Index r, std::uint8_t value);
  void set_genotype(Index i, Index j, int k, Index r, std::uint8_t a1, std::uint8_t a2) {
    set_allele(0, i, j, k, r, a1);
    set_allele(1, i, j, k, r, a2);
  }

  /// Chromosome s of gene j as an N x L_j matrix over global individuals.
  const AlleleMatrix& chromosome(int s, Index j) const { return alleles_[j][s]; }

  /// Minor-allele counts x1 + x2 of triplet (i, j, k), one per locus.
  CountVector minor_counts(Index i, Index j, int k) const;

  bool operator==(const GenotypeDataset&) const = default;

 private:
  Index n_controls_ = 0;
  Index n_cases_ = 0;
  std::vector<std::string> gene_names_;
  std::vector<std::vector<std::string>> locus_names_;
  std::vector<std::array<AlleleMatrix, 2>> alleles_;
};

enum class CovariateKind { continuous, binary };

/// Environmental covariates E_i, one row per individual (controls then cases).
struct EnvCovariates {
  MatrixXd values;  // N x D
  std::vector<CovariateKind> kinds;

  Index dim() const { return values.cols(); }
  Index n_individuals() const { return values.rows(); }
  bool operator==(const EnvCovariates& o) const {
    return kinds == o.kinds && values.rows() == o.values.rows() &&
           values.cols() == o.values.cols() && values == o.values;
  }
};

// -- file formats ------------------------------------------------------------

GenotypeDataset read_genotypes(std::istream& in);
GenotypeDataset load_genotypes(const std::string& path);
void write_genotypes(std::ostream& out, const GenotypeDataset& data);
void save_genotypes(const std::string& path, const GenotypeDataset& data);

EnvCovariates read_environment(std::istream& in);
EnvCovariates load_environment(const std::string& path);
void write_environment(std::ostream& out, const EnvCovariates& env);
void save_environment(const std::string& path, const EnvCovariates& env);

/// Throws FormatError when the environment rows do not match the individuals
/// of the genotype file.
void check_consistent(const GenotypeDataset& data, const EnvCovariates& env);

ModelDims dims_of(const GenotypeDataset& data, const EnvCovariates& env);

// -- null-model generator ----------------------------------------------------

struct NullHyper {
  Index M = 30;
  double alpha = 1.5;
  double u_sd = 1.0;
  double v_sd = 1.0;
  double mu_sd = 1.0;
  double lambda_sd = 1.0;
  CovariateKind env_kind = CovariateKind::continuous;
  /// Forces (nu1, nu2) for every locus; bypasses the link functions.
  std::optional<std::array<double, 2>> nu_override;
};

/// Parameters behind a null-model draw. Case and control records of gene j
/// are generated from the same mixture, gene_mixtures[j].
struct NullTruth {
  VectorXd u, v;       // length max L_j
  VectorXd mu;         // per gene, shared by cases and controls
  VectorXd lambda;     // per gene
  std::vector<MixtureState> gene_mixtures;
  std::vector<std::array<Index, 2>> mixture_of;  // [j][k] -> index into gene_mixtures
};

struct NullDataset {
  GenotypeDataset genotypes;
  EnvCovariates environment;
  NullTruth truth;
};

NullDataset generate_null_dataset(const ModelDims& dims, const NullHyper& hyper,
                                  std::uint64_t seed);

// -- scenario generator ------------------------------------------------------

enum class Scenario { gxg_and_gxe, null, env_only, genetic_only, additive_independent };

Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

struct ScenarioConfig {
  Scenario scenario = Scenario::gxg_and_gxe;
  Index n_individuals = 100;
  std::vector<Index> loci = {20, 20};
  Index n_subpopulations = 5;
  std::vector<double> mixing_weights = {0.1, 0.4, 0.2, 0.15, 0.15};
  /// Disease-predisposing locus per gene; empty selects the middle locus.
  std::vector<Index> dpl_positions;
  /// Subpopulation allele frequencies are Beta(a, a); small a separates them.
  double frequency_shape = 0.5;
  double genetic_effect = 1.5;
  double gene_gene_effect = 1.0;
  double env_effect = 1.5;
  double interaction_effect = 1.0;
  Index env_dim = 1;
  CovariateKind env_kind = CovariateKind::continuous;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
};

/// Which effects the generating mechanism contains. A false flag means the
/// corresponding null hypothesis is true.
struct ScenarioTruth {
  Scenario scenario = Scenario::null;
  bool genetic_effect = false;
  bool environment_effect = false;
  bool gene_gene_interaction = false;
  bool gene_environment_interaction = false;
  std::vector<Index> dpl_positions;
  std::vector<Index> subpopulation;   // per individual, dataset order
  MatrixXd subpopulation_freqs;        // n_subpopulations x (sum L_j)
  /// Population minor-allele frequency at each DPL among controls / cases,
  /// by exact enumeration of the disease model.
  VectorXd dpl_control_freq, dpl_case_freq;
};

struct ScenarioDataset {
  GenotypeDataset genotypes;
  EnvCovariates environment;
  ScenarioTruth truth;
};

ScenarioDataset generate_scenario_dataset(const ScenarioConfig& cfg);

void write_truth(std::ostream& out, const ScenarioTruth& truth);
void write_truth(std::ostream& out, const NullTruth& truth);

}  // namespace genemix
