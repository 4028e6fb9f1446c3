#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "genemix/hypothesis.hpp"
#include "genemix/sampler.hpp"
#include "genemix/trace.hpp"

namespace genemix {

/// Named per-snapshot statistic series in a fixed order:
///   d_star, d_star_e, d_star_emin, d_hat_j, d_e_j, d_emin_j,
///   beta_l_j_k (absolute values), phi, A_j_h for j < h (absolute values).
using StatisticStreams = std::vector<std::pair<std::string, std::vector<double>>>;

StatisticStreams statistic_stream(const Trace& trace);

/// Thresholds keyed by statistic name, with where they came from.
struct ThresholdSet {
  std::vector<std::pair<std::string, double>> epsilon;
  std::string source;
  double percentile = 55.0;

  /// Throws std::out_of_range if `name` has no threshold.
  double at(const std::string& name) const;
};

/// Each threshold is the nearest-rank percentile of its null stream.
ThresholdSet calibrate_thresholds(const Trace& null_trace, double percentile = 55.0,
                                  const std::string& source = "");

void write_thresholds(std::ostream& out, const ThresholdSet& t);
ThresholdSet read_thresholds(std::istream& in);

struct HypothesisResult {
  std::string statistic;
  double epsilon = 0.0;
  double probability = 0.0;  // posterior probability of the null
  bool accept = true;
};

struct DplTable {
  std::string gene;
  DplCall call;
};

struct TestReport {
  std::vector<HypothesisResult> results;
  bool genes_significant = false;
  bool euclidean_significant = false;
  bool beta_significant = false;
  bool phi_significant = false;
  std::string interpretation;
  MatrixXd correlation;
  Index n_snapshots = 0;

  /// Throws std::out_of_range for an unknown statistic.
  const HypothesisResult& result(const std::string& statistic) const;
};

/// Runs every test. Genes are declared significant when both the
/// clustering test on d_star and the Euclidean test reject; the Euclidean
/// test rejects when d_star_e rejects and the permutation-invariant
/// d_star_emin also rejects. Throws std::invalid_argument when the
/// thresholds do not cover the trace's statistics.
TestReport run_test_battery(const Trace& trace, const ThresholdSet& thresholds);

/// Per-gene DPL calls from per-locus distances averaged over snapshots.
std::vector<DplTable> detect_dpl(const Trace& trace, double top_fraction = 0.10,
                                 const std::vector<std::string>& gene_names = {});

MatrixXd gene_gene_correlation_summary(const Trace& trace);

void write_report_text(std::ostream& out, const TestReport& report);
void write_report_table(std::ostream& out, const TestReport& report);
void write_dpl_csv(std::ostream& out, const DplTable& table);
void write_summary(std::ostream& out, const Trace& trace, const TraceSummary& summary);

}  // namespace genemix
