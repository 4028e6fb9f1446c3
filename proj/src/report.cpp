#include "genemix/report.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace genemix {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_short(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

}  // namespace

StatisticStreams statistic_stream(const Trace& trace) {
  const Index J = trace.dims.n_genes();
  const Index D = trace.dims.env_dim;
  StatisticStreams out;
  auto add = [&](std::string name, auto&& get) {
    std::vector<double> v;
    v.reserve(trace.snapshots.size());
    for (const auto& s : trace.snapshots) v.push_back(get(s));
    out.emplace_back(std::move(name), std::move(v));
  };
  add("d_star", [](const Snapshot& s) { return s.stats.d_star; });
  add("d_star_e", [](const Snapshot& s) { return s.stats.d_star_e; });
  add("d_star_emin", [](const Snapshot& s) { return s.stats.d_star_emin; });
  for (Index j = 0; j < J; ++j) {
    const std::string g = std::to_string(j);
    add("d_hat_" + g, [j](const Snapshot& s) { return s.stats.d_hat[j]; });
    add("d_e_" + g, [j](const Snapshot& s) { return s.stats.d_e[j]; });
    add("d_emin_" + g, [j](const Snapshot& s) { return s.stats.d_emin[j]; });
  }
  for (Index l = 0; l < D; ++l)
    for (Index j = 0; j < J; ++j)
      for (int k = 0; k < 2; ++k)
        add("beta_" + std::to_string(l) + "_" + std::to_string(j) + "_" + std::to_string(k),
            [=](const Snapshot& s) { return std::abs(s.beta[l](j, k)); });
  add("phi", [](const Snapshot& s) { return s.phi; });
  for (Index j = 0; j < J; ++j)
    for (Index h = j + 1; h < J; ++h)
      add("A_" + std::to_string(j) + "_" + std::to_string(h),
          [=](const Snapshot& s) { return std::abs(s.a(j, h)); });
  return out;
}

double ThresholdSet::at(const std::string& name) const {
  for (const auto& [n, e] : epsilon)
    if (n == name) return e;
  throw std::out_of_range("no threshold for statistic '" + name + "'");
}

ThresholdSet calibrate_thresholds(const Trace& null_trace, double percentile, const std::string& source) {
  if (null_trace.snapshots.empty()) throw std::invalid_argument("calibrate_thresholds: empty trace");
  ThresholdSet t;
  t.source = source;
  t.percentile = percentile;
  for (auto& [name, values] : statistic_stream(null_trace))
    t.epsilon.emplace_back(name, percentile_nearest_rank(values, percentile));
  return t;
}

void write_thresholds(std::ostream& out, const ThresholdSet& t) {
  out << "# thresholds\n";
  out << "source=" << t.source << "\n";
  out << "percentile=" << fmt(t.percentile) << "\n";
  for (const auto& [name, e] : t.epsilon) out << "eps." << name << "=" << fmt(e) << "\n";
}

ThresholdSet read_thresholds(std::istream& in) {
  ThresholdSet t;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("thresholds line " + std::to_string(lineno) + ": expected key=value");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "source") t.source = value;
      else if (key == "percentile") t.percentile = std::stod(value);
      else if (starts_with(key, "eps.")) t.epsilon.emplace_back(key.substr(4), std::stod(value));
      else throw std::runtime_error("unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw std::runtime_error("thresholds line " + std::to_string(lineno) + ": bad number '" + value + "'");
    }
  }
  return t;
}

const HypothesisResult& TestReport::result(const std::string& statistic) const {
  for (const auto& r : results)
    if (r.statistic == statistic) return r;
  throw std::out_of_range("no test for statistic '" + statistic + "'");
}

TestReport run_test_battery(const Trace& trace, const ThresholdSet& thresholds) {
  if (trace.snapshots.empty()) throw std::invalid_argument("run_test_battery: empty trace");
  const StatisticStreams streams = statistic_stream(trace);
  if (streams.size() != thresholds.epsilon.size())
    throw std::invalid_argument("run_test_battery: thresholds cover " + std::to_string(thresholds.epsilon.size()) +
                                " statistics but the trace has " + std::to_string(streams.size()) +
                                " (dimension mismatch)");
  TestReport rep;
  rep.n_snapshots = static_cast<Index>(trace.snapshots.size());
  for (std::size_t i = 0; i < streams.size(); ++i) {
    const auto& [name, values] = streams[i];
    if (thresholds.epsilon[i].first != name)
      throw std::invalid_argument("run_test_battery: threshold '" + thresholds.epsilon[i].first +
                                  "' does not match statistic '" + name + "' (dimension mismatch)");
    HypothesisResult r;
    r.statistic = name;
    r.epsilon = thresholds.epsilon[i].second;
    r.probability = posterior_probability_below(values, r.epsilon);
    r.accept = accept_null(r.probability);
    if (starts_with(name, "beta_") && !r.accept) rep.beta_significant = true;
    rep.results.push_back(std::move(r));
  }
  rep.euclidean_significant = !rep.result("d_star_e").accept && !rep.result("d_star_emin").accept;
  rep.genes_significant = !rep.result("d_star").accept && rep.euclidean_significant;
  rep.phi_significant = !rep.result("phi").accept;
  rep.interpretation = interpret(rep.genes_significant, rep.beta_significant, rep.phi_significant);
  rep.correlation = gene_gene_correlation_summary(trace);
  return rep;
}

std::vector<DplTable> detect_dpl(const Trace& trace, double top_fraction,
                                 const std::vector<std::string>& gene_names) {
  if (trace.snapshots.empty()) throw std::invalid_argument("detect_dpl: empty trace");
  const Index J = trace.dims.n_genes();
  std::vector<DplTable> out;
  for (Index j = 0; j < J; ++j) {
    VectorXd mean = VectorXd::Zero(trace.dims.loci[j]);
    for (const auto& s : trace.snapshots) mean += s.stats.locus_distance[j];
    mean /= static_cast<double>(trace.snapshots.size());
    DplTable t;
    t.gene = j < static_cast<Index>(gene_names.size()) ? gene_names[j] : "gene" + std::to_string(j);
    t.call = dpl_call(mean, top_fraction);
    out.push_back(std::move(t));
  }
  return out;
}

MatrixXd gene_gene_correlation_summary(const Trace& trace) {
  std::vector<MatrixXd> a;
  a.reserve(trace.snapshots.size());
  for (const auto& s : trace.snapshots) a.push_back(s.a);
  return gene_gene_correlation(a);
}

void write_report_text(std::ostream& out, const TestReport& rep) {
  out << "Posterior hypothesis tests (" << rep.n_snapshots << " snapshots)\n\n";
  out << "  statistic              epsilon     P(H0)   decision\n";
  for (const auto& r : rep.results) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-20s %10.4f  %8.4f   %s\n", r.statistic.c_str(), r.epsilon,
                  r.probability, r.accept ? "accept H0" : "reject H0");
    out << line;
  }
  out << "\nGenes significant:        " << (rep.genes_significant ? "yes" : "no") << "\n";
  out << "Euclidean test rejects:   " << (rep.euclidean_significant ? "yes" : "no") << "\n";
  out << "Environment (beta):       " << (rep.beta_significant ? "significant" : "insignificant") << "\n";
  out << "Environment weight (phi): " << (rep.phi_significant ? "significant" : "insignificant") << "\n";
  out << "\nConclusion: " << rep.interpretation << "\n";
  out << "\nMedian gene-gene correlation:\n";
  for (Index j = 0; j < rep.correlation.rows(); ++j) {
    out << " ";
    for (Index h = 0; h < rep.correlation.cols(); ++h) out << ' ' << fmt_short(rep.correlation(j, h));
    out << "\n";
  }
}

void write_report_table(std::ostream& out, const TestReport& rep) {
  out << "hypothesis,statistic,epsilon,probability,decision\n";
  for (const auto& r : rep.results)
    out << "H0_" << r.statistic << ',' << r.statistic << ',' << fmt(r.epsilon) << ',' << fmt(r.probability)
        << ',' << (r.accept ? "accept" : "reject") << '\n';
}

void write_dpl_csv(std::ostream& out, const DplTable& table) {
  out << "gene,locus,distance,cutoff,flagged\n";
  std::vector<bool> flag(table.call.distance.size(), false);
  for (Index r : table.call.flagged) flag[r] = true;
  for (Index r = 0; r < table.call.distance.size(); ++r)
    out << table.gene << ',' << r << ',' << fmt(table.call.distance[r]) << ',' << fmt(table.call.cutoff) << ','
        << (flag[r] ? 1 : 0) << '\n';
}

void write_summary(std::ostream& out, const Trace& trace, const TraceSummary& summary) {
  out << "Trace summary: " << trace.snapshots.size() << " snapshots, M = " << trace.n_slots << "\n";
  for (const char* key : {"seed", "alpha", "iterations", "burn_in", "thinning"}) {
    auto it = trace.header.find(key);
    if (it != trace.header.end()) out << "  " << key << " = " << it->second << "\n";
  }
  out << "\n  statistic              mean      median      mcse\n";
  for (const auto& [name, s] : summary.statistics) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-20s %9.4f  %9.4f  %9.5f\n", name.c_str(), s.mean, s.median, s.mcse);
    out << line;
  }
  if (summary.tau_histogram.sum() > 0.0) {
    out << "\nPosterior of tau (all triplets)\n";
    for (Index t = 0; t < summary.tau_histogram.size(); ++t) {
      const double p = summary.tau_histogram[t];
      if (p <= 0.0) continue;
      out << "  " << (t + 1) << "\t" << fmt_short(p) << "\t" << std::string(static_cast<std::size_t>(p * 60.0 + 0.5), '#')
          << "\n";
    }
  }
}

}  // namespace genemix
