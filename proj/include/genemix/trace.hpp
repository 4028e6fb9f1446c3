#pragma once

#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "genemix/dp_mixture.hpp"
#include "genemix/hypothesis.hpp"
#include "genemix/types.hpp"

namespace genemix {

/// Trace file layout (little-endian):
///
///   "GENEMIXT"  u32 version  u64 header_len  header text (key=value lines)
///   records:    u64 payload_len  payload
///
/// Payload of one snapshot:
///   i64 iteration, f64 b, f64 phi, f64 A[J*J], f64 mu[J*2], f64 beta[D][J*2]
///   (matrices column-major), then per triplet t = g*J + j:
///     u32 tau, u32 z, i32 config[M], f64 distinct[tau * L_j] (row-major)
///   then derived statistics:
///     f64 d_star, d_star_e, d_star_emin, f64 d_hat[J], d_e[J], d_emin[J],
///     u32 central[J][2], f64 locus_distance[sum L_j]
inline constexpr char kTraceMagic[8] = {'G', 'E', 'N', 'E', 'M', 'I', 'X', 'T'};
inline constexpr std::uint32_t kTraceVersion = 1;

using TraceHeader = std::map<std::string, std::string>;

/// Header keys for the model dimensions; the remaining keys echo the chain
/// configuration.
void put_dims(TraceHeader& header, const ModelDims& dims, Index n_slots);
ModelDims dims_from_header(const TraceHeader& header);
Index slots_from_header(const TraceHeader& header);

struct Snapshot {
  std::int64_t iteration = 0;
  double b = 0.0;
  double phi = 0.0;
  MatrixXd a;
  MatrixXd mu;
  std::vector<MatrixXd> beta;
  std::vector<MixtureState> mixtures;  // empty when read without mixtures
  SnapshotStats stats;
};

std::string encode_snapshot(const Snapshot& s, const ModelDims& dims, Index n_slots);
Snapshot decode_snapshot(const std::string& payload, const ModelDims& dims, Index n_slots,
                         bool with_mixtures = true);

/// Append-only writer. Opening an existing file for resume truncates it to
/// `resume_bytes` first.
class TraceWriter {
 public:
  TraceWriter() = default;
  TraceWriter(const std::string& path, const TraceHeader& header, const ModelDims& dims,
              Index n_slots);
  /// Reopens a trace written up to `resume_bytes`; throws std::runtime_error
  /// if the file is shorter or its header differs from `header`.
  static TraceWriter resume(const std::string& path, const TraceHeader& header,
                            const ModelDims& dims, Index n_slots, std::uint64_t resume_bytes);

  void append(const Snapshot& s);
  void flush();
  std::uint64_t bytes() const { return bytes_; }
  bool is_open() const { return out_.is_open(); }

 private:
  std::ofstream out_;
  ModelDims dims_;
  Index n_slots_ = 0;
  std::uint64_t bytes_ = 0;
};

std::string encode_header(const TraceHeader& header);

class TraceReader {
 public:
  explicit TraceReader(const std::string& path);

  const TraceHeader& header() const { return header_; }
  const ModelDims& dims() const { return dims_; }
  Index n_slots() const { return n_slots_; }

  /// Reads the next record; false at a clean end of file. Throws
  /// std::runtime_error on a truncated record.
  bool next(Snapshot& s, bool with_mixtures = true);

 private:
  std::ifstream in_;
  TraceHeader header_;
  ModelDims dims_;
  Index n_slots_ = 0;
};

struct Trace {
  TraceHeader header;
  ModelDims dims;
  Index n_slots = 0;
  std::vector<Snapshot> snapshots;
};

Trace read_trace(const std::string& path, bool with_mixtures = true);

/// One row per snapshot: iteration, b, phi, d_star, d_star_e, d_star_emin,
/// per-gene d_hat/d_e/d_emin, mean tau.
void write_trace_csv(std::ostream& out, const Trace& trace);

}  // namespace genemix
