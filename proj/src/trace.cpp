#include "genemix/trace.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace genemix {

static_assert(std::endian::native == std::endian::little, "trace format assumes a little-endian host");

namespace {

class ByteSink {
 public:
  template <typename T>
  void put(T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    data_.append(buf, sizeof(T));
  }
  void put_doubles(const double* p, Index n) {
    data_.append(reinterpret_cast<const char*>(p), static_cast<std::size_t>(n) * sizeof(double));
  }
  std::string take() { return std::move(data_); }

 private:
  std::string data_;
};

class ByteSource {
 public:
  explicit ByteSource(const std::string& data) : data_(data) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_doubles(double* p, Index n) {
    const std::size_t bytes = static_cast<std::size_t>(n) * sizeof(double);
    need(bytes);
    std::memcpy(p, data_.data() + pos_, bytes);
    pos_ += bytes;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw std::runtime_error("trace: record is shorter than its layout");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

MatrixXd get_matrix(ByteSource& src, Index rows, Index cols) {
  MatrixXd m(rows, cols);
  src.get_doubles(m.data(), m.size());
  return m;
}

std::string join_indices(const std::vector<Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

const std::string& header_value(const TraceHeader& h, const std::string& key) {
  auto it = h.find(key);
  if (it == h.end()) throw std::runtime_error("trace header: missing key '" + key + "'");
  return it->second;
}

TraceHeader parse_header(const std::string& text) {
  TraceHeader h;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("trace header: malformed line '" + line + "'");
    h[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return h;
}

// Reads magic, version and header; leaves the stream at the first record.
TraceHeader read_preamble(std::istream& in, std::uint64_t* preamble_bytes = nullptr) {
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kTraceMagic, 8) != 0) throw std::runtime_error("trace: bad magic");
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in) throw std::runtime_error("trace: truncated preamble");
  if (version != kTraceVersion) throw std::runtime_error("trace: unsupported version " + std::to_string(version));
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error("trace: truncated header");
  if (preamble_bytes) *preamble_bytes = 8 + sizeof version + sizeof len + len;
  return parse_header(text);
}

}  // namespace

void put_dims(TraceHeader& header, const ModelDims& dims, Index n_slots) {
  header["n_controls"] = std::to_string(dims.n_controls);
  header["n_cases"] = std::to_string(dims.n_cases);
  header["env_dim"] = std::to_string(dims.env_dim);
  header["loci"] = join_indices(dims.loci);
  header["M"] = std::to_string(n_slots);
}

ModelDims dims_from_header(const TraceHeader& header) {
  ModelDims d;
  d.n_controls = std::stoll(header_value(header, "n_controls"));
  d.n_cases = std::stoll(header_value(header, "n_cases"));
  d.env_dim = std::stoll(header_value(header, "env_dim"));
  std::istringstream in(header_value(header, "loci"));
  std::string item;
  while (std::getline(in, item, ',')) d.loci.push_back(std::stoll(item));
  return d;
}

Index slots_from_header(const TraceHeader& header) { return std::stoll(header_value(header, "M")); }

std::string encode_header(const TraceHeader& header) {
  std::string text;
  for (const auto& [k, v] : header) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw std::invalid_argument("trace header: keys and values must be single-line");
    text += k + "=" + v + "\n";
  }
  ByteSink sink;
  for (char c : kTraceMagic) sink.put(c);
  sink.put(kTraceVersion);
  sink.put(static_cast<std::uint64_t>(text.size()));
  return sink.take() + text;
}

std::string encode_snapshot(const Snapshot& s, const ModelDims& dims, Index n_slots) {
  const Index J = dims.n_genes();
  ByteSink sink;
  sink.put(static_cast<std::int64_t>(s.iteration));
  sink.put(s.b);
  sink.put(s.phi);
  sink.put_doubles(s.a.data(), J * J);
  sink.put_doubles(s.mu.data(), J * 2);
  for (const auto& bl : s.beta) sink.put_doubles(bl.data(), J * 2);
  if (static_cast<Index>(s.mixtures.size()) != dims.n_individuals() * J)
    throw std::invalid_argument("encode_snapshot: one mixture per triplet is required");
  for (const auto& m : s.mixtures) {
    if (m.n_slots() != n_slots) throw std::invalid_argument("encode_snapshot: slot count mismatch");
    sink.put(static_cast<std::uint32_t>(m.n_distinct()));
    sink.put(static_cast<std::uint32_t>(m.z));
    for (int c : m.config) sink.put(static_cast<std::int32_t>(c));
    for (Index l = 0; l < m.n_distinct(); ++l)
      for (Index r = 0; r < m.loci(); ++r) sink.put(m.distinct(l, r));
  }
  const SnapshotStats& st = s.stats;
  sink.put(st.d_star);
  sink.put(st.d_star_e);
  sink.put(st.d_star_emin);
  sink.put_doubles(st.d_hat.data(), J);
  sink.put_doubles(st.d_e.data(), J);
  sink.put_doubles(st.d_emin.data(), J);
  for (Index j = 0; j < J; ++j)
    for (int k = 0; k < 2; ++k) sink.put(static_cast<std::uint32_t>(st.central[j][k]));
  for (Index j = 0; j < J; ++j) sink.put_doubles(st.locus_distance[j].data(), dims.loci[j]);
  return sink.take();
}

Snapshot decode_snapshot(const std::string& payload, const ModelDims& dims, Index n_slots,
                         bool with_mixtures) {
  const Index J = dims.n_genes();
  ByteSource src(payload);
  Snapshot s;
  s.iteration = src.get<std::int64_t>();
  s.b = src.get<double>();
  s.phi = src.get<double>();
  s.a = get_matrix(src, J, J);
  s.mu = get_matrix(src, J, 2);
  for (Index l = 0; l < dims.env_dim; ++l) s.beta.push_back(get_matrix(src, J, 2));
  const Index n_triplets = dims.n_individuals() * J;
  if (with_mixtures) s.mixtures.reserve(n_triplets);
  for (Index t = 0; t < n_triplets; ++t) {
    const Index L = dims.loci[t % J];
    const auto tau = static_cast<Index>(src.get<std::uint32_t>());
    const auto z = static_cast<Index>(src.get<std::uint32_t>());
    if (!with_mixtures) {
      src.skip(n_slots * sizeof(std::int32_t) + static_cast<std::size_t>(tau * L) * sizeof(double));
      continue;
    }
    MixtureState m;
    m.z = z;
    m.config.resize(n_slots);
    m.occupancy.assign(tau, 0);
    for (auto& c : m.config) {
      c = src.get<std::int32_t>();
      if (c < 0 || c >= tau) throw std::runtime_error("trace: configuration label out of range");
      ++m.occupancy[c];
    }
    m.distinct.resize(tau, L);
    for (Index l = 0; l < tau; ++l)
      for (Index r = 0; r < L; ++r) m.distinct(l, r) = src.get<double>();
    s.mixtures.push_back(std::move(m));
  }
  SnapshotStats& st = s.stats;
  st.d_star = src.get<double>();
  st.d_star_e = src.get<double>();
  st.d_star_emin = src.get<double>();
  st.d_hat.resize(J);
  st.d_e.resize(J);
  st.d_emin.resize(J);
  src.get_doubles(st.d_hat.data(), J);
  src.get_doubles(st.d_e.data(), J);
  src.get_doubles(st.d_emin.data(), J);
  st.central.resize(J);
  for (Index j = 0; j < J; ++j)
    for (int k = 0; k < 2; ++k) st.central[j][k] = src.get<std::uint32_t>();
  st.locus_distance.resize(J);
  for (Index j = 0; j < J; ++j) {
    st.locus_distance[j].resize(dims.loci[j]);
    src.get_doubles(st.locus_distance[j].data(), dims.loci[j]);
  }
  if (!src.done()) throw std::runtime_error("trace: record is longer than its layout");
  return s;
}

TraceWriter::TraceWriter(const std::string& path, const TraceHeader& header, const ModelDims& dims,
                         Index n_slots)
    : out_(path, std::ios::binary | std::ios::trunc), dims_(dims), n_slots_(n_slots) {
  if (!out_) throw std::runtime_error("cannot open trace file '" + path + "' for writing");
  const std::string pre = encode_header(header);
  out_.write(pre.data(), static_cast<std::streamsize>(pre.size()));
  bytes_ = pre.size();
  flush();
}

TraceWriter TraceWriter::resume(const std::string& path, const TraceHeader& header,
                                const ModelDims& dims, Index n_slots, std::uint64_t resume_bytes) {
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open trace file '" + path + "' for resume");
    if (read_preamble(in) != header)
      throw std::runtime_error("trace '" + path + "' was written with a different configuration");
  }
  if (std::filesystem::file_size(path) < resume_bytes)
    throw std::runtime_error("trace '" + path + "' is shorter than its checkpoint");
  std::filesystem::resize_file(path, resume_bytes);
  TraceWriter w;
  w.out_.open(path, std::ios::binary | std::ios::app);
  if (!w.out_) throw std::runtime_error("cannot reopen trace file '" + path + "'");
  w.dims_ = dims;
  w.n_slots_ = n_slots;
  w.bytes_ = resume_bytes;
  return w;
}

void TraceWriter::append(const Snapshot& s) {
  const std::string payload = encode_snapshot(s, dims_, n_slots_);
  const auto len = static_cast<std::uint64_t>(payload.size());
  out_.write(reinterpret_cast<const char*>(&len), sizeof len);
  out_.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out_) throw std::runtime_error("trace: write failed");
  bytes_ += sizeof len + payload.size();
}

void TraceWriter::flush() {
  out_.flush();
  if (!out_) throw std::runtime_error("trace: flush failed");
}

TraceReader::TraceReader(const std::string& path) : in_(path, std::ios::binary) {
  if (!in_) throw std::runtime_error("cannot open trace file '" + path + "'");
  header_ = read_preamble(in_);
  dims_ = dims_from_header(header_);
  n_slots_ = slots_from_header(header_);
}

bool TraceReader::next(Snapshot& s, bool with_mixtures) {
  std::uint64_t len = 0;
  in_.read(reinterpret_cast<char*>(&len), sizeof len);
  if (in_.gcount() == 0 && in_.eof()) return false;
  if (!in_) throw std::runtime_error("trace: truncated record length");
  std::string payload(len, '\0');
  in_.read(payload.data(), static_cast<std::streamsize>(len));
  if (!in_) throw std::runtime_error("trace: truncated record");
  s = decode_snapshot(payload, dims_, n_slots_, with_mixtures);
  return true;
}

Trace read_trace(const std::string& path, bool with_mixtures) {
  TraceReader reader(path);
  Trace t;
  t.header = reader.header();
  t.dims = reader.dims();
  t.n_slots = reader.n_slots();
  Snapshot s;
  while (reader.next(s, with_mixtures)) t.snapshots.push_back(std::move(s));
  return t;
}

void write_trace_csv(std::ostream& out, const Trace& trace) {
  const Index J = trace.dims.n_genes();
  out << "iteration,b,phi,d_star,d_star_e,d_star_emin";
  for (const char* name : {"d_hat", "d_e", "d_emin"})
    for (Index j = 0; j < J; ++j) out << ',' << name << '_' << j;
  out << ",mean_tau\n";
  const auto old_precision = out.precision(17);
  for (const auto& s : trace.snapshots) {
    out << s.iteration << ',' << s.b << ',' << s.phi << ',' << s.stats.d_star << ','
        << s.stats.d_star_e << ',' << s.stats.d_star_emin;
    for (const VectorXd* v : {&s.stats.d_hat, &s.stats.d_e, &s.stats.d_emin})
      for (Index j = 0; j < J; ++j) out << ',' << (*v)[j];
    double tau = 0.0;
    for (const auto& m : s.mixtures) tau += static_cast<double>(m.n_distinct());
    out << ',' << (s.mixtures.empty() ? 0.0 : tau / static_cast<double>(s.mixtures.size())) << '\n';
  }
  out.precision(old_precision);
}

}  // namespace genemix
