#pragma once

#include "smnreg/diagnostics.hpp"
#include "smnreg/sampler.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

// File formats.
//
// Matrices: comma-separated, one observation per row, no header unless
// stated.  Traces: one row per retained iteration with columns
//   iter, beta_1_1..beta_1_d, beta_2_1, ..., sigma_1_1, sigma_2_1, ...
// (beta entries row-major, sigma lower triangle column-major), full
// round-trip precision, plus a key-value metadata sidecar
// <trace>.meta.txt recording dimensions, seed, mixing family, a and
// iteration counts.

namespace smnreg {

Eigen::MatrixXd load_matrix_csv(const std::string& path, bool header = false);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);

void write_trace_csv(const std::string& path, const ChainTrace& trace);

// Streaming writer used by the chain runner so aborted runs leave a
// readable partial trace behind.
class TraceWriter {
 public:
  TraceWriter(const std::string& path, int p, int d);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void append(long iteration, const ChainState& state);
  long rows_written() const { return rows_; }
  void flush();

 private:
  struct Impl;
  Impl* impl_;
  long rows_ = 0;
};

std::string trace_meta_path(const std::string& trace_path);

// Flat key = value document, one pair per line, order preserved.
using KvDoc = std::vector<std::pair<std::string, std::string>>;

void write_trace_meta(const std::string& path, const TraceMeta& meta, long retained,
                      const KvDoc& extras = {});

// Reads a trace CSV back into memory; dimensions come from the metadata
// sidecar when present, from the header otherwise.
ChainTrace read_trace_csv(const std::string& path);

void write_kv(std::ostream& out, const KvDoc& doc);
void write_kv_file(const std::string& path, const KvDoc& doc);
KvDoc read_kv_file(const std::string& path);

void write_summary_csv(const std::string& path, const SummaryTable& table);
void write_summary_text(std::ostream& out, const SummaryTable& table);

std::string format_full(double x);  // shortest round-trip decimal

}  // namespace smnreg
