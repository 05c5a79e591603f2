#include "smnreg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace smnreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& field, const std::string& path, long line) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (ec != std::errc() || ptr != t.data() + t.size())
    throw std::runtime_error(path + ":" + std::to_string(line) + ": malformed number '" + t + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

MatrixXd load_matrix_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (header && lineno == 1) continue;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path, lineno));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const MatrixXd& m) {
  auto out = open_for_write(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_full(m(i, j));
    }
    out << '\n';
  }
}

namespace {

std::string trace_header(int p, int d) {
  std::string h = "iter";
  for (int r = 1; r <= p; ++r)
    for (int c = 1; c <= d; ++c)
      h += ",beta_" + std::to_string(r) + "_" + std::to_string(c);
  for (int c = 1; c <= d; ++c)
    for (int r = c; r <= d; ++r)
      h += ",sigma_" + std::to_string(r) + "_" + std::to_string(c);
  return h;
}

void append_trace_row(std::ostream& out, long iteration, const ChainState& state) {
  out << iteration;
  const Index p = state.beta.rows(), d = state.beta.cols();
  for (Index r = 0; r < p; ++r)
    for (Index c = 0; c < d; ++c) out << ',' << format_full(state.beta(r, c));
  for (Index c = 0; c < d; ++c)
    for (Index r = c; r < d; ++r) out << ',' << format_full(state.sigma(r, c));
  out << '\n';
}

}  // namespace

void write_trace_csv(const std::string& path, const ChainTrace& trace) {
  TraceWriter writer(path, trace.meta.p, trace.meta.d);
  for (std::size_t t = 0; t < trace.states.size(); ++t)
    writer.append(trace.iteration_index[t], trace.states[t]);
}

struct TraceWriter::Impl {
  std::ofstream out;
};

TraceWriter::TraceWriter(const std::string& path, int p, int d)
    : impl_(new Impl{open_for_write(path)}) {
  impl_->out << trace_header(p, d) << '\n';
}

TraceWriter::~TraceWriter() { delete impl_; }

void TraceWriter::append(long iteration, const ChainState& state) {
  append_trace_row(impl_->out, iteration, state);
  ++rows_;
}

void TraceWriter::flush() { impl_->out.flush(); }

std::string trace_meta_path(const std::string& trace_path) {
  const auto dot = trace_path.rfind(".csv");
  if (dot != std::string::npos && dot == trace_path.size() - 4)
    return trace_path.substr(0, dot) + ".meta.txt";
  return trace_path + ".meta.txt";
}

void write_trace_meta(const std::string& path, const TraceMeta& meta, long retained,
                      const KvDoc& extras) {
  KvDoc doc{{"n", std::to_string(meta.n)},
            {"p", std::to_string(meta.p)},
            {"d", std::to_string(meta.d)},
            {"a", format_full(meta.a)},
            {"mixing", meta.mixing},
            {"seed", std::to_string(meta.seed)},
            {"iters", std::to_string(meta.iters)},
            {"burnin", std::to_string(meta.burn_in)},
            {"thin", std::to_string(meta.thin)},
            {"retained", std::to_string(retained)}};
  doc.insert(doc.end(), extras.begin(), extras.end());
  write_kv_file(path, doc);
}

ChainTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string header;
  if (!std::getline(in, header) || trim(header).empty())
    throw std::runtime_error(path + ": missing trace header");
  const auto names = split_csv(header);
  if (names.empty() || trim(names[0]) != "iter")
    throw std::runtime_error(path + ": not a trace file (first column must be 'iter')");

  int p = 0, d = 0;
  for (const auto& raw : names) {
    const std::string name = trim(raw);
    int r = 0, c = 0;
    if (std::sscanf(name.c_str(), "beta_%d_%d", &r, &c) == 2) {
      p = std::max(p, r);
      d = std::max(d, c);
    }
  }

  ChainTrace trace;
  const std::string meta_path = trace_meta_path(path);
  if (std::ifstream(meta_path).good()) {
    for (const auto& [key, value] : read_kv_file(meta_path)) {
      if (key == "n") trace.meta.n = std::stoi(value);
      else if (key == "p") trace.meta.p = std::stoi(value);
      else if (key == "d") trace.meta.d = std::stoi(value);
      else if (key == "a") trace.meta.a = std::stod(value);
      else if (key == "mixing") trace.meta.mixing = value;
      else if (key == "seed") trace.meta.seed = std::stoull(value);
      else if (key == "iters") trace.meta.iters = std::stol(value);
      else if (key == "burnin") trace.meta.burn_in = std::stol(value);
      else if (key == "thin") trace.meta.thin = std::stol(value);
    }
    if (trace.meta.p > 0) p = trace.meta.p;
    if (trace.meta.d > 0) d = trace.meta.d;
  } else {
    trace.meta.p = p;
    trace.meta.d = d;
  }
  if (p < 1 || d < 1)
    throw std::runtime_error(path + ": cannot determine trace dimensions");
  const std::size_t expected = 1 + static_cast<std::size_t>(p) * d +
                               static_cast<std::size_t>(d) * (d + 1) / 2;
  if (names.size() != expected)
    throw std::runtime_error(path + ": trace column count does not match dimensions");

  std::string line;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != expected)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": inconsistent column count");
    std::size_t idx = 0;
    const long iter = static_cast<long>(parse_double(fields[idx++], path, lineno));
    ChainState state{MatrixXd(p, d), MatrixXd(d, d)};
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < d; ++c) state.beta(r, c) = parse_double(fields[idx++], path, lineno);
    for (int c = 0; c < d; ++c)
      for (int r = c; r < d; ++r) {
        const double v = parse_double(fields[idx++], path, lineno);
        state.sigma(r, c) = v;
        state.sigma(c, r) = v;
      }
    trace.states.push_back(std::move(state));
    trace.iteration_index.push_back(iter);
  }
  return trace;
}

void write_kv(std::ostream& out, const KvDoc& doc) {
  for (const auto& [key, value] : doc) out << key << " = " << value << '\n';
}

void write_kv_file(const std::string& path, const KvDoc& doc) {
  auto out = open_for_write(path);
  write_kv(out, doc);
}

KvDoc read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  KvDoc doc;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    doc.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return doc;
}

void write_summary_csv(const std::string& path, const SummaryTable& table) {
  auto out = open_for_write(path);
  out << "parameter,mean,sd,se_batch_means,ess";
  for (int lag : table.acf_lags) out << ",acf_" << lag;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.name << ',' << format_full(row.mean) << ',' << format_full(row.sd) << ','
        << format_full(row.se) << ',' << format_full(row.ess);
    for (double v : row.acf) out << ',' << format_full(v);
    out << '\n';
  }
}

void write_summary_text(std::ostream& out, const SummaryTable& table) {
  std::vector<std::string> headers{"parameter", "mean", "sd", "se(bm)", "ess"};
  for (int lag : table.acf_lags) headers.push_back("acf" + std::to_string(lag));

  auto fmt = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return std::string(buf);
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& row : table.rows) {
    std::vector<std::string> line{row.name, fmt(row.mean), fmt(row.sd),
                                  row.se_defined ? fmt(row.se) : "n/a", fmt(row.ess)};
    for (double v : row.acf) line.push_back(fmt(v));
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t j = 0; j < headers.size(); ++j) {
    width[j] = headers[j].size();
    for (const auto& line : cells) width[j] = std::max(width[j], line[j].size());
  }
  auto emit = [&](const std::vector<std::string>& line) {
    for (std::size_t j = 0; j < line.size(); ++j) {
      if (j) out << "  ";
      out << line[j];
      for (std::size_t k = line[j].size(); k < width[j]; ++k) out << ' ';
    }
    out << '\n';
  };
  emit(headers);
  for (const auto& line : cells) emit(line);
}

}  // namespace smnreg
