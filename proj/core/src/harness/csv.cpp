#include "imuon/harness/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include "imuon/errors.hpp"
#include "imuon/harness/config.hpp"

namespace imuon::harness {

namespace {

std::string num(double v) { return std::isnan(v) ? std::string() : format_double(v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto q = line.find(',', pos);
    out.push_back(line.substr(pos, q == std::string::npos ? std::string::npos : q - pos));
    if (q == std::string::npos) break;
    pos = q + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
  return out;
}

double parse_num(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nan("");
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw ParseError(line, "bad number '" + s + "'");
  return v;
}

std::optional<double> parse_opt(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  return parse_num(s, line);
}

std::uint64_t parse_uint(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(line, "bad integer '" + s + "'");
  }
  return v;
}

template <std::size_t N>
void expect_header(std::istream& in, const std::array<std::string_view, N>& cols) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing CSV header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != header_line(cols.data(), cols.size())) throw ParseError(1, "unexpected CSV header: " + line);
}

}  // namespace

std::string header_line(const std::string_view* cols, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ',';
    s += cols[i];
  }
  return s;
}

void write_trace_header(std::ostream& out) {
  out << header_line(kTraceColumns.data(), kTraceColumns.size()) << '\n';
}

void write_trace_rows(std::ostream& out, const std::string& run_id, const std::vector<TraceRecord>& rows) {
  for (const auto& r : rows) {
    out << run_id << ',' << r.step << ',' << num(r.loss) << ',' << num(r.grad_dual_norm) << ','
        << num(r.momentum_err_dual) << ',' << num(r.delta_measured) << ',' << num(r.gamma_k) << ','
        << num(r.alpha_k) << ',' << r.oracle_matmuls << ',' << to_string(r.status) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  expect_header(in, kTraceColumns);
  std::vector<TraceRow> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_row(line);
    if (f.size() != kTraceColumns.size()) throw ParseError(lineno, "expected 10 fields");
    TraceRow row;
    row.run_id = f[0];
    TraceRecord& r = row.record;
    r.step = static_cast<std::size_t>(parse_uint(f[1], lineno));
    r.loss = parse_num(f[2], lineno);
    r.grad_dual_norm = parse_num(f[3], lineno);
    r.momentum_err_dual = parse_opt(f[4], lineno);
    r.delta_measured = parse_opt(f[5], lineno);
    r.delta_used = r.delta_measured.value_or(0.0);
    r.gamma_k = f[6].empty() ? 0.0 : parse_num(f[6], lineno);
    r.alpha_k = parse_opt(f[7], lineno);
    r.oracle_matmuls = static_cast<std::size_t>(parse_uint(f[8], lineno));
    try {
      r.status = run_status_from_string(f[9]);
    } catch (const ParseError&) {
      throw ParseError(lineno, "unknown status '" + f[9] + "'");
    }
    out.push_back(std::move(row));
  }
  return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << header_line(kSweepColumns.data(), kSweepColumns.size()) << '\n';
  for (const auto& r : rows) {
    out << r.cell_id << ',' << format_double(r.gamma) << ',' << format_double(r.alpha) << ',' << r.oracle_iters
        << ',' << r.seed << ',' << num(r.final_loss) << ',' << num(r.min_grad_dual) << ',' << num(r.mean_delta)
        << ',' << to_string(r.status) << '\n';
  }
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  expect_header(in, kSweepColumns);
  std::vector<SweepRow> out;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_row(line);
    if (f.size() != kSweepColumns.size()) throw ParseError(lineno, "expected 9 fields");
    SweepRow r;
    r.cell_id = f[0];
    r.gamma = parse_num(f[1], lineno);
    r.alpha = parse_num(f[2], lineno);
    r.oracle_iters = static_cast<int>(parse_uint(f[3], lineno));
    r.seed = parse_uint(f[4], lineno);
    r.final_loss = parse_num(f[5], lineno);
    r.min_grad_dual = parse_num(f[6], lineno);
    r.mean_delta = parse_opt(f[7], lineno);
    try {
      r.status = run_status_from_string(f[8]);
    } catch (const ParseError&) {
      throw ParseError(lineno, "unknown status '" + f[8] + "'");
    }
    out.push_back(r);
  }
  return out;
}

void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << header_line(kAggregateColumns.data(), kAggregateColumns.size()) << '\n';
  for (const auto& r : rows) {
    out << r.cell_id << ',' << format_double(r.gamma) << ',' << format_double(r.alpha) << ',' << r.oracle_iters
        << ',' << num(r.median_final_loss) << ',' << num(r.median_min_grad_dual) << ','
        << num(r.median_mean_delta) << ',' << r.n_ok << ',' << r.n_seeds << '\n';
  }
}

}  // namespace imuon::harness
