#include "jamsim/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string_view>

namespace jamsim {

namespace {

std::vector<std::string_view> split_row(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

[[noreturn]] void bad_row(const std::string& origin, std::size_t line, const std::string& why) {
  throw TraceIoError(origin + ":" + std::to_string(line) + ": " + why);
}

double parse_double(std::string_view cell, const std::string& origin, std::size_t line, const char* column) {
  if (cell == "inf") return kInf;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    bad_row(origin, line, std::string("column '") + column + "': not a number: '" + std::string(cell) + "'");
  }
  return v;
}

int parse_int(std::string_view cell, const std::string& origin, std::size_t line, const char* column) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    bad_row(origin, line, std::string("column '") + column + "': not an integer: '" + std::string(cell) + "'");
  }
  return v;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void write_attempts_csv(std::ostream& out, const std::vector<Attempt>& attempts) {
  out << "time,edge_i,edge_j,outcome,D,u_new,clock_new\n";
  std::string row;
  for (const Attempt& a : attempts) {
    row.clear();
    row += format_double(a.time);
    row += ',';
    row += std::to_string(a.edge.i);
    row += ',';
    row += std::to_string(a.edge.j);
    row += a.outcome == Outcome::Success ? ",success," : ",jammed,";
    row += format_double(a.disagreement);
    row += ',';
    row += std::to_string(a.control);
    row += ',';
    row += format_double(a.clock);
    row += '\n';
    out << row;
  }
}

void write_samples_csv(std::ostream& out, const std::vector<StateSample>& samples, std::size_t n) {
  out << "time";
  for (std::size_t i = 0; i < n; ++i) out << ",x_" << i;
  out << '\n';
  for (const auto& s : samples) {
    out << format_double(s.time);
    for (double v : s.x) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_dos_patterns_csv(std::ostream& out, const std::map<Edge, DosSignal>& dos) {
  out << "edge_i,edge_j,h,tau\n";
  for (const auto& [e, s] : dos) {
    for (const auto& iv : s.intervals()) {
      out << e.i << ',' << e.j << ',' << format_double(iv.start) << ',' << format_double(iv.duration()) << '\n';
    }
  }
}

void write_fit_csv(std::ostream& out, const std::vector<LinkRow>& rows) {
  out << "edge_i,edge_j,duty_cycle,tau_f,tau_d,eta,kappa,alpha,phi,poc_ok\n";
  for (const auto& r : rows) {
    const auto& c = r.cert;
    out << r.edge.i << ',' << r.edge.j << ',' << format_double(c.duty_cycle) << ',' << format_double(c.params.tau_f)
        << ',' << format_double(c.params.tau_d) << ',' << format_double(c.params.eta) << ','
        << format_double(c.params.kappa) << ',' << format_double(c.poc.alpha) << ','
        << (c.poc.phi ? format_double(*c.poc.phi) : std::string("undefined")) << ','
        << (c.certified ? "true" : "false") << '\n';
  }
}

std::vector<Attempt> read_attempts_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) bad_row(origin, 1, "empty file");
  strip_cr(line);
  if (line != "time,edge_i,edge_j,outcome,D,u_new,clock_new") bad_row(origin, 1, "unexpected header '" + line + "'");
  std::vector<Attempt> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != 7) bad_row(origin, lineno, "expected 7 columns, found " + std::to_string(cells.size()));
    Attempt a;
    a.time = parse_double(cells[0], origin, lineno, "time");
    const int i = parse_int(cells[1], origin, lineno, "edge_i");
    const int j = parse_int(cells[2], origin, lineno, "edge_j");
    if (i >= j || i < 0) bad_row(origin, lineno, "edge endpoints must satisfy 0 <= edge_i < edge_j");
    a.edge = Edge(i, j);
    if (cells[3] == "success") {
      a.outcome = Outcome::Success;
    } else if (cells[3] == "jammed") {
      a.outcome = Outcome::Jammed;
    } else {
      bad_row(origin, lineno, "column 'outcome': expected success | jammed, got '" + std::string(cells[3]) + "'");
    }
    a.disagreement = parse_double(cells[4], origin, lineno, "D");
    a.control = parse_int(cells[5], origin, lineno, "u_new");
    if (a.control < -1 || a.control > 1) bad_row(origin, lineno, "column 'u_new': expected -1, 0 or 1");
    a.clock = parse_double(cells[6], origin, lineno, "clock_new");
    out.push_back(a);
  }
  return out;
}

std::vector<StateSample> read_samples_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line)) bad_row(origin, 1, "empty file");
  strip_cr(line);
  const auto header = split_row(line);
  if (header.size() < 2 || header[0] != "time") bad_row(origin, 1, "unexpected header '" + line + "'");
  const std::size_t n = header.size() - 1;
  std::vector<StateSample> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != n + 1) {
      bad_row(origin, lineno, "expected " + std::to_string(n + 1) + " columns, found " + std::to_string(cells.size()));
    }
    StateSample s;
    s.time = parse_double(cells[0], origin, lineno, "time");
    s.x.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) s.x.push_back(parse_double(cells[k], origin, lineno, "x"));
    out.push_back(std::move(s));
  }
  if (out.empty()) bad_row(origin, lineno, "no samples");
  return out;
}

Trace read_trace_dir(const std::filesystem::path& dir) {
  const auto attempts_path = dir / kAttemptsFile;
  const auto samples_path = dir / kSamplesFile;
  std::ifstream a(attempts_path);
  if (!a) throw TraceIoError(attempts_path.string() + ": cannot open");
  std::ifstream s(samples_path);
  if (!s) throw TraceIoError(samples_path.string() + ": cannot open");
  Trace t;
  t.attempts = read_attempts_csv(a, attempts_path.string());
  t.samples = read_samples_csv(s, samples_path.string());
  t.end_time = t.samples.back().time;
  return t;
}

}  // namespace jamsim
