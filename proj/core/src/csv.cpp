#include "hbdn/csv.hpp"

#include "hbdn/error.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace hbdn {

namespace {

double parse_field(const std::string& tok, int line_no) {
  if (tok == "nan" || tok == "-nan") return std::numeric_limits<double>::quiet_NaN();
  if (tok == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorKind::ParseError,
              "trace line " + std::to_string(line_no) + ": bad field '" + tok + "'");
}

}  // namespace

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  const auto flags = out.flags();
  const auto precision = out.precision();
  out << std::setprecision(17);
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    const auto& e = r.errors;
    out << r.round << ',' << e.consensus << ',' << e.tracking << ',';
    if (e.has_optimality()) {
      out << e.optimality;
    } else {
      out << "nan";
    }
    out << ',' << e.momentum << ',' << r.f_value << ',' << r.grad_norm << '\n';
  }
  out.flags(flags);
  out.precision(precision);
}

void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  write_trace_csv(out, trace);
}

RunTrace read_trace_csv(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw Error(ErrorKind::ParseError, "empty trace file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kTraceHeader) throw Error(ErrorKind::ParseError, "trace line 1: unexpected header");

  RunTrace trace;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(tok);
    if (fields.size() != 7) {
      throw Error(ErrorKind::ParseError,
                  "trace line " + std::to_string(line_no) + ": expected 7 fields");
    }
    RoundRecord r;
    r.round = static_cast<int>(parse_field(fields[0], line_no));
    r.errors.consensus = parse_field(fields[1], line_no);
    r.errors.tracking = parse_field(fields[2], line_no);
    r.errors.optimality = parse_field(fields[3], line_no);
    r.errors.momentum = parse_field(fields[4], line_no);
    r.f_value = parse_field(fields[5], line_no);
    r.grad_norm = parse_field(fields[6], line_no);
    trace.records.push_back(r);
  }
  return trace;
}

RunTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return read_trace_csv(in);
}

std::vector<double> error_norms(const RunTrace& trace) {
  std::vector<double> out;
  out.reserve(trace.size());
  for (const auto& r : trace.records) out.push_back(r.errors.norm());
  return out;
}

}  // namespace hbdn
