#include "midas/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "midas/errors.hpp"
#include "midas/policy.hpp"

namespace midas {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_particle_dump(const ParticleStore& store, double scale,
                         std::ostream& out) {
  const int d = store.dim();
  out << "index";
  for (int j = 0; j < d; ++j) out << ",x_" << j;
  out << ",raw_weight,eff_weight,bandwidth\n";
  // Weight columns are normalized per dump (raw by the largest log weight,
  // eff to the exact selection probabilities) so heavy-tailed posteriors
  // whose absolute weights underflow stay representable. Ratios within a
  // dump and the multiplicative effect of the scale tag are exact.
  double max_log_w = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < store.size(); ++i) {
    max_log_w = std::max(max_log_w, store.log_weight(i));
  }
  if (!std::isfinite(max_log_w)) max_log_w = 0.0;
  const bool degenerate = store.total_mass() <= 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    out << (i + 1);
    for (const double c : store.position(i)) out << ',' << format_double(c);
    out << ','
        << format_double(scale * std::exp(store.log_weight(i) - max_log_w));
    out << ','
        << format_double(degenerate ? 0.0 : store.selection_probability(i));
    out << ',' << format_double(store.bandwidth(i));
    out << '\n';
  }
}

std::string particle_dump_string(const ParticleStore& store, double scale) {
  std::ostringstream os;
  write_particle_dump(store, scale, os);
  return os.str();
}

void write_particle_dump_file(const ParticleStore& store, double scale,
                              const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  write_particle_dump(store, scale, out);
  if (!out) throw io_error("write failed: " + path);
}

void write_sample_set_dump_file(const WeightedSampleSet& set,
                                const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  out << "index";
  for (int j = 0; j < set.dim; ++j) out << ",x_" << j;
  out << ",raw_weight,eff_weight,bandwidth\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    out << (i + 1);
    for (const double c : set.point(i)) out << ',' << format_double(c);
    const std::string w = format_double(set.weights[i]);
    out << ',' << w << ',' << w << ",0\n";
  }
  if (!out) throw io_error("write failed: " + path);
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
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

double parse_double_field(const std::string& field, std::size_t row) {
  double v = 0.0;
  const auto res =
      std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
    throw parse_error("not a number: '" + field + "'", row);
  return v;
}

}  // namespace

WeightedSampleSet read_particle_dump(const std::string& path,
                                     WeightKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw parse_error("empty dump", 0);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_row(line);
  // index,x_0..x_{d-1},raw_weight,eff_weight,bandwidth
  if (header.size() < 5 || header.front() != "index")
    throw parse_error("unrecognized dump header", 1);
  const int d = static_cast<int>(header.size()) - 4;
  for (int j = 0; j < d; ++j)
    if (header[static_cast<std::size_t>(j) + 1] != "x_" + std::to_string(j))
      throw parse_error("unrecognized dump header", 1);

  WeightedSampleSet set;
  set.dim = d;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != header.size())
      throw parse_error("wrong field count", row);
    for (int j = 0; j < d; ++j)
      set.points.push_back(
          parse_double_field(fields[static_cast<std::size_t>(j) + 1], row));
    const std::size_t w_col = static_cast<std::size_t>(d) +
                              (kind == WeightKind::kRaw ? 1 : 2);
    set.weights.push_back(parse_double_field(fields[w_col], row));
  }
  if (set.weights.empty()) throw parse_error("dump holds no particles", row);
  return set;
}

void write_matrix_csv(const std::vector<double>& rows, int dim,
                      const std::string& path) {
  if (dim < 1) throw std::invalid_argument("dim must be >= 1");
  if (rows.size() % static_cast<std::size_t>(dim) != 0)
    throw std::invalid_argument("flat matrix size not divisible by dim");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path);
  for (int j = 0; j < dim; ++j) out << (j ? "," : "") << "x_" << j;
  out << '\n';
  const std::size_t n = rows.size() / static_cast<std::size_t>(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) {
      if (j) out << ',';
      out << format_double(rows[i * static_cast<std::size_t>(dim) +
                                static_cast<std::size_t>(j)]);
    }
    out << '\n';
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace midas
