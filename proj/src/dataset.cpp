#include "midas/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "midas/errors.hpp"
#include "midas/io.hpp"
#include "midas/rng.hpp"

namespace midas {

namespace {

double parse_field(std::string_view field, long row) {
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw parse_error("malformed numeric field '" + std::string(field) + "'",
                      row);
  return v;
}

int parse_label(std::string_view field, long row) {
  if (field == "-1") return -1;
  if (field == "0") return -1;
  if (field == "1" || field == "+1") return 1;
  throw parse_error("label token '" + std::string(field) +
                        "' outside {-1, 0, 1}",
                    row);
}

std::vector<std::string_view> split_csv_row(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

LabeledDataset load_labeled_csv(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open dataset file: " + path);
  LabeledDataset data;
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (row == 1 && header) continue;
    if (line.empty()) continue;
    const auto fields = split_csv_row(line);
    if (fields.size() < 2)
      throw parse_error("expected at least one feature and a label", row);
    const int nf = static_cast<int>(fields.size()) - 1;
    if (data.n_features == 0) {
      data.n_features = nf;
    } else if (nf != data.n_features) {
      throw parse_error("row has " + std::to_string(nf) + " features, expected " +
                            std::to_string(data.n_features),
                        row);
    }
    for (int c = 0; c < nf; ++c)
      data.features.push_back(parse_field(fields[c], row));
    data.labels.push_back(parse_label(fields.back(), row));
  }
  if (data.labels.empty()) throw parse_error("dataset file is empty", 0);
  return data;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(
    const LabeledDataset& full, std::size_t train_size,
    std::uint64_t split_seed) {
  if (train_size == 0 || train_size >= full.size())
    throw std::invalid_argument(
        "split_dataset: train_size must be in [1, N-1], got " +
        std::to_string(train_size) + " of " + std::to_string(full.size()));
  std::vector<std::size_t> order(full.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(split_seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_below(i + 1);
    std::swap(order[i], order[j]);
  }
  auto take = [&](std::size_t begin, std::size_t end) {
    LabeledDataset part;
    part.n_features = full.n_features;
    part.features.reserve((end - begin) *
                          static_cast<std::size_t>(full.n_features));
    part.labels.reserve(end - begin);
    for (std::size_t k = begin; k < end; ++k) {
      const auto r = full.row(order[k]);
      part.features.insert(part.features.end(), r.begin(), r.end());
      part.labels.push_back(full.labels[order[k]]);
    }
    return part;
  };
  return {take(0, train_size), take(train_size, full.size())};
}

std::pair<LabeledDataset, LabeledDataset> load_dataset(const std::string& path,
                                                       std::size_t train_size,
                                                       std::uint64_t split_seed,
                                                       bool header) {
  return split_dataset(load_labeled_csv(path, header), train_size, split_seed);
}

LabeledDataset make_waveform(std::size_t count, std::uint64_t seed) {
  if (count == 0)
    throw std::invalid_argument("make_waveform: count must be >= 1");
  // Triangular base waves over attributes i = 1..21, peaking at 7, 15, 11.
  auto wave = [](int peak, int i) {
    return std::fmax(6.0 - std::abs(i - peak), 0.0);
  };
  static constexpr int kPairs[3][2] = {{7, 15}, {7, 11}, {15, 11}};
  LabeledDataset data;
  data.n_features = 21;
  data.features.reserve(count * 21);
  data.labels.reserve(count);
  RngStream rng(seed);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t cls = rng.uniform_below(3);
    const double u = rng.uniform01();
    for (int i = 1; i <= 21; ++i) {
      const double base =
          u * wave(kPairs[cls][0], i) + (1.0 - u) * wave(kPairs[cls][1], i);
      data.features.push_back(base + rng.normal());
    }
    data.labels.push_back(cls == 0 ? -1 : 1);
  }
  return data;
}

void write_labeled_csv(const LabeledDataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write dataset file: " + path);
  for (std::size_t r = 0; r < data.size(); ++r) {
    const auto row = data.row(r);
    for (double v : row) out << format_double(v) << ',';
    out << data.labels[r] << '\n';
  }
  if (!out) throw io_error("failed while writing dataset file: " + path);
}

}  // namespace midas
