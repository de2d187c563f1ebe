#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace midas {

// A binary classification dataset: row-major feature matrix plus labels in
// {-1, +1}.
struct LabeledDataset {
  int n_features = 0;
  std::vector<double> features;  // size() x n_features, row major
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(n_features),
            static_cast<std::size_t>(n_features)};
  }
};

// Reads a CSV of `n_features` decimal columns followed by one label token.
// Accepted label tokens: -1, 0, 1; 0 is mapped to -1 ({0,1} data). Malformed
// rows raise parse_error carrying the 1-based row number. header skips the
// first line.
LabeledDataset load_labeled_csv(const std::string& path, bool header = false);

// Deterministic shuffled split: Fisher-Yates over row indices driven by
// RngStream(split_seed), first train_size rows to train, rest to test.
// train_size >= dataset size raises std::invalid_argument.
std::pair<LabeledDataset, LabeledDataset> split_dataset(
    const LabeledDataset& full, std::size_t train_size,
    std::uint64_t split_seed);

// load_labeled_csv followed by split_dataset.
std::pair<LabeledDataset, LabeledDataset> load_dataset(const std::string& path,
                                                       std::size_t train_size,
                                                       std::uint64_t split_seed,
                                                       bool header = false);

// Synthetic 21-attribute waveform data: each row blends two of three
// triangular base waves with a uniform mixing coefficient and adds unit
// Gaussian noise per attribute. The three-way class is binarized as
// documented in the README: class 0 -> -1, classes 1 and 2 -> +1.
// Draw order per row: class (1 uniform), blend (1 uniform), 21 normals.
LabeledDataset make_waveform(std::size_t count, std::uint64_t seed);

// Writes a LabeledDataset in the CSV layout load_labeled_csv reads.
void write_labeled_csv(const LabeledDataset& data, const std::string& path);

}  // namespace midas
