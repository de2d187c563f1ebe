// Writes the synthetic waveform dataset as a labeled CSV (21 features and a
// +/-1 label per row) so external tooling can inspect the exact data a run
// trained on.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "midas/dataset.hpp"
#include "midas/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"waveform dataset generator"};
  std::size_t rows = 5000;
  std::uint64_t seed = 99;
  std::string out = "waveform.csv";
  app.add_option("--rows", rows, "number of rows");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--out", out, "output CSV path");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    midas::write_labeled_csv(midas::make_waveform(rows, seed), out);
  } catch (const midas::io_error& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << rows << " rows to " << out << "\n";
  return 0;
}
