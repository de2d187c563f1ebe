#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "midas/sample_set.hpp"

namespace midas {

class ParticleStore;

// Shortest decimal string that round-trips the double exactly. All CSV
// output uses this, which is what makes rerun artifacts byte-identical.
std::string format_double(double v);

// Particle dump CSV: header `index,x_0..x_{d-1},raw_weight,eff_weight,
// bandwidth`, one row per particle, index 1-based. raw_weight is
// scale * exp(log w_i - max_j log w_j) and eff_weight is the particle's
// selection probability: each column is exact up to one common positive
// factor per dump (enough for every self-normalized consumer), and the
// normalization keeps posteriors with very negative log weights
// representable. The target's scale tag multiplies raw_weight exactly.
void write_particle_dump(const ParticleStore& store, double scale,
                         std::ostream& out);
std::string particle_dump_string(const ParticleStore& store, double scale);
void write_particle_dump_file(const ParticleStore& store, double scale,
                              const std::string& path);

// Dump CSV in the same schema for a generic weighted set (used for AIS
// output): raw_weight = eff_weight = the set's weight, bandwidth 0.
void write_sample_set_dump_file(const WeightedSampleSet& set,
                                const std::string& path);

// Reads a particle dump back into a weighted sample set; kind picks the
// raw_weight or eff_weight column. Malformed content raises parse_error.
WeightedSampleSet read_particle_dump(const std::string& path, WeightKind kind);

// Reference/sample matrix CSV with header x_0..x_{d-1}.
void write_matrix_csv(const std::vector<double>& rows, int dim,
                      const std::string& path);

}  // namespace midas
