#pragma once

#include <string>
#include <vector>

#include "mkg/evolve.hpp"

namespace mkg {

// binary snapshot, documented byte-exact in docs/snapshot_format.md:
// "MKG1" magic, uint64 LE metadata length, JSON metadata, then 12 raw
// float64 LE arrays: phi_re, phi_im, pi_re, pi_im, a0..a3, adot0..adot3
void write_snapshot(const FieldState& s, const std::string& path);
FieldState read_snapshot(const std::string& path);

// snapshot files in a directory, sorted by name
std::vector<std::string> list_snapshots(const std::string& dir);

}  // namespace mkg
