#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbm/geometry.hpp"

namespace sbm::test {

/// Deterministic xorshift-based generator for property tests.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next() {
    state_ ^= state_ << 13;
    state_ ^= state_ >> 7;
    state_ ^= state_ << 17;
    return state_;
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * double(next() >> 11) / double(std::uint64_t(1) << 53);
  }

 private:
  std::uint64_t state_;
};

/// Writable scratch directory for fixture files, unique per test run.
std::string scratch_dir();

std::string write_ascii_cube_stl(const std::string& dir);
std::string write_binary_cube_stl(const std::string& dir);
std::string write_icosphere_stl(const std::string& dir, int subdivisions = 2);

}  // namespace sbm::test
