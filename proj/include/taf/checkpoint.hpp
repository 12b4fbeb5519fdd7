#pragma once

#include <string>

#include "taf/evolution.hpp"

namespace taf {

/// Bit-exact state checkpoints. Layout (all little-endian):
///   bytes 0..5   magic "TAFv1\0"
///   bytes 6..17  grid sizes nx, ny, ntheta as 3 x uint32
///   bytes 18..25 simulation time as float64
///   bytes 26..33 step counter as uint64
///   then nx*ny*ntheta float64 samples of f, x-fastest ordering.
/// load(save(state)) reproduces the state bit-exactly on any platform with
/// IEEE-754 doubles.

struct CheckpointError : std::runtime_error {
  explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace taf
