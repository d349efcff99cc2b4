#pragma once
#include <stdexcept>
#include <string>

namespace dcl {

// Malformed or out-of-contract configuration input.  CLI maps this to exit code 2.
struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// A mathematical invariant that must hold by construction failed.  Exit code 3.
struct invariant_violation : std::runtime_error {
  explicit invariant_violation(const std::string& what) : std::runtime_error(what) {}
};

// A numerical safety monitor tripped (e.g. wavepacket mass reached the grid
// boundary), so results downstream would be untrustworthy.  Exit code 4.
struct numerical_guard : std::runtime_error {
  explicit numerical_guard(const std::string& what) : std::runtime_error(what) {}
};

} // namespace dcl
