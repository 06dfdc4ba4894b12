#include "amrl/core.hpp"

#include <limits>
#include <string>

namespace amrl {

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) {
    throw IndexError("uniform_index over an empty range");
  }
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Largest multiple of bound that fits; reject draws above it.
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x = engine_();
  while (x >= limit) {
    x = engine_();
  }
  return static_cast<std::size_t>(x % bound);
}

std::size_t action_pair_index(std::size_t action, bool measure, std::size_t num_actions) {
  if (action >= num_actions) {
    throw IndexError("action " + std::to_string(action) + " out of range for " +
                     std::to_string(num_actions) + " actions");
  }
  return measure ? action : num_actions + action;
}

ActionPair action_pair_from_index(std::size_t index, std::size_t num_actions) {
  if (index >= 2 * num_actions) {
    throw IndexError("action-pair index " + std::to_string(index) + " out of range");
  }
  if (index < num_actions) {
    return {index, true};
  }
  return {index - num_actions, false};
}

}  // namespace amrl
