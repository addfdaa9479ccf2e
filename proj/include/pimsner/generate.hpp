#pragma once

#include <cstdint>

#include "pimsner/instance.hpp"

namespace pimsner {

/// Seeded random instance with every suite section. B has at most two blocks
/// of size <= 3, dim H <= 12, and the truncation is 3 or 4 depending on size.
Json generate_instance(std::uint64_t seed);

}  // namespace pimsner
