#pragma once

#include "taxrewire/taxonomy.hpp"

namespace fixtures {

// Root 10 with internal children 11 and 12; leaves 3..5 under 11, 6..8
// under 12.
inline constexpr taxrewire::NodeId A = 10;
inline constexpr taxrewire::NodeId B = 11;
inline constexpr taxrewire::NodeId C = 12;

inline taxrewire::Taxonomy two_branch_tree()
{
    return taxrewire::parse_taxonomy("10 11\n10 12\n11 3\n11 4\n11 5\n12 6\n12 7\n12 8\n");
}

} // namespace fixtures
