#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "incstab/loop.hpp"
#include "incstab/region.hpp"
#include "incstab/srg.hpp"

namespace incstab {

/// Deterministic plot of an SRG cloud and region primitives in the complex
/// plane. Cloud points and discs are <circle> elements; the unit-circle guide
/// is a <path>, so circles count only data. The view box is symmetric about
/// the real axis.
std::string SrgSvg(const SrgCloud& cloud, const Region& region, std::uint64_t seed,
                   const std::string& title = "");

/// Log-log plot of the arctan ratios with a slope -2/3 reference line.
std::string ArctanSvg(const std::vector<ArctanRow>& rows, std::uint64_t seed);

}  // namespace incstab
