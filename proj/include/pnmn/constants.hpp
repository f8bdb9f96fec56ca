#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace pnmn {

inline constexpr std::size_t kChannels = 20;
inline constexpr std::size_t kBands = 24;
inline constexpr std::size_t kClasses = 7;
inline constexpr double kSampleRate = 250.0;

/// Temporal central parasagittal montage, in sample row order.
inline constexpr std::array<std::string_view, kChannels> kMontage = {
    "FP1-F7", "F7-T3", "T3-T5", "T5-O1", "FP2-F8", "F8-T4", "T4-T6", "T6-O2", "T3-C3", "C3-CZ",
    "CZ-C4",  "C4-T4", "FP1-F3", "F3-C3", "C3-P3", "P3-O1", "FP2-F4", "F4-C4", "C4-P4", "P4-O2"};

inline constexpr std::array<std::string_view, kClasses> kClassNames = {"FNSZ", "GNSZ", "SPSZ", "CPSZ",
                                                                      "ABSZ", "TNSZ", "TCSZ"};

}  // namespace pnmn
