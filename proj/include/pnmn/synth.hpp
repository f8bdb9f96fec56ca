#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pnmn/constants.hpp"
#include "pnmn/signal.hpp"

namespace pnmn {

/// Signature of one synthetic class: a sum of oscillations weighted per
/// channel, plus white noise.
struct ClassSpec {
  std::string name;
  std::vector<double> center_hz;
  std::vector<double> topography;  // one weight per channel
  double amplitude = 1.0;
  double noise = 1.0;
  /// Each recording draws its oscillation frequencies uniformly within
  /// center +- jitter.
  double freq_jitter_hz = 0.0;
};

/// Windows per class in the seven-class seizure corpus the generator mimics.
inline constexpr std::array<double, kClasses> kReferenceWindowCounts = {292725, 137033, 6028, 132200,
                                                                        3087,   4888,   22524};
inline constexpr std::array<std::size_t, kClasses> kReferencePatients = {108, 44, 2, 34, 12, 2, 11};

/// Well-separated signatures: distinct frequencies and topographies.
std::vector<ClassSpec> default_class_specs();
/// Overlapping signatures: centers 1 Hz apart, shared topography, heavy noise.
std::vector<ClassSpec> hard_class_specs();

/// Per-class recording counts proportional to kReferenceWindowCounts with
/// about `target_windows` windows in total (each class gets at least one).
std::vector<std::size_t> proportional_counts(std::size_t target_windows, std::size_t windows_per_recording);

struct SynthOptions {
  double duration_seconds = 10.0;
  double sample_rate = 250.0;
};

/// Generates counts[c] recordings of class c. Bit-reproducible for a seed.
std::vector<RawRecording> synth_generate(const std::vector<ClassSpec>& specs, const std::vector<std::size_t>& counts,
                                         std::uint64_t seed, const SynthOptions& options = {});

}  // namespace pnmn
