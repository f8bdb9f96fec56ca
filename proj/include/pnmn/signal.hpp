#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pnmn/array.hpp"

namespace pnmn {

/// Multi-channel recording: signal is [channels x n_samples].
struct RawRecording {
  std::string id;
  Array signal;
  double sample_rate = 250.0;
  int label = 0;
  std::string patient_id;
  std::string seizure_id;

  std::size_t channels() const { return signal.rows(); }
  std::size_t length() const { return signal.cols(); }
};

/// One window: features are [channels x bands] log-magnitudes.
struct Sample {
  Array features;
  int label = 0;
  std::string recording_id;
  std::string patient_id;
  std::string seizure_id;
  std::size_t window_index = 0;
};

struct WindowPlan {
  std::size_t window = 0;
  std::size_t hop = 0;
  std::size_t count = 0;
};

/// window = round(seconds * fs), hop = floor((1 - overlap) * seconds * fs),
/// count = floor((n - window) / hop) + 1. Throws if n < window.
WindowPlan plan_windows(std::size_t n_samples, double sample_rate, double window_seconds = 1.0,
                        double overlap_fraction = 0.75);

/// Per-window channel segments, each [channels x window].
std::vector<Array> window_signal(const RawRecording& recording, double window_seconds = 1.0,
                                 double overlap_fraction = 0.75);

inline constexpr double kLogFloor = 1e-8;

/// log10(|DFT bin b| + 1e-8) for b = 1..f_max of a one-second segment
/// (rectangular window, DC excluded). Requires segment length == fs.
std::vector<double> fft_bands(std::span<const double> segment, double sample_rate = 250.0,
                              std::size_t f_max = 24);

/// |DFT bin b| for b = 1..f_max without the log; used by fft_bands.
std::vector<double> dft_magnitudes(std::span<const double> segment, std::size_t f_max);

/// Windows every channel and maps each window to a [channels x 24] Sample
/// carrying the recording's label and provenance.
std::vector<Sample> preprocess(const RawRecording& recording);

}  // namespace pnmn
