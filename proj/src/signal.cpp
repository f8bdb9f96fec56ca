#include "pnmn/signal.hpp"

#include <cmath>
#include <numbers>

#include "pnmn/constants.hpp"

namespace pnmn {

WindowPlan plan_windows(std::size_t n_samples, double sample_rate, double window_seconds,
                        double overlap_fraction) {
  if (!(sample_rate > 0.0) || !(window_seconds > 0.0)) throw Error("window: rate and length must be positive");
  if (!(overlap_fraction >= 0.0 && overlap_fraction < 1.0)) throw Error("window: overlap must lie in [0, 1)");
  WindowPlan plan;
  plan.window = static_cast<std::size_t>(std::lround(window_seconds * sample_rate));
  plan.hop = static_cast<std::size_t>(std::floor((1.0 - overlap_fraction) * window_seconds * sample_rate));
  if (plan.window == 0 || plan.hop == 0) throw Error("window: degenerate window or hop");
  if (n_samples < plan.window) {
    throw Error("recording of " + std::to_string(n_samples) + " samples is shorter than one window of " +
                std::to_string(plan.window));
  }
  plan.count = (n_samples - plan.window) / plan.hop + 1;
  return plan;
}

std::vector<Array> window_signal(const RawRecording& recording, double window_seconds, double overlap_fraction) {
  const WindowPlan plan = plan_windows(recording.length(), recording.sample_rate, window_seconds, overlap_fraction);
  const std::size_t channels = recording.channels();
  std::vector<Array> out;
  out.reserve(plan.count);
  for (std::size_t w = 0; w < plan.count; ++w) {
    Array seg = Array::matrix(channels, plan.window);
    const std::size_t start = w * plan.hop;
    for (std::size_t ch = 0; ch < channels; ++ch) {
      for (std::size_t i = 0; i < plan.window; ++i) seg(ch, i) = recording.signal(ch, start + i);
    }
    out.push_back(std::move(seg));
  }
  return out;
}

namespace {

struct TwiddleTable {
  std::size_t n = 0;
  std::vector<double> cos_table;
  std::vector<double> sin_table;
};

const TwiddleTable& twiddles(std::size_t n) {
  thread_local TwiddleTable table;
  if (table.n != n) {
    table.n = n;
    table.cos_table.resize(n);
    table.sin_table.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n);
      table.cos_table[j] = std::cos(angle);
      table.sin_table[j] = std::sin(angle);
    }
  }
  return table;
}

}  // namespace

std::vector<double> dft_magnitudes(std::span<const double> segment, std::size_t f_max) {
  const std::size_t n = segment.size();
  if (f_max >= n) throw Error("dft: f_max must be below the segment length");
  const TwiddleTable& t = twiddles(n);
  std::vector<double> out(f_max);
  for (std::size_t b = 1; b <= f_max; ++b) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += segment[i] * t.cos_table[idx];
      im -= segment[i] * t.sin_table[idx];
      idx += b;
      if (idx >= n) idx -= n;
    }
    out[b - 1] = std::hypot(re, im);
  }
  return out;
}

std::vector<double> fft_bands(std::span<const double> segment, double sample_rate, std::size_t f_max) {
  const auto expected = static_cast<std::size_t>(std::lround(sample_rate));
  if (segment.size() != expected) {
    throw Error("fft_bands: segment has " + std::to_string(segment.size()) + " samples, expected " +
                std::to_string(expected));
  }
  std::vector<double> mags = dft_magnitudes(segment, f_max);
  for (double& m : mags) m = std::log10(m + kLogFloor);
  return mags;
}

std::vector<Sample> preprocess(const RawRecording& recording) {
  if (recording.channels() != kChannels) {
    throw Error("recording '" + recording.id + "' has " + std::to_string(recording.channels()) +
                " channels, expected " + std::to_string(kChannels));
  }
  const std::vector<Array> windows = window_signal(recording);
  std::vector<Sample> out;
  out.reserve(windows.size());
  for (std::size_t w = 0; w < windows.size(); ++w) {
    Sample s;
    s.features = Array::matrix(kChannels, kBands);
    const Array& seg = windows[w];
    const std::size_t len = seg.cols();
    for (std::size_t ch = 0; ch < kChannels; ++ch) {
      const auto bands = fft_bands(seg.data().subspan(ch * len, len), recording.sample_rate, kBands);
      for (std::size_t b = 0; b < kBands; ++b) s.features(ch, b) = bands[b];
    }
    s.label = recording.label;
    s.recording_id = recording.id;
    s.patient_id = recording.patient_id;
    s.seizure_id = recording.seizure_id;
    s.window_index = w;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace pnmn
