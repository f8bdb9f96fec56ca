#include "pnmn/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "pnmn/lstm.hpp"

namespace pnmn {

namespace {

std::vector<double> topography(std::initializer_list<std::size_t> hot, double base) {
  std::vector<double> t(kChannels, base);
  for (std::size_t ch : hot) t[ch] = 1.0;
  return t;
}

}  // namespace

std::vector<ClassSpec> default_class_specs() {
  return {
      {"FNSZ", {6.0}, topography({0, 1, 2, 3, 8}, 0.3), 1.0, 1.0, 0.0},
      {"GNSZ", {10.0}, topography({}, 1.0), 1.0, 1.0, 0.0},
      {"SPSZ", {14.0}, topography({4, 5, 6, 7, 11}, 0.3), 1.0, 1.0, 0.0},
      {"CPSZ", {4.0, 8.0}, topography({12, 13, 14, 15}, 0.3), 1.0, 1.0, 0.0},
      {"ABSZ", {3.0}, topography({0, 4, 12, 16}, 0.5), 1.0, 1.0, 0.0},
      {"TNSZ", {18.0}, topography({8, 9, 10, 11}, 0.3), 1.0, 1.0, 0.0},
      {"TCSZ", {12.0, 22.0}, topography({}, 1.0), 1.0, 1.0, 0.0},
  };
}

std::vector<ClassSpec> hard_class_specs() {
  std::vector<ClassSpec> specs;
  for (std::size_t c = 0; c < kClasses; ++c) {
    specs.push_back({std::string(kClassNames[c]), {8.0 + static_cast<double>(c)}, topography({}, 1.0), 1.0, 6.0,
                     0.5});
  }
  return specs;
}

std::vector<std::size_t> proportional_counts(std::size_t target_windows, std::size_t windows_per_recording) {
  if (windows_per_recording == 0) throw Error("proportional_counts: zero windows per recording");
  double total = 0.0;
  for (double v : kReferenceWindowCounts) total += v;
  const double recordings = static_cast<double>(target_windows) / static_cast<double>(windows_per_recording);
  std::vector<std::size_t> counts(kClasses);
  for (std::size_t c = 0; c < kClasses; ++c) {
    const double share = recordings * kReferenceWindowCounts[c] / total;
    counts[c] = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(share)));
  }
  return counts;
}

std::vector<RawRecording> synth_generate(const std::vector<ClassSpec>& specs, const std::vector<std::size_t>& counts,
                                         std::uint64_t seed, const SynthOptions& options) {
  if (specs.empty()) throw Error("synth_generate: no class specs");
  if (counts.size() != specs.size()) throw Error("synth_generate: one count per class spec required");
  const double fs = options.sample_rate;
  const auto n = static_cast<std::size_t>(std::lround(options.duration_seconds * fs));
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const auto& s = specs[c];
    if (counts[c] == 0) throw Error("synth_generate: class " + s.name + " has zero recordings");
    if (s.topography.size() != kChannels) throw Error("synth_generate: class " + s.name + " topography size");
    for (double f : s.center_hz) {
      if (!(f > 0.0 && f + s.freq_jitter_hz < 25.0)) {
        throw Error("synth_generate: class " + s.name + " frequency outside the retained bands");
      }
    }
    if (s.noise < 0.0 || s.amplitude < 0.0 || s.freq_jitter_hz < 0.0) {
      throw Error("synth_generate: class " + s.name + " has a negative level");
    }
  }

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<RawRecording> out;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const ClassSpec& spec = specs[c];
    const std::size_t patients =
        c < kReferencePatients.size() ? std::min(kReferencePatients[c], counts[c]) : counts[c];
    for (std::size_t r = 0; r < counts[c]; ++r) {
      RawRecording rec;
      rec.id = spec.name + "_" + std::to_string(r);
      rec.label = static_cast<int>(c);
      rec.sample_rate = fs;
      rec.patient_id = spec.name + "_p" + std::to_string(r % patients);
      rec.seizure_id = spec.name + "_s" + std::to_string(r);
      rec.signal = Array::matrix(kChannels, n);

      std::vector<double> freqs;
      for (double f : spec.center_hz) freqs.push_back(f + spec.freq_jitter_hz * (2.0 * unit(rng) - 1.0));
      for (std::size_t ch = 0; ch < kChannels; ++ch) {
        double* row = rec.signal.values().data() + ch * n;
        const double gain = spec.amplitude * spec.topography[ch];
        for (double f : freqs) {
          const double phase = 2.0 * std::numbers::pi * unit(rng);
          const double omega = 2.0 * std::numbers::pi * f / fs;
          for (std::size_t i = 0; i < n; ++i) row[i] += gain * std::sin(omega * static_cast<double>(i) + phase);
        }
        if (spec.noise > 0.0) {
          for (std::size_t i = 0; i < n; ++i) row[i] += spec.noise * gauss(rng);
        }
      }
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace pnmn
