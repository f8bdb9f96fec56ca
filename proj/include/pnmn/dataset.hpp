#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pnmn/signal.hpp"

namespace pnmn {

/// Malformed or inconsistent dataset directory.
class DatasetError : public Error {
 public:
  explicit DatasetError(const std::string& what) : Error(what) {}
};

// A dataset directory holds manifest.json plus one raw float32 little-endian
// file per entry.
//
//   {"format": "raw", "sample_rate": 250, "channels": [...],
//    "entries": [{"id", "label", "patient_id", "seizure_id", "n_samples",
//                 "dtype": "f32le", "shape": [20, n_samples], "file"}]}
//
//   {"format": "features", "channels": [...], "bands": 24,
//    "entries": [{"id", "label", "patient_id", "seizure_id", "n_windows",
//                 "dtype": "f32le", "shape": [n_windows, 20, 24], "file"}]}

void write_raw_dataset(const std::filesystem::path& dir, const std::vector<RawRecording>& recordings);
std::vector<RawRecording> read_raw_dataset(const std::filesystem::path& dir);

/// Samples must be grouped by recording_id, windows in order.
void write_feature_dataset(const std::filesystem::path& dir, const std::vector<Sample>& samples);
std::vector<Sample> read_feature_dataset(const std::filesystem::path& dir);

/// Little-endian float32 (de)serialization shared with checkpoints.
void write_f32le(const std::filesystem::path& file, std::span<const double> values);
std::vector<double> read_f32le(const std::filesystem::path& file, std::size_t expected_count);
void append_f32le(std::string& bytes, std::span<const double> values);
std::vector<double> decode_f32le(std::string_view bytes);

}  // namespace pnmn
