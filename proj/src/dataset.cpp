#include "pnmn/dataset.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "pnmn/constants.hpp"

namespace pnmn {

namespace fs = std::filesystem;
using nlohmann::json;

void append_f32le(std::string& bytes, std::span<const double> values) {
  const std::size_t start = bytes.size();
  bytes.resize(start + 4 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(values[i]));
    for (int b = 0; b < 4; ++b) bytes[start + 4 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
  }
}

std::vector<double> decode_f32le(std::string_view bytes) {
  if (bytes.size() % 4 != 0) throw DatasetError("f32le payload length is not a multiple of 4");
  std::vector<double> out(bytes.size() / 4);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + b])) << (8 * b);
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

void write_f32le(const fs::path& file, std::span<const double> values) {
  std::string bytes;
  append_f32le(bytes, values);
  std::ofstream os(file, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot write " + file.string());
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<double> read_f32le(const fs::path& file, std::size_t expected_count) {
  std::ifstream is(file, std::ios::binary);
  if (!is) throw DatasetError("cannot open " + file.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  const std::string bytes = ss.str();
  if (bytes.size() != 4 * expected_count) {
    throw DatasetError(file.string() + " holds " + std::to_string(bytes.size()) + " bytes, expected " +
                       std::to_string(4 * expected_count));
  }
  return decode_f32le(bytes);
}

namespace {

json montage_json() {
  json names = json::array();
  for (auto n : kMontage) names.push_back(std::string(n));
  return names;
}

void write_manifest(const fs::path& dir, const json& manifest) {
  std::ofstream os(dir / "manifest.json", std::ios::trunc);
  if (!os) throw Error("cannot write " + (dir / "manifest.json").string());
  os << manifest.dump(2) << "\n";
}

json read_manifest(const fs::path& dir, const std::string& format) {
  const fs::path path = dir / "manifest.json";
  std::ifstream is(path);
  if (!is) throw DatasetError("missing manifest " + path.string());
  json m;
  try {
    m = json::parse(is);
  } catch (const json::exception& e) {
    throw DatasetError("malformed manifest " + path.string() + ": " + e.what());
  }
  if (!m.is_object() || !m.contains("entries") || !m["entries"].is_array()) {
    throw DatasetError("manifest " + path.string() + " has no entries array");
  }
  if (m.value("format", std::string()) != format) {
    throw DatasetError("manifest " + path.string() + " is not a '" + format + "' dataset");
  }
  return m;
}

template <typename T>
T field(const json& entry, const char* key) {
  if (!entry.contains(key)) throw DatasetError(std::string("manifest entry missing '") + key + "'");
  try {
    return entry.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("manifest entry field '") + key + "': " + e.what());
  }
}

void check_entry_common(const json& e) {
  if (field<std::string>(e, "dtype") != "f32le") throw DatasetError("unsupported dtype in manifest");
  const int label = field<int>(e, "label");
  if (label < 0 || label >= static_cast<int>(kClasses)) throw DatasetError("label out of range in manifest");
}

}  // namespace

void write_raw_dataset(const fs::path& dir, const std::vector<RawRecording>& recordings) {
  fs::create_directories(dir);
  json entries = json::array();
  double rate = recordings.empty() ? kSampleRate : recordings.front().sample_rate;
  for (const auto& r : recordings) {
    if (r.sample_rate != rate) throw Error("write_raw_dataset: mixed sample rates");
    const std::string file = r.id + ".f32";
    write_f32le(dir / file, r.signal.data());
    entries.push_back({{"id", r.id},
                       {"label", r.label},
                       {"patient_id", r.patient_id},
                       {"seizure_id", r.seizure_id},
                       {"n_samples", r.length()},
                       {"dtype", "f32le"},
                       {"shape", {r.channels(), r.length()}},
                       {"file", file}});
  }
  write_manifest(dir, {{"format", "raw"}, {"sample_rate", rate}, {"channels", montage_json()}, {"entries", entries}});
}

std::vector<RawRecording> read_raw_dataset(const fs::path& dir) {
  const json m = read_manifest(dir, "raw");
  const double rate = m.contains("sample_rate") ? field<double>(m, "sample_rate") : kSampleRate;
  if (!(rate > 0.0)) throw DatasetError("sample_rate must be positive");
  std::vector<RawRecording> out;
  for (const auto& e : m["entries"]) {
    check_entry_common(e);
    const auto shape = field<std::vector<std::size_t>>(e, "shape");
    const auto n = field<std::size_t>(e, "n_samples");
    if (shape.size() != 2 || shape[0] != kChannels || shape[1] != n) {
      throw DatasetError("raw entry shape must be [20, n_samples]");
    }
    RawRecording r;
    r.id = field<std::string>(e, "id");
    r.label = field<int>(e, "label");
    r.patient_id = field<std::string>(e, "patient_id");
    r.seizure_id = e.value("seizure_id", std::string());
    r.sample_rate = rate;
    r.signal = Array({kChannels, n}, read_f32le(dir / field<std::string>(e, "file"), kChannels * n));
    out.push_back(std::move(r));
  }
  return out;
}

void write_feature_dataset(const fs::path& dir, const std::vector<Sample>& samples) {
  fs::create_directories(dir);
  json entries = json::array();
  std::size_t i = 0;
  while (i < samples.size()) {
    std::size_t j = i;
    std::vector<double> values;
    while (j < samples.size() && samples[j].recording_id == samples[i].recording_id) {
      if (samples[j].features.shape() != Shape{kChannels, kBands}) throw Error("write_feature_dataset: sample shape");
      if (samples[j].window_index != j - i) throw Error("write_feature_dataset: windows out of order");
      values.insert(values.end(), samples[j].features.values().begin(), samples[j].features.values().end());
      ++j;
    }
    const Sample& first = samples[i];
    const std::string file = first.recording_id + ".features.f32";
    write_f32le(dir / file, values);
    entries.push_back({{"id", first.recording_id},
                       {"label", first.label},
                       {"patient_id", first.patient_id},
                       {"seizure_id", first.seizure_id},
                       {"n_windows", j - i},
                       {"dtype", "f32le"},
                       {"shape", {j - i, kChannels, kBands}},
                       {"file", file}});
    i = j;
  }
  write_manifest(dir, {{"format", "features"}, {"channels", montage_json()}, {"bands", kBands}, {"entries", entries}});
}

std::vector<Sample> read_feature_dataset(const fs::path& dir) {
  const json m = read_manifest(dir, "features");
  std::vector<Sample> out;
  for (const auto& e : m["entries"]) {
    check_entry_common(e);
    const auto n = field<std::size_t>(e, "n_windows");
    const auto shape = field<std::vector<std::size_t>>(e, "shape");
    if (shape != std::vector<std::size_t>{n, kChannels, kBands}) {
      throw DatasetError("feature entry shape must be [n_windows, 20, 24]");
    }
    const auto values = read_f32le(dir / field<std::string>(e, "file"), n * kChannels * kBands);
    for (std::size_t w = 0; w < n; ++w) {
      Sample s;
      const auto begin = values.begin() + static_cast<std::ptrdiff_t>(w * kChannels * kBands);
      s.features = Array::checked({kChannels, kBands}, std::vector<double>(begin, begin + kChannels * kBands));
      s.label = field<int>(e, "label");
      s.recording_id = field<std::string>(e, "id");
      s.patient_id = field<std::string>(e, "patient_id");
      s.seizure_id = e.value("seizure_id", std::string());
      s.window_index = w;
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace pnmn
