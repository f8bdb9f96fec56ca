#pragma once

#include <filesystem>
#include <optional>

#include "json.hpp"
#include "pnmn/model.hpp"
#include "pnmn/train.hpp"

namespace pnmn {

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Model plus optional optimizer state as stored on disk.
///
/// <dir>/checkpoint.json holds the metadata and a blob table
/// {name, shape, offset, count}; <dir>/params.f32 holds the blobs as
/// contiguous float32 little-endian values.
struct Checkpoint {
  Model model;
  nlohmann::json metadata = nlohmann::json::object();
  std::optional<AdamState> adam;
};

void save_checkpoint(const std::filesystem::path& dir, const Model& model, const nlohmann::json& metadata,
                     const AdamState* adam = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace pnmn
