#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "json.hpp"
#include "pnmn/train.hpp"

namespace pnmn {

nlohmann::json to_json(const EvalReport& report);

/// Writes report.json, confusion.csv and per_class.csv into dir.
void write_report(const std::filesystem::path& dir, const EvalReport& report);

/// epoch,loss rows.
void write_loss_curve(const std::filesystem::path& file, std::span<const double> curve);

/// id,label,PC1,PC2 rows; id is "<recording>:<window>".
void write_embeddings(const std::filesystem::path& file, const EmbeddingTable& table,
                      std::span<const Sample> samples);

/// Shortest decimal form that round-trips through a double.
std::string format_double(double v);

}  // namespace pnmn
