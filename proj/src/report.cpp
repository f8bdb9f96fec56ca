#include "pnmn/report.hpp"

#include <charconv>
#include <fstream>

#include "pnmn/constants.hpp"

namespace pnmn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream os(file, std::ios::trunc);
  if (!os) throw Error("cannot write " + file.string());
  return os;
}

std::string class_name(std::size_t c) {
  return c < kClassNames.size() ? std::string(kClassNames[c]) : "class" + std::to_string(c);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, end);
}

json to_json(const EvalReport& report) {
  json folds = json::array();
  for (const auto& f : report.folds) {
    folds.push_back({{"fold", f.fold},
                     {"weighted_f1", f.weighted_f1},
                     {"accuracy", f.accuracy},
                     {"n_test", f.test_indices.size()},
                     {"loss_curve", f.loss_curve}});
  }
  json per_class = json::array();
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    per_class.push_back({{"class", class_name(c)},
                         {"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support}});
  }
  json confusion = json::array();
  for (std::size_t r = 0; r < report.confusion.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < report.confusion.cols(); ++c) row.push_back(report.confusion(r, c));
    confusion.push_back(row);
  }
  return {{"model", report.model},
          {"mean_weighted_f1", report.mean_weighted_f1},
          {"folds", folds},
          {"per_class", per_class},
          {"confusion", confusion}};
}

void write_report(const fs::path& dir, const EvalReport& report) {
  fs::create_directories(dir);
  open_out(dir / "report.json") << to_json(report).dump(2) << "\n";

  auto cm = open_out(dir / "confusion.csv");
  cm << "true\\pred";
  for (std::size_t c = 0; c < report.confusion.cols(); ++c) cm << "," << class_name(c);
  cm << "\n";
  for (std::size_t r = 0; r < report.confusion.rows(); ++r) {
    cm << class_name(r);
    for (std::size_t c = 0; c < report.confusion.cols(); ++c) cm << "," << format_double(report.confusion(r, c));
    cm << "\n";
  }

  auto pc = open_out(dir / "per_class.csv");
  pc << "class,precision,recall,f1,support\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    pc << class_name(c) << "," << format_double(m.precision) << "," << format_double(m.recall) << ","
       << format_double(m.f1) << "," << m.support << "\n";
  }
}

void write_loss_curve(const fs::path& file, std::span<const double> curve) {
  auto os = open_out(file);
  os << "epoch,loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) os << i + 1 << "," << format_double(curve[i]) << "\n";
}

void write_embeddings(const fs::path& file, const EmbeddingTable& table, std::span<const Sample> samples) {
  auto os = open_out(file);
  os << "id,label,PC1,PC2\n";
  for (const auto& r : table.rows) {
    const Sample& s = samples[r.sample];
    os << s.recording_id << ":" << s.window_index << "," << class_name(static_cast<std::size_t>(r.label)) << ","
       << format_double(r.pc1) << "," << format_double(r.pc2) << "\n";
  }
}

}  // namespace pnmn
