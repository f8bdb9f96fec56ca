#include "pnmn/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pnmn/dataset.hpp"

namespace pnmn {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "pnmn-checkpoint";
constexpr int kVersion = 1;

json model_json(const ModelConfig& c) {
  return {{"kind", to_string(c.kind)}, {"input_dim", c.input_dim}, {"steps", c.steps}, {"k", c.k},
          {"l", c.slots},             {"classes", c.classes},     {"eta", c.eta},
          {"fixed_operand", to_string(c.fixed_operand)}};
}

ModelConfig model_from_json(const json& j) {
  ModelConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.steps = j.at("steps").get<std::size_t>();
  c.k = j.at("k").get<std::size_t>();
  c.slots = j.at("l").get<std::size_t>();
  c.classes = j.at("classes").get<std::size_t>();
  c.eta = j.at("eta").get<double>();
  c.fixed_operand = parse_fixed_operand(j.at("fixed_operand").get<std::string>());
  return c;
}

// Every stored array of a model, by name, in a fixed order.
template <typename ModelT, typename Fn>
void visit_blobs(ModelT& model, const Fn& fn) {
  model.for_each_param(fn);
  fn("normalizer.mean", model.normalizer.mean);
  fn("normalizer.scale", model.normalizer.scale);
  fn("state.memory", model.initial_memory.memory);
  if (model.controller_mode() == ControllerMode::kPlastic && model.has_memory()) {
    fn("state.hebb_input", model.initial_memory.hebb_input);
    fn("state.hebb_output", model.initial_memory.hebb_output);
    fn("state.hebb_update", model.initial_memory.hebb_update);
  }
}

}  // namespace

void save_checkpoint(const fs::path& dir, const Model& model, const json& metadata, const AdamState* adam) {
  fs::create_directories(dir);
  std::string bytes;
  json blobs = json::array();
  auto add = [&](const std::string& name, const Array& a) {
    blobs.push_back({{"name", name}, {"shape", a.shape()}, {"offset", bytes.size()}, {"count", a.size()}});
    append_f32le(bytes, a.data());
  };
  visit_blobs(model, [&](const std::string& name, const Array& a) { add(name, a); });
  if (adam) {
    model.for_each_param([&](const std::string& name, const Array& p) {
      auto m = adam->m.find(name);
      auto v = adam->v.find(name);
      add("adam.m." + name, m == adam->m.end() ? Array(p.shape()) : m->second);
      add("adam.v." + name, v == adam->v.end() ? Array(p.shape()) : v->second);
    });
  }
  json doc = {{"format", kFormat},
              {"version", kVersion},
              {"model", model_json(model.config)},
              {"metadata", metadata},
              {"blob_file", "params.f32"},
              {"blob_bytes", bytes.size()},
              {"blobs", blobs}};
  if (adam) doc["adam_t"] = adam->t;

  {
    std::ofstream os(dir / "params.f32", std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write " + (dir / "params.f32").string());
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream os(dir / "checkpoint.json", std::ios::trunc);
  if (!os) throw CheckpointError("cannot write " + (dir / "checkpoint.json").string());
  os << doc.dump(2) << "\n";
}

Checkpoint load_checkpoint(const fs::path& dir) {
  std::ifstream is(dir / "checkpoint.json");
  if (!is) throw CheckpointError("missing " + (dir / "checkpoint.json").string());
  json doc;
  try {
    doc = json::parse(is);
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint.json: ") + e.what());
  }
  try {
    if (doc.at("format") != kFormat || doc.at("version") != kVersion) {
      throw CheckpointError("unsupported checkpoint format");
    }
    Checkpoint ck;
    ck.model = Model::create(model_from_json(doc.at("model")), 0);
    ck.metadata = doc.value("metadata", json::object());

    std::ifstream bs(dir / doc.at("blob_file").get<std::string>(), std::ios::binary);
    if (!bs) throw CheckpointError("missing blob file");
    std::ostringstream ss;
    ss << bs.rdbuf();
    const std::string bytes = ss.str();
    if (bytes.size() != doc.at("blob_bytes").get<std::size_t>()) {
      throw CheckpointError("blob file holds " + std::to_string(bytes.size()) + " bytes, expected " +
                            doc.at("blob_bytes").dump());
    }

    std::map<std::string, Array> stored;
    for (const auto& b : doc.at("blobs")) {
      const auto shape = b.at("shape").get<Shape>();
      const auto offset = b.at("offset").get<std::size_t>();
      const auto count = b.at("count").get<std::size_t>();
      if (shape_size(shape) != count || offset + 4 * count > bytes.size()) {
        throw CheckpointError("blob '" + b.at("name").get<std::string>() + "' has inconsistent extent");
      }
      stored[b.at("name").get<std::string>()] =
          Array(shape, decode_f32le(std::string_view(bytes).substr(offset, 4 * count)));
    }
    auto take = [&](const std::string& name, Array& target) {
      auto it = stored.find(name);
      if (it == stored.end()) throw CheckpointError("checkpoint lacks blob '" + name + "'");
      if (it->second.shape() != target.shape()) {
        throw CheckpointError("blob '" + name + "' has shape " + to_string(it->second.shape()) + ", expected " +
                              to_string(target.shape()));
      }
      target = std::move(it->second);
    };
    visit_blobs(ck.model, take);
    if (doc.contains("adam_t")) {
      AdamState adam;
      adam.t = doc.at("adam_t").get<std::uint64_t>();
      ck.model.for_each_param([&](const std::string& name, Array& p) {
        Array m(p.shape()), v(p.shape());
        take("adam.m." + name, m);
        take("adam.v." + name, v);
        adam.m[name] = std::move(m);
        adam.v[name] = std::move(v);
      });
      ck.adam = std::move(adam);
    }
    return ck;
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint.json: ") + e.what());
  }
}

}  // namespace pnmn
