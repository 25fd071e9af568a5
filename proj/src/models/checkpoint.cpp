#include "rfcvnn/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace rfcvnn {

using nlohmann::json;

std::string checkpoint_to_string(const Model& model) {
  json doc;
  doc["format"] = "rfcvnn-checkpoint";
  doc["version"] = kCheckpointVersion;
  doc["kind"] = std::string(to_string(model.kind()));
  doc["num_classes"] = model.num_classes();
  doc["seed"] = model.seed();
  doc["ablation"] = model.ablation().name();
  doc["bn_variant"] = model.bn_variant() == ComplexBNVariant::kWhitening ? "whitening" : "naive";
  json params = json::array();
  for (const Parameter* p : model.parameters()) {
    params.push_back({{"name", p->name},
                      {"shape", p->tensor.shape()},
                      {"frozen_zero", p->frozen_zero},
                      {"values", std::vector<double>(p->tensor.values().begin(), p->tensor.values().end())}});
  }
  doc["parameters"] = std::move(params);
  json buffers = json::array();
  for (const Buffer& b : model.buffers()) buffers.push_back({{"name", b.name}, {"values", *b.values}});
  doc["buffers"] = std::move(buffers);
  return doc.dump();
}

Model checkpoint_from_string(const std::string& text) {
  const json doc = json::parse(text);
  if (doc.value("format", "") != "rfcvnn-checkpoint")
    throw std::runtime_error("not an rfcvnn checkpoint");
  if (doc.at("version").get<int>() != kCheckpointVersion)
    throw std::runtime_error("unsupported checkpoint version " + doc.at("version").dump());

  const ModelKind kind = parse_model_kind(doc.at("kind").get<std::string>());
  const auto k = doc.at("num_classes").get<std::size_t>();
  const auto seed = doc.at("seed").get<std::uint64_t>();
  const auto ablation = AblationConfig::parse(doc.at("ablation").get<std::string>());
  const auto variant =
      doc.value("bn_variant", "whitening") == "naive" ? ComplexBNVariant::kNaive : ComplexBNVariant::kWhitening;

  Model model = kind == ModelKind::kRvnn ? build_rvnn(k, seed) : build_cvnn(k, seed, variant);
  if (ablation.active()) model = apply_ablation(std::move(model), ablation);

  const auto params = model.parameters();
  const auto& saved = doc.at("parameters");
  if (saved.size() != params.size()) throw std::runtime_error("checkpoint parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& entry = saved[i];
    Parameter& p = *params[i];
    if (entry.at("name").get<std::string>() != p.name)
      throw std::runtime_error("checkpoint parameter '" + entry.at("name").get<std::string>() + "' where '" + p.name +
                               "' was expected");
    if (entry.at("shape").get<Shape>() != p.tensor.shape())
      throw std::runtime_error("checkpoint shape mismatch for " + p.name);
    const auto values = entry.at("values").get<std::vector<double>>();
    auto dst = p.tensor.mutable_values();
    if (values.size() != dst.size()) throw std::runtime_error("checkpoint value count mismatch for " + p.name);
    std::copy(values.begin(), values.end(), dst.begin());
  }
  const auto buffers = model.buffers();
  const auto& saved_buffers = doc.at("buffers");
  if (saved_buffers.size() != buffers.size()) throw std::runtime_error("checkpoint buffer count mismatch");
  for (std::size_t i = 0; i < buffers.size(); ++i) {
    if (saved_buffers[i].at("name").get<std::string>() != buffers[i].name)
      throw std::runtime_error("checkpoint buffer mismatch at " + buffers[i].name);
    auto values = saved_buffers[i].at("values").get<std::vector<double>>();
    if (values.size() != buffers[i].values->size())
      throw std::runtime_error("checkpoint buffer size mismatch for " + buffers[i].name);
    *buffers[i].values = std::move(values);
  }
  return model;
}

void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_string(model);
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_string(ss.str());
}

}  // namespace rfcvnn
