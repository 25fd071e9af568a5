#include "rfcvnn/ablation.hpp"

#include <stdexcept>

namespace rfcvnn {

AblationConfig AblationConfig::parse(std::string_view name) {
  if (name == "none" || name == "NONE") return none();
  const auto bad = [&] { return std::invalid_argument("unknown ablation '" + std::string(name) + "'"); };

  const auto first = name.find('_');
  const auto second = first == std::string_view::npos ? first : name.find('_', first + 1);
  if (second == std::string_view::npos) throw bad();
  const std::string_view layer = name.substr(0, first);
  const std::string_view target = name.substr(first + 1, second - first - 1);
  const std::string_view part = name.substr(second + 1);

  AblationConfig cfg;
  if (layer == "L1") cfg.layers = AblationLayers::kL1;
  else if (layer == "L2") cfg.layers = AblationLayers::kL2;
  else if (layer == "L12") cfg.layers = AblationLayers::kL12;
  else throw bad();

  if (target == "C") cfg.target = AblationTarget::kConv;
  else if (target == "O") cfg.target = AblationTarget::kOutput;
  else throw bad();

  if (part == "RE") cfg.part = AblationPart::kReal;
  else if (part == "IM") cfg.part = AblationPart::kImag;
  else throw bad();
  return cfg;
}

std::array<AblationConfig, 12> AblationConfig::all() {
  std::array<AblationConfig, 12> out{};
  std::size_t i = 0;
  for (auto layers : {AblationLayers::kL1, AblationLayers::kL2, AblationLayers::kL12})
    for (auto target : {AblationTarget::kOutput, AblationTarget::kConv})
      for (auto part : {AblationPart::kReal, AblationPart::kImag}) out[i++] = {layers, target, part};
  return out;
}

bool AblationConfig::covers_layer(int layer) const {
  switch (layers) {
    case AblationLayers::kNone: return false;
    case AblationLayers::kL1: return layer == 1;
    case AblationLayers::kL2: return layer == 2;
    case AblationLayers::kL12: return layer == 1 || layer == 2;
  }
  return false;
}

std::string AblationConfig::name() const {
  if (!active()) return "none";
  std::string out;
  switch (layers) {
    case AblationLayers::kL1: out = "L1"; break;
    case AblationLayers::kL2: out = "L2"; break;
    case AblationLayers::kL12: out = "L12"; break;
    case AblationLayers::kNone: break;
  }
  out += target == AblationTarget::kConv ? "_C" : "_O";
  out += part == AblationPart::kReal ? "_RE" : "_IM";
  return out;
}

}  // namespace rfcvnn
