#pragma once

#include <array>
#include <string>
#include <string_view>

namespace rfcvnn {

enum class AblationLayers { kNone, kL1, kL2, kL12 };
enum class AblationTarget { kConv, kOutput };  // C: conv filters, O: layer output
enum class AblationPart { kReal, kImag };

/// Which part of which component of which CVNN layer is held at zero.
/// Canonical names: "none" or "L{1|2|12}_{C|O}_{RE|IM}".
struct AblationConfig {
  AblationLayers layers = AblationLayers::kNone;
  AblationTarget target = AblationTarget::kConv;
  AblationPart part = AblationPart::kReal;

  static AblationConfig none() { return {}; }
  /// Throws std::invalid_argument on anything but a canonical name.
  static AblationConfig parse(std::string_view name);
  /// The twelve configurations, row-major over (L1, L2, L12) x (O_RE, O_IM, C_RE, C_IM).
  static std::array<AblationConfig, 12> all();

  bool active() const { return layers != AblationLayers::kNone; }
  /// layer is 1-based.
  bool covers_layer(int layer) const;
  std::string name() const;

  friend bool operator==(const AblationConfig& a, const AblationConfig& b) {
    if (!a.active() || !b.active()) return a.active() == b.active();
    return a.layers == b.layers && a.target == b.target && a.part == b.part;
  }
};

}  // namespace rfcvnn
