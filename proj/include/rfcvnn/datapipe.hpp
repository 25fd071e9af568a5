#pragma once

// Recordings, the split/partition/slice construction and input transforms.
//
// A transmission of n samples contributes P partitions, evenly spaced through
// its middle third [floor(n/3), 2 floor(n/3)). A partition is 1200 consecutive
// slice start points; slice i (1-based) covers samples [start+i-1, start+i+99),
// so a partition reads 1299 samples. Split P(m-1)+p is the union over all K
// devices of partition p of transmission m. Slices 1..1000 of every device
// train, 1001..1200 test.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfcvnn/errors.hpp"

namespace rfcvnn {

inline constexpr std::size_t kWindow = 100;
inline constexpr std::size_t kSlicesPerPartition = 1200;
inline constexpr std::size_t kPartitionSpan = kSlicesPerPartition + kWindow - 1;  // 1299
inline constexpr std::size_t kTrainSlicesPerDevice = 1000;
inline constexpr std::size_t kTestSlicesPerDevice = kSlicesPerPartition - kTrainSlicesPerDevice;

struct Recording {
  int device_id = 0;        // [0, K)
  int transmission_id = 1;  // [1, M]
  std::vector<std::complex<float>> samples;
  std::optional<double> sample_rate_hz;

  std::size_t sample_count() const { return samples.size(); }
};

/// Interleaved I,Q float32 little-endian data plus a JSON sidecar with
/// device_id, transmission_id, sample_count and optional sample_rate_hz.
Recording load_recording(const std::filesystem::path& data_path, const std::filesystem::path& meta_path);
void save_recording(const Recording& rec, const std::filesystem::path& data_path,
                    const std::filesystem::path& meta_path);

/// Conventional file names inside a data directory: dev003_tx2.iq / dev003_tx2.json
std::string recording_stem(int device_id, int transmission_id);

struct Slice {
  std::array<float, 2 * kWindow> window{};  // row 0 = I, row 1 = Q
  int device_id = 0;
  std::size_t slice_index = 1;  // [1, 1200]

  float i(std::size_t t) const { return window[t]; }
  float q(std::size_t t) const { return window[kWindow + t]; }
};

struct ScenarioSpec {
  std::string name = "custom";
  std::size_t k = 2;  // devices
  std::size_t m = 1;  // transmissions per device
  std::size_t p = 1;  // partitions per transmission

  std::size_t splits() const { return p * m; }

  static ScenarioSpec osu_indoor();
  static ScenarioSpec osu_outdoor();
  static ScenarioSpec ne_wired();
  static ScenarioSpec ne_anechoic();
  static ScenarioSpec custom(std::size_t k, std::size_t m, std::size_t p);
  /// Preset names: osu-indoor, osu-outdoor, ne-wired, ne-anechoic.
  static ScenarioSpec preset(std::string_view name);

  /// Name plus parameters, e.g. "custom-k5-m1-p10" or "ne-wired".
  std::string label() const;
};

/// P(m-1)+p for 1 <= m, 1 <= p <= P. Throws std::out_of_range otherwise.
std::size_t split_index(std::size_t m, std::size_t p, std::size_t partitions);

struct SplitCoords {
  std::size_t m;
  std::size_t p;
};
/// Inverse of split_index.
SplitCoords split_coords(std::size_t index, std::size_t partitions);

/// Smallest transmission length that supports `partitions` partitions.
std::size_t min_samples_for(std::size_t partitions);

/// P start offsets floor(n/3) + j floor(L/P), j = 0..P-1, L = floor(n/3).
/// Throws DataError when L < P * 1299.
std::vector<std::size_t> partition_starts(const Recording& rec, std::size_t partitions);

/// The 1200 stride-1 windows of a partition. Throws DataError when fewer than
/// 1299 samples remain from `start`.
std::vector<Slice> slice_partition(const Recording& rec, std::size_t start);

enum class Assignment : std::uint8_t { kTrain, kTest };

/// Contiguous temporal assignment: slices 1..1000 train, 1001..1200 test.
/// Throws std::out_of_range outside [1, 1200].
Assignment assignment_for(std::size_t slice_index);

struct DevicePartition {
  int device_id;
  std::size_t start_offset;
  std::string recording;  // file stem, empty when built in memory
};

struct Split {
  std::size_t split_index = 0;
  std::size_t transmission = 1;  // m
  std::size_t partition = 1;     // p
  std::vector<Slice> slices;     // device-major, slice_index ascending
  std::vector<Assignment> assignment;
  std::vector<DevicePartition> devices;

  std::size_t train_count() const;
  std::size_t test_count() const;
};

/// Union over every device of partition p of transmission m. `recordings`
/// must hold one recording per (device, m). Throws DataError on a missing
/// device or short recording and std::out_of_range on bad (m, p).
Split make_split(const ScenarioSpec& scenario, std::span<const Recording> recordings, std::size_t m,
                 std::size_t p);

enum class InputMode { kI, kQ, kIQ, kR, kT, kRT };
std::string_view to_string(InputMode mode);
InputMode parse_input_mode(std::string_view name);
inline constexpr std::array<InputMode, 6> kAllInputModes{InputMode::kIQ, InputMode::kI, InputMode::kQ,
                                                         InputMode::kRT, InputMode::kR, InputMode::kT};

/// 2x100 network input. IQ as is; RT = (sqrt(I^2+Q^2), atan2(Q, I)); single
/// component modes zero the other row.
std::array<double, 2 * kWindow> input_transform(const Slice& slice, InputMode mode);

// Split manifests: one JSON document per split, enough to rebuild its slices
// byte for byte from the recordings in a data directory.
struct SplitManifest {
  ScenarioSpec scenario;
  std::size_t split_index = 0;
  std::size_t transmission = 1;
  std::size_t partition = 1;
  std::vector<DevicePartition> devices;
};

SplitManifest manifest_of(const ScenarioSpec& scenario, const Split& split);
void save_manifest(const SplitManifest& manifest, const std::filesystem::path& path);
SplitManifest load_manifest(const std::filesystem::path& path);
std::string manifest_filename(std::size_t split_index);
/// All manifests under `dir`, ordered by split index.
std::vector<SplitManifest> load_manifests(const std::filesystem::path& dir);
/// Rebuilds the split by slicing the referenced recordings in `data_dir`.
Split split_from_manifest(const SplitManifest& manifest, const std::filesystem::path& data_dir);

}  // namespace rfcvnn
