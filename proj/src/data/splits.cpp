#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "rfcvnn/datapipe.hpp"

namespace rfcvnn {

ScenarioSpec ScenarioSpec::osu_indoor() { return {"osu-indoor", 25, 1, 50}; }
ScenarioSpec ScenarioSpec::osu_outdoor() { return {"osu-outdoor", 25, 1, 50}; }
ScenarioSpec ScenarioSpec::ne_wired() { return {"ne-wired", 20, 3, 50}; }
ScenarioSpec ScenarioSpec::ne_anechoic() { return {"ne-anechoic", 20, 3, 50}; }

ScenarioSpec ScenarioSpec::custom(std::size_t k, std::size_t m, std::size_t p) {
  if (k < 1 || m < 1 || p < 1) throw std::invalid_argument("scenario needs K, M, P >= 1");
  return {"custom", k, m, p};
}

ScenarioSpec ScenarioSpec::preset(std::string_view name) {
  if (name == "osu-indoor") return osu_indoor();
  if (name == "osu-outdoor") return osu_outdoor();
  if (name == "ne-wired") return ne_wired();
  if (name == "ne-anechoic") return ne_anechoic();
  throw std::invalid_argument("unknown scenario preset '" + std::string(name) + "'");
}

std::string ScenarioSpec::label() const {
  if (name != "custom") return name;
  return "custom-k" + std::to_string(k) + "-m" + std::to_string(m) + "-p" + std::to_string(p);
}

std::size_t split_index(std::size_t m, std::size_t p, std::size_t partitions) {
  if (m < 1 || p < 1 || p > partitions)
    throw std::out_of_range("split_index: need m >= 1 and 1 <= p <= P (m=" + std::to_string(m) +
                            ", p=" + std::to_string(p) + ", P=" + std::to_string(partitions) + ")");
  return partitions * (m - 1) + p;
}

SplitCoords split_coords(std::size_t index, std::size_t partitions) {
  if (index < 1 || partitions < 1) throw std::out_of_range("split_coords: index and P must be >= 1");
  return {(index - 1) / partitions + 1, (index - 1) % partitions + 1};
}

std::size_t min_samples_for(std::size_t partitions) { return 3 * partitions * kPartitionSpan; }

std::vector<std::size_t> partition_starts(const Recording& rec, std::size_t partitions) {
  if (partitions < 1) throw std::invalid_argument("partition_starts: P must be >= 1");
  const std::size_t third = rec.sample_count() / 3;
  const std::size_t needed = partitions * kPartitionSpan;
  if (third < needed)
    throw DataError("recording (device " + std::to_string(rec.device_id) + ", transmission " +
                    std::to_string(rec.transmission_id) + ") is too short: middle third has " + std::to_string(third) +
                    " samples, " + std::to_string(partitions) + " partitions need " + std::to_string(needed) +
                    " (short by " + std::to_string(needed - third) + ")");
  const std::size_t spacing = third / partitions;
  std::vector<std::size_t> starts(partitions);
  for (std::size_t j = 0; j < partitions; ++j) starts[j] = third + j * spacing;
  return starts;
}

std::vector<Slice> slice_partition(const Recording& rec, std::size_t start) {
  if (start > rec.sample_count() || rec.sample_count() - start < kPartitionSpan)
    throw DataError("partition at offset " + std::to_string(start) + " of device " + std::to_string(rec.device_id) +
                    " transmission " + std::to_string(rec.transmission_id) + " needs " +
                    std::to_string(kPartitionSpan) + " samples, recording has " + std::to_string(rec.sample_count()));
  std::vector<Slice> out(kSlicesPerPartition);
  for (std::size_t s = 0; s < kSlicesPerPartition; ++s) {
    Slice& sl = out[s];
    sl.device_id = rec.device_id;
    sl.slice_index = s + 1;
    const auto* src = rec.samples.data() + start + s;
    for (std::size_t t = 0; t < kWindow; ++t) {
      sl.window[t] = src[t].real();
      sl.window[kWindow + t] = src[t].imag();
    }
  }
  return out;
}

Assignment assignment_for(std::size_t slice_index) {
  if (slice_index < 1 || slice_index > kSlicesPerPartition)
    throw std::out_of_range("slice index " + std::to_string(slice_index) + " outside [1, 1200]");
  return slice_index <= kTrainSlicesPerDevice ? Assignment::kTrain : Assignment::kTest;
}

std::size_t Split::train_count() const {
  std::size_t n = 0;
  for (Assignment a : assignment) n += a == Assignment::kTrain;
  return n;
}

std::size_t Split::test_count() const { return assignment.size() - train_count(); }

Split make_split(const ScenarioSpec& scenario, std::span<const Recording> recordings, std::size_t m, std::size_t p) {
  if (m < 1 || m > scenario.m)
    throw std::out_of_range("transmission " + std::to_string(m) + " outside [1," + std::to_string(scenario.m) +
                            "] for scenario " + scenario.label());
  Split split;
  split.split_index = split_index(m, p, scenario.p);
  split.transmission = m;
  split.partition = p;
  split.slices.reserve(scenario.k * kSlicesPerPartition);
  for (std::size_t d = 0; d < scenario.k; ++d) {
    const Recording* rec = nullptr;
    for (const auto& r : recordings)
      if (r.device_id == static_cast<int>(d) && r.transmission_id == static_cast<int>(m)) rec = &r;
    if (!rec)
      throw DataError("no recording for device " + std::to_string(d) + " transmission " + std::to_string(m));
    const std::size_t start = partition_starts(*rec, scenario.p)[p - 1];
    split.devices.push_back({static_cast<int>(d), start, recording_stem(static_cast<int>(d), static_cast<int>(m))});
    for (auto& s : slice_partition(*rec, start)) {
      split.assignment.push_back(assignment_for(s.slice_index));
      split.slices.push_back(std::move(s));
    }
  }
  return split;
}

std::string_view to_string(InputMode mode) {
  switch (mode) {
    case InputMode::kI: return "I";
    case InputMode::kQ: return "Q";
    case InputMode::kIQ: return "IQ";
    case InputMode::kR: return "R";
    case InputMode::kT: return "T";
    case InputMode::kRT: return "RT";
  }
  return "?";
}

InputMode parse_input_mode(std::string_view name) {
  std::string up(name);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (InputMode m : kAllInputModes)
    if (to_string(m) == up) return m;
  throw std::invalid_argument("unknown input mode '" + std::string(name) + "' (expected i, q, iq, r, t or rt)");
}

std::array<double, 2 * kWindow> input_transform(const Slice& slice, InputMode mode) {
  std::array<double, 2 * kWindow> out{};
  const bool polar = mode == InputMode::kR || mode == InputMode::kT || mode == InputMode::kRT;
  const bool keep_first = mode == InputMode::kI || mode == InputMode::kIQ || mode == InputMode::kR ||
                          mode == InputMode::kRT;
  const bool keep_second = mode == InputMode::kQ || mode == InputMode::kIQ || mode == InputMode::kT ||
                           mode == InputMode::kRT;
  for (std::size_t t = 0; t < kWindow; ++t) {
    const double i = slice.i(t);
    const double q = slice.q(t);
    const double first = polar ? std::hypot(i, q) : i;
    double second = q;
    if (polar) {
      second = std::atan2(q, i);
      if (second <= -std::numbers::pi) second = std::numbers::pi;  // keep T in (-pi, pi]
    }
    out[t] = keep_first ? first : 0.0;
    out[kWindow + t] = keep_second ? second : 0.0;
  }
  return out;
}

}  // namespace rfcvnn
