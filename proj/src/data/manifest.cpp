#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "rfcvnn/datapipe.hpp"

namespace rfcvnn {

using nlohmann::json;

namespace {

constexpr const char* kManifestFormat = "rfcvnn-split-manifest";
constexpr int kManifestVersion = 1;

}  // namespace

std::string manifest_filename(std::size_t split_index) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "split_%04zu.json", split_index);
  return buf;
}

SplitManifest manifest_of(const ScenarioSpec& scenario, const Split& split) {
  return {scenario, split.split_index, split.transmission, split.partition, split.devices};
}

void save_manifest(const SplitManifest& m, const std::filesystem::path& path) {
  json entries = json::array();
  for (const auto& d : m.devices)
    entries.push_back({{"device_id", d.device_id},
                       {"recording", d.recording},
                       {"start_offset", d.start_offset},
                       {"train_range", {1, kTrainSlicesPerDevice}},
                       {"test_range", {kTrainSlicesPerDevice + 1, kSlicesPerPartition}}});
  json doc = {{"format", kManifestFormat},
              {"version", kManifestVersion},
              {"scenario", {{"name", m.scenario.name}, {"k", m.scenario.k}, {"m", m.scenario.m}, {"p", m.scenario.p}}},
              {"split_index", m.split_index},
              {"transmission", m.transmission},
              {"partition", m.partition},
              {"slice_length", kWindow},
              {"devices", std::move(entries)}};
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write manifest " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw DataError("failed writing manifest " + path.string());
}

SplitManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  try {
    const json doc = json::parse(in);
    if (doc.at("format").get<std::string>() != kManifestFormat || doc.at("version").get<int>() != kManifestVersion)
      throw DataError("manifest " + path.string() + " has an unsupported format or version");
    SplitManifest m;
    const auto& sc = doc.at("scenario");
    m.scenario = {sc.at("name").get<std::string>(), sc.at("k").get<std::size_t>(), sc.at("m").get<std::size_t>(),
                  sc.at("p").get<std::size_t>()};
    m.split_index = doc.at("split_index").get<std::size_t>();
    m.transmission = doc.at("transmission").get<std::size_t>();
    m.partition = doc.at("partition").get<std::size_t>();
    if (split_index(m.transmission, m.partition, m.scenario.p) != m.split_index)
      throw DataError("manifest " + path.string() + ": split index does not match (transmission, partition)");
    for (const auto& e : doc.at("devices")) {
      const auto train = e.at("train_range").get<std::array<std::size_t, 2>>();
      const auto test = e.at("test_range").get<std::array<std::size_t, 2>>();
      if (train != std::array<std::size_t, 2>{1, kTrainSlicesPerDevice} ||
          test != std::array<std::size_t, 2>{kTrainSlicesPerDevice + 1, kSlicesPerPartition})
        throw DataError("manifest " + path.string() + ": unsupported train/test ranges");
      m.devices.push_back(
          {e.at("device_id").get<int>(), e.at("start_offset").get<std::size_t>(), e.at("recording").get<std::string>()});
    }
    if (m.devices.size() != m.scenario.k)
      throw DataError("manifest " + path.string() + " lists " + std::to_string(m.devices.size()) + " devices, expected " +
                      std::to_string(m.scenario.k));
    return m;
  } catch (const json::exception& e) {
    throw DataError("malformed manifest " + path.string() + ": " + e.what());
  }
}

std::vector<SplitManifest> load_manifests(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError("manifest directory " + dir.string() + " does not exist");
  std::vector<SplitManifest> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("split_") && entry.path().extension() == ".json")
      out.push_back(load_manifest(entry.path()));
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.split_index < b.split_index; });
  return out;
}

Split split_from_manifest(const SplitManifest& manifest, const std::filesystem::path& data_dir) {
  Split split;
  split.split_index = manifest.split_index;
  split.transmission = manifest.transmission;
  split.partition = manifest.partition;
  split.devices = manifest.devices;
  split.slices.reserve(manifest.devices.size() * kSlicesPerPartition);
  for (const auto& d : manifest.devices) {
    const Recording rec = load_recording(data_dir / (d.recording + ".iq"), data_dir / (d.recording + ".json"));
    if (rec.device_id != d.device_id)
      throw DataError("recording " + d.recording + " belongs to device " + std::to_string(rec.device_id) +
                      ", manifest says " + std::to_string(d.device_id));
    for (auto& s : slice_partition(rec, d.start_offset)) {
      split.assignment.push_back(assignment_for(s.slice_index));
      split.slices.push_back(std::move(s));
    }
  }
  return split;
}

}  // namespace rfcvnn
