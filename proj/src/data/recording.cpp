#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <json.hpp>

#include "rfcvnn/datapipe.hpp"

namespace rfcvnn {

using nlohmann::json;

namespace {

float decode_le_float(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void encode_le_float(float v, unsigned char* p) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  p[0] = static_cast<unsigned char>(bits);
  p[1] = static_cast<unsigned char>(bits >> 8);
  p[2] = static_cast<unsigned char>(bits >> 16);
  p[3] = static_cast<unsigned char>(bits >> 24);
}

}  // namespace

std::string recording_stem(int device_id, int transmission_id) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "dev%03d_tx%d", device_id, transmission_id);
  return buf;
}

Recording load_recording(const std::filesystem::path& data_path, const std::filesystem::path& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw DataError("cannot open metadata " + meta_path.string());
  json meta;
  try {
    meta = json::parse(meta_in);
  } catch (const json::exception& e) {
    throw DataError("malformed metadata " + meta_path.string() + ": " + e.what());
  }

  Recording rec;
  std::size_t declared = 0;
  try {
    rec.device_id = meta.at("device_id").get<int>();
    rec.transmission_id = meta.at("transmission_id").get<int>();
    declared = meta.at("sample_count").get<std::size_t>();
    if (meta.contains("sample_rate_hz") && !meta["sample_rate_hz"].is_null())
      rec.sample_rate_hz = meta["sample_rate_hz"].get<double>();
  } catch (const json::exception& e) {
    throw DataError("metadata " + meta_path.string() + ": " + e.what());
  }
  if (rec.device_id < 0 || rec.transmission_id < 1)
    throw DataError("metadata " + meta_path.string() + ": device_id must be >= 0 and transmission_id >= 1");

  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw DataError("cannot open IQ data " + data_path.string());
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 8 != 0)
    throw DataError("IQ data " + data_path.string() + " is truncated: " + std::to_string(bytes.size()) +
                    " bytes is not a whole number of I,Q float32 pairs");
  const std::size_t count = bytes.size() / 8;
  if (count != declared)
    throw DataError("IQ data " + data_path.string() + " holds " + std::to_string(count) +
                    " samples but metadata declares " + std::to_string(declared));

  rec.samples.resize(count);
  for (std::size_t s = 0; s < count; ++s) {
    const float i = decode_le_float(bytes.data() + 8 * s);
    const float q = decode_le_float(bytes.data() + 8 * s + 4);
    if (!std::isfinite(i) || !std::isfinite(q))
      throw DataError("IQ data " + data_path.string() + " has a non-finite value at sample " + std::to_string(s));
    rec.samples[s] = {i, q};
  }
  return rec;
}

void save_recording(const Recording& rec, const std::filesystem::path& data_path,
                    const std::filesystem::path& meta_path) {
  std::vector<unsigned char> bytes(rec.samples.size() * 8);
  for (std::size_t s = 0; s < rec.samples.size(); ++s) {
    encode_le_float(rec.samples[s].real(), bytes.data() + 8 * s);
    encode_le_float(rec.samples[s].imag(), bytes.data() + 8 * s + 4);
  }
  std::ofstream out(data_path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + data_path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing " + data_path.string());

  json meta = {{"device_id", rec.device_id},
               {"transmission_id", rec.transmission_id},
               {"sample_count", rec.samples.size()}};
  if (rec.sample_rate_hz) meta["sample_rate_hz"] = *rec.sample_rate_hz;
  std::ofstream mo(meta_path, std::ios::trunc);
  if (!mo) throw DataError("cannot write " + meta_path.string());
  mo << meta.dump(2) << '\n';
  if (!mo) throw DataError("failed writing " + meta_path.string());
}

}  // namespace rfcvnn
