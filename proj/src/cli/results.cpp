#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>

#include "rfcvnn/cli.hpp"
#include "rfcvnn/errors.hpp"

namespace rfcvnn {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t at = 0;
  for (;;) {
    const auto comma = line.find(',', at);
    out.push_back(line.substr(at, comma == std::string_view::npos ? std::string_view::npos : comma - at));
    if (comma == std::string_view::npos) return out;
    at = comma + 1;
  }
}

std::string_view trim_cr(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string ResultRow::cell_key() const {
  return scenario + "/" + model + "/" + input_mode + "/" + ablation + "/seed=" + std::to_string(seed);
}

std::string format_row(const ResultRow& r) {
  char acc[40];
  std::snprintf(acc, sizeof acc, "%.17g", r.accuracy);
  return r.scenario + "," + r.model + "," + r.input_mode + "," + r.ablation + "," + std::to_string(r.split_index) +
         "," + acc + "," + std::to_string(r.seed) + "," + r.timestamp;
}

ResultRow parse_row(std::string_view line) {
  line = trim_cr(line);
  const auto f = split_fields(line);
  if (f.size() != 8) throw DataError("expected 8 fields, got " + std::to_string(f.size()));
  for (std::size_t i = 0; i < 5; ++i)
    if (f[i].empty()) throw DataError("empty field " + std::to_string(i + 1));
  ResultRow r{std::string(f[0]), std::string(f[1]), std::string(f[2]), std::string(f[3]), 0, 0.0, 0,
              std::string(f[7])};

  auto whole = [](std::string_view s, const char* what) {
    const std::string text(s);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
    if (text.empty() || text[0] == '-' || *end != '\0' || errno == ERANGE)
      throw DataError(std::string("bad ") + what + " '" + text + "'");
    return v;
  };
  r.split_index = static_cast<std::size_t>(whole(f[4], "split index"));
  r.seed = static_cast<std::uint64_t>(whole(f[6], "seed"));
  const std::string acc(f[5]);
  char* end = nullptr;
  r.accuracy = std::strtod(acc.c_str(), &end);
  if (acc.empty() || *end != '\0' || !(r.accuracy >= 0.0 && r.accuracy <= 1.0))
    throw DataError("bad accuracy '" + acc + "'");
  if (r.split_index < 1) throw DataError("split index must be >= 1");
  return r;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<ResultRow> read_results(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open result file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError("result file " + path.string() + " is empty");
  if (trim_cr(line) != kResultsVersionLine)
    throw DataError("result file " + path.string() + " does not start with '" + std::string(kResultsVersionLine) + "'");
  std::vector<ResultRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim_cr(line);
    if (text.empty() || text.front() == '#' || text == kResultsColumns) continue;
    try {
      rows.push_back(parse_row(text));
    } catch (const DataError& e) {
      if (warnings) warnings->push_back(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

ResultWriter::ResultWriter(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path(), ec);
  if (ec) throw DataError("cannot create " + path_.parent_path().string() + ": " + ec.message());
  if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
    std::ifstream in(path_);
    std::string first;
    std::getline(in, first);
    if (trim_cr(first) != kResultsVersionLine)
      throw DataError("existing file " + path_.string() + " is not a v1 result file");
    return;
  }
  std::ofstream out(path_, std::ios::trunc);
  out << kResultsVersionLine << "\n" << kResultsColumns << "\n";
  if (!out) throw DataError("cannot write " + path_.string());
}

void ResultWriter::append(const ResultRow& row) {
  std::lock_guard lock(mu_);
  std::ofstream out(path_, std::ios::app);
  out << format_row(row) << "\n";
  out.flush();
  if (!out) throw DataError("failed appending to " + path_.string());
}

}  // namespace rfcvnn
