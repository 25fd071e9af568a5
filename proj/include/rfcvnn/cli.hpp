#pragma once

// Command layer behind the rfcvnn executable: synth, slice, run, sweep, report.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rfcvnn/ablation.hpp"
#include "rfcvnn/datapipe.hpp"
#include "rfcvnn/model.hpp"
#include "rfcvnn/optim.hpp"
#include "rfcvnn/trainer.hpp"

namespace rfcvnn {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitTraining = 3 };

struct RunConfig {
  std::string scenario = "custom";  // preset name or "custom"
  std::size_t k = 5;
  std::size_t m = 1;
  std::size_t p = 10;
  std::string model = "cvnn";
  std::string mode = "iq";
  std::string ablate = "none";
  Hyperparams hp;  // hp.seed mirrors `seed`
  std::uint64_t seed = 0;
  double snr_db = 20.0;
  std::filesystem::path data_dir = "data";
  std::filesystem::path out_dir = "results";
  std::size_t workers = 1;
  bool resume = false;
  bool dry_run = false;

  ScenarioSpec scenario_spec() const;
  ModelKind model_kind() const;
  InputMode input_mode() const;
  AblationConfig ablation() const;
  Hyperparams hyperparams() const;
  /// Throws UsageError on an invalid combination, e.g. an ablation on the RVNN.
  void validate() const;

  std::filesystem::path manifest_dir() const { return data_dir / "manifests"; }
  std::filesystem::path results_path() const { return out_dir / "results.csv"; }
};

// Result files -------------------------------------------------------------

inline constexpr std::string_view kResultsVersionLine = "# rfcvnn-results v1";
inline constexpr std::string_view kResultsColumns =
    "scenario,model,input_mode,ablation,split_index,accuracy,seed,timestamp";

struct ResultRow {
  std::string scenario;
  std::string model;
  std::string input_mode;
  std::string ablation;
  std::size_t split_index = 0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
  std::string timestamp;  // ISO 8601 UTC

  /// Everything but the split index, accuracy and timestamp.
  std::string cell_key() const;
};

std::string format_row(const ResultRow& row);
/// Throws DataError on a malformed line.
ResultRow parse_row(std::string_view line);
std::string utc_timestamp();

/// Reads every row of a result file. Malformed rows are skipped and described
/// in `warnings`. Throws DataError when the file cannot be read or has the
/// wrong version header.
std::vector<ResultRow> read_results(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

/// Append-only writer. Creates the file with its header when missing; each
/// row is flushed as it is written. Safe to share between threads.
class ResultWriter {
 public:
  explicit ResultWriter(std::filesystem::path path);
  void append(const ResultRow& row);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

// Commands -----------------------------------------------------------------

/// Writes K*M synthetic recordings and sidecars into data_dir. Returns the
/// paths written.
std::vector<std::filesystem::path> cmd_synth(const RunConfig& cfg, std::ostream& log);

/// Writes one manifest per split into data_dir/manifests.
std::vector<std::filesystem::path> cmd_slice(const RunConfig& cfg, std::ostream& log);

/// Trains one (model, mode, ablation) cell over every split, appending a row
/// per split to out_dir/results.csv, and prints a summary line.
Aggregate cmd_run(const RunConfig& cfg, std::ostream& log);

struct SweepCell {
  ModelKind model;
  InputMode mode;
  AblationConfig ablation;

  std::string label() const;
};
/// The 36 cells in figure order: {RVNN, CVNN} x {IQ, I, Q, RT, R, T} without
/// ablation, then CVNN x {IQ, RT} x the 12 ablations.
std::vector<SweepCell> sweep_cells();

struct SweepSummary {
  std::size_t cells = 0;
  std::vector<std::string> failed;  // labels of cells that failed
};
SweepSummary cmd_sweep(const RunConfig& cfg, std::ostream& log);

struct ReportLine {
  std::string label;
  std::size_t n = 0;
  double mean = 0.0;
  double std = 0.0;
};
struct Report {
  std::vector<ReportLine> lines;  // figure order
  std::size_t skipped_rows = 0;
  std::filesystem::path plot_data;
};
/// Per-cell mean and sample std of the rows in `results`; writes a tab
/// separated bar-chart file <stem>_bars.tsv into out_dir. Throws DataError when
/// no row is usable.
Report cmd_report(const std::filesystem::path& results, const std::filesystem::path& out_dir, std::ostream& log);

/// "mean 0.600 σ 0.141"
std::string format_mean_std(double mean, double std);

/// Parses argv and runs a subcommand. Returns an ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rfcvnn
