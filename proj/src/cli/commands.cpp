#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "rfcvnn/cli.hpp"
#include "rfcvnn/errors.hpp"
#include "rfcvnn/synthgen.hpp"

namespace rfcvnn {

namespace fs = std::filesystem;

namespace {

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string mode_name(InputMode mode) { return std::string(to_string(mode)); }

}  // namespace

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "mean %.3f σ %.3f", mean, std);
  return buf;
}

std::vector<fs::path> cmd_synth(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const ScenarioSpec spec = cfg.scenario_spec();
  make_dir(cfg.data_dir);
  const SynthScenario sc = draw_scenario(spec, cfg.seed, cfg.snr_db);
  std::vector<fs::path> written;
  for (const Recording& rec : generate_scenario(sc, cfg.seed)) {
    const std::string stem = recording_stem(rec.device_id, rec.transmission_id);
    const fs::path data = cfg.data_dir / (stem + ".iq");
    const fs::path meta = cfg.data_dir / (stem + ".json");
    save_recording(rec, data, meta);
    written.push_back(data);
    written.push_back(meta);
  }
  log << "synth " << spec.label() << ": " << spec.k << " devices x " << spec.m << " transmissions, "
      << sc.samples_per_transmission << " samples each\n";
  return written;
}

std::vector<fs::path> cmd_slice(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const ScenarioSpec spec = cfg.scenario_spec();
  std::vector<Recording> recs;
  for (std::size_t d = 0; d < spec.k; ++d)
    for (std::size_t m = 1; m <= spec.m; ++m) {
      const std::string stem = recording_stem(static_cast<int>(d), static_cast<int>(m));
      Recording rec = load_recording(cfg.data_dir / (stem + ".iq"), cfg.data_dir / (stem + ".json"));
      if (rec.device_id != static_cast<int>(d) || rec.transmission_id != static_cast<int>(m))
        throw DataError(stem + ": sidecar names device " + std::to_string(rec.device_id) + " transmission " +
                        std::to_string(rec.transmission_id));
      if (rec.sample_count() < min_samples_for(spec.p))
        throw DataError("recording of device " + std::to_string(d) + " transmission " + std::to_string(m) +
                        " has " + std::to_string(rec.sample_count()) + " samples; " + std::to_string(spec.p) +
                        " partitions need " + std::to_string(min_samples_for(spec.p)));
      recs.push_back(std::move(rec));
    }
  const fs::path dir = cfg.manifest_dir();
  make_dir(dir);
  std::vector<fs::path> written;
  for (std::size_t s = 1; s <= spec.splits(); ++s) {
    const auto c = split_coords(s, spec.p);
    const Split split = make_split(spec, recs, c.m, c.p);
    const fs::path path = dir / manifest_filename(s);
    save_manifest(manifest_of(spec, split), path);
    written.push_back(path);
  }
  log << "slice " << spec.label() << ": " << written.size() << " splits of " << spec.k * kSlicesPerPartition
      << " slices\n";
  return written;
}

namespace {

std::vector<SplitManifest> manifests_for(const RunConfig& cfg, const ScenarioSpec& spec) {
  auto manifests = load_manifests(cfg.manifest_dir());
  if (manifests.size() != spec.splits())
    throw DataError(cfg.manifest_dir().string() + " holds " + std::to_string(manifests.size()) + " manifests, " +
                    spec.label() + " needs " + std::to_string(spec.splits()) + "; run 'slice' first");
  for (std::size_t i = 0; i < manifests.size(); ++i) {
    const auto& m = manifests[i];
    if (m.split_index != i + 1 || m.scenario.name != spec.name || m.scenario.k != spec.k ||
        m.scenario.m != spec.m || m.scenario.p != spec.p)
      throw DataError("manifest " + manifest_filename(m.split_index) + " does not belong to " + spec.label());
  }
  return manifests;
}

Aggregate run_cell(const RunConfig& cfg, const ScenarioSpec& spec, const std::vector<SplitManifest>& manifests,
                   const SweepCell& cell, std::ostream& log) {
  ResultRow proto;
  proto.scenario = spec.label();
  proto.model = std::string(to_string(cell.model));
  proto.input_mode = mode_name(cell.mode);
  proto.ablation = cell.ablation.name();
  proto.seed = cfg.seed;

  ScenarioRun run;
  run.model = cell.model;
  run.mode = cell.mode;
  run.ablation = cell.ablation;
  run.hp = cfg.hyperparams();
  run.workers = cfg.workers;

  std::vector<SplitResult> previous;
  if (cfg.resume && fs::exists(cfg.results_path())) {
    for (const ResultRow& r : read_results(cfg.results_path()))
      if (r.cell_key() == proto.cell_key() && r.split_index <= spec.splits() && !run.skip.count(r.split_index)) {
        run.skip.insert(r.split_index);
        SplitResult s;
        s.split_index = r.split_index;
        s.test_accuracy = r.accuracy;
        previous.push_back(s);
      }
    if (!run.skip.empty()) log << cell.label() << ": resuming, " << run.skip.size() << " splits already done\n";
  }

  ResultWriter writer(cfg.results_path());
  const SplitSource source = [&](std::size_t index) { return split_from_manifest(manifests.at(index - 1), cfg.data_dir); };
  Aggregate agg = run_scenario(spec, source, run, [&](const SplitResult& r) {
    ResultRow row = proto;
    row.split_index = r.split_index;
    row.accuracy = r.test_accuracy;
    row.timestamp = utc_timestamp();
    writer.append(row);
  });

  for (const auto& f : agg.failures) log << cell.label() << ": split " << f.split_index << " failed: " << f.message << "\n";
  if (!previous.empty()) {
    std::vector<SplitResult> all = previous;
    all.insert(all.end(), agg.per_split.begin(), agg.per_split.end());
    auto failures = std::move(agg.failures);
    agg = aggregate_mean_std(all);
    agg.failures = std::move(failures);
    agg.partial = !agg.failures.empty();
  }
  if (agg.per_split.empty()) {
    log << spec.label() << " " << cell.label() << ": no successful splits\n";
  } else {
    log << spec.label() << " " << cell.label() << " n=" << agg.per_split.size() << " "
        << format_mean_std(agg.mean_accuracy, agg.std_accuracy) << " (" << Aggregate::kStdConvention << " std)"
        << (agg.partial ? " PARTIAL" : "") << "\n";
  }
  return agg;
}

}  // namespace

Aggregate cmd_run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const ScenarioSpec spec = cfg.scenario_spec();
  const auto manifests = manifests_for(cfg, spec);
  return run_cell(cfg, spec, manifests, {cfg.model_kind(), cfg.input_mode(), cfg.ablation()}, log);
}

std::string SweepCell::label() const {
  std::string out = model == ModelKind::kCvnn ? "CVNN" : "RVNN";
  out += " ";
  out += to_string(mode);
  if (ablation.active()) out += " " + ablation.name();
  return out;
}

std::vector<SweepCell> sweep_cells() {
  std::vector<SweepCell> cells;
  for (ModelKind kind : {ModelKind::kRvnn, ModelKind::kCvnn})
    for (InputMode mode : kAllInputModes) cells.push_back({kind, mode, AblationConfig::none()});
  for (InputMode mode : {InputMode::kIQ, InputMode::kRT})
    for (const auto& abl : AblationConfig::all()) cells.push_back({ModelKind::kCvnn, mode, abl});
  return cells;
}

SweepSummary cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const auto cells = sweep_cells();
  SweepSummary summary;
  summary.cells = cells.size();
  if (cfg.dry_run) {
    for (std::size_t i = 0; i < cells.size(); ++i) log << i + 1 << "\t" << cells[i].label() << "\n";
    return summary;
  }
  RunConfig base = cfg;
  base.model = "cvnn";
  base.ablate = "none";
  base.validate();
  const ScenarioSpec spec = base.scenario_spec();
  const auto manifests = manifests_for(base, spec);
  for (const auto& cell : cells) {
    try {
      const Aggregate agg = run_cell(cfg, spec, manifests, cell, log);
      if (agg.partial) summary.failed.push_back(cell.label());
    } catch (const std::exception& e) {
      log << cell.label() << ": failed: " << e.what() << "\n";
      summary.failed.push_back(cell.label());
    }
  }
  return summary;
}

namespace {

// Position of a row's cell in the sweep's figure order; unknown cells sort last.
std::size_t figure_rank(const ResultRow& r) {
  const auto cells = sweep_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    if (r.model == to_string(c.model) && r.input_mode == to_string(c.mode) && r.ablation == c.ablation.name()) return i;
  }
  return cells.size();
}

}  // namespace

Report cmd_report(const fs::path& results, const fs::path& out_dir, std::ostream& log) {
  std::vector<std::string> warnings;
  const auto rows = read_results(results, &warnings);
  for (const auto& w : warnings) log << "warning: skipped " << w << "\n";
  if (rows.empty()) throw DataError("result file " + results.string() + " has no usable rows");

  struct Group {
    ResultRow first;
    std::vector<SplitResult> results;
  };
  std::map<std::string, Group> groups;
  std::vector<std::string> order;
  for (const auto& r : rows) {
    auto [it, fresh] = groups.try_emplace(r.cell_key(), Group{r, {}});
    if (fresh) order.push_back(r.cell_key());
    SplitResult s;
    s.split_index = r.split_index;
    s.test_accuracy = r.accuracy;
    it->second.results.push_back(s);
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    const auto& ra = groups.at(a).first;
    const auto& rb = groups.at(b).first;
    if (ra.scenario != rb.scenario) return ra.scenario < rb.scenario;
    if (figure_rank(ra) != figure_rank(rb)) return figure_rank(ra) < figure_rank(rb);
    return ra.seed < rb.seed;
  });

  Report report;
  report.skipped_rows = warnings.size();
  for (const auto& key : order) {
    const Group& g = groups.at(key);
    const Aggregate agg = aggregate_mean_std(g.results);
    std::string label = g.first.scenario + " " + g.first.model + " " + g.first.input_mode + " " + g.first.ablation;
    if (std::any_of(rows.begin(), rows.end(), [&](const ResultRow& r) { return r.seed != g.first.seed; }))
      label += " seed=" + std::to_string(g.first.seed);
    report.lines.push_back({label, g.results.size(), agg.mean_accuracy, agg.std_accuracy});
  }

  std::size_t width = 0;
  for (const auto& l : report.lines) width = std::max(width, l.label.size());
  for (const auto& l : report.lines)
    log << l.label << std::string(width - l.label.size() + 2, ' ') << "n=" << l.n << "  "
        << format_mean_std(l.mean, l.std) << "\n";
  log << "(σ: " << Aggregate::kStdConvention << " standard deviation over splits)\n";

  make_dir(out_dir);
  report.plot_data = out_dir / (results.stem().string() + "_bars.tsv");
  std::ofstream out(report.plot_data, std::ios::trunc);
  out << "# cell\tmean\tstd\tn\n";
  for (const auto& l : report.lines) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "\t%.17g\t%.17g\t%zu\n", l.mean, l.std, l.n);
    out << l.label << buf;
  }
  if (!out) throw DataError("cannot write " + report.plot_data.string());
  log << "bar chart data: " << report.plot_data.string() << "\n";
  return report;
}

}  // namespace rfcvnn
