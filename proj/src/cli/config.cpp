#include <CLI11.hpp>
#include <filesystem>
#include <ostream>

#include "rfcvnn/cli.hpp"
#include "rfcvnn/errors.hpp"

namespace rfcvnn {

namespace {

template <typename F>
auto usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const UsageError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

}  // namespace

ScenarioSpec RunConfig::scenario_spec() const {
  return usage([&] { return scenario == "custom" ? ScenarioSpec::custom(k, m, p) : ScenarioSpec::preset(scenario); });
}

ModelKind RunConfig::model_kind() const {
  return usage([&] { return parse_model_kind(model); });
}

InputMode RunConfig::input_mode() const {
  return usage([&] { return parse_input_mode(mode); });
}

AblationConfig RunConfig::ablation() const {
  return usage([&] { return AblationConfig::parse(ablate); });
}

Hyperparams RunConfig::hyperparams() const {
  Hyperparams out = hp;
  out.seed = seed;
  return out;
}

void RunConfig::validate() const {
  const ScenarioSpec spec = scenario_spec();
  if (spec.k < 2) throw UsageError("scenario needs >= 2 classes (K=" + std::to_string(spec.k) + ")");
  const ModelKind kind = model_kind();
  (void)input_mode();
  const AblationConfig abl = ablation();
  if (abl.active() && kind != ModelKind::kCvnn)
    throw UsageError("ablation " + abl.name() + " is only defined for the CVNN");
  usage([&] { hyperparams().validate(); });
  if (workers < 1) throw UsageError("workers must be >= 1");
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Complex- and real-valued CNNs for RF device fingerprinting"};
  app.set_config("--config", "", "TOML/INI file with option values (flags take precedence)");
  app.require_subcommand(1, 1);
  app.fallthrough();

  RunConfig cfg;
  std::string optimizer = "adam";
  std::filesystem::path results;

  app.add_option("--scenario", cfg.scenario, "osu-indoor, osu-outdoor, ne-wired, ne-anechoic or custom")
      ->check(CLI::IsMember({"osu-indoor", "osu-outdoor", "ne-wired", "ne-anechoic", "custom"}))
      ->capture_default_str();
  app.add_option("--k", cfg.k, "devices (custom scenario)")->capture_default_str();
  app.add_option("--m", cfg.m, "transmissions per device (custom scenario)")->capture_default_str();
  app.add_option("--p", cfg.p, "partitions per transmission (custom scenario)")->capture_default_str();
  app.add_option("--model", cfg.model, "rvnn or cvnn")->capture_default_str();
  app.add_option("--mode", cfg.mode, "i, q, iq, r, t or rt")->capture_default_str();
  app.add_option("--ablate", cfg.ablate, "L{1|2|12}_{C|O}_{RE|IM} or none")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--epochs", cfg.hp.epochs)->capture_default_str();
  app.add_option("--lr", cfg.hp.learning_rate)->capture_default_str();
  app.add_option("--batch", cfg.hp.batch_size)->capture_default_str();
  app.add_option("--optimizer", optimizer, "adam or sgd-momentum")->capture_default_str();
  app.add_option("--precision", cfg.hp.precision)->capture_default_str();
  app.add_option("--snr", cfg.snr_db, "synthetic noise level [dB]")->capture_default_str();
  app.add_option("--workers", cfg.workers)->envname("RFCVNN_WORKERS")->capture_default_str();
  app.add_option("--data-dir", cfg.data_dir)->capture_default_str();
  app.add_option("--out-dir", cfg.out_dir)->capture_default_str();
  app.add_flag("--resume", cfg.resume, "skip splits that already have result rows");
  app.add_flag("--dry-run", cfg.dry_run, "list the sweep cells without training");

  auto* synth = app.add_subcommand("synth", "write synthetic recordings into --data-dir");
  auto* slice = app.add_subcommand("slice", "write split manifests into <data-dir>/manifests");
  auto* run = app.add_subcommand("run", "train and evaluate one cell over every split");
  auto* sweep = app.add_subcommand("sweep", "run the full experiment matrix");
  auto* report = app.add_subcommand("report", "summarise a result file");
  report->add_option("results", results, "result file (default <out-dir>/results.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    cfg.hp.optimizer = usage([&] { return parse_optimizer(optimizer); });
    if (*synth) {
      cfg.validate();
      const auto files = cmd_synth(cfg, out);
      out << "wrote " << files.size() << " files to " << cfg.data_dir.string() << "\n";
    } else if (*slice) {
      cfg.validate();
      const auto files = cmd_slice(cfg, out);
      out << "wrote " << files.size() << " manifests to " << cfg.manifest_dir().string() << "\n";
    } else if (*run) {
      const Aggregate agg = cmd_run(cfg, out);
      if (agg.partial) return kExitTraining;
    } else if (*sweep) {
      const SweepSummary s = cmd_sweep(cfg, out);
      if (!s.failed.empty()) return kExitTraining;
    } else if (*report) {
      cmd_report(results.empty() ? cfg.results_path() : results, cfg.out_dir, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const TrainingError& e) {
    err << "training failure: " << e.what() << "\n";
    return kExitTraining;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "training failure: " << e.what() << "\n";
    return kExitTraining;
  }
  return kExitOk;
}

}  // namespace rfcvnn
