#pragma once

// Per-split training and evaluation, scenario runs and mean/std aggregation.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rfcvnn/ablation.hpp"
#include "rfcvnn/datapipe.hpp"
#include "rfcvnn/model.hpp"
#include "rfcvnn/optim.hpp"

namespace rfcvnn {

struct SplitResult {
  std::size_t split_index = 0;
  double test_accuracy = 0.0;  // correct / total over the test slices
  std::size_t correct = 0;
  std::size_t total = 0;
  std::vector<double> train_loss;  // mean loss per epoch
  double wall_time_s = 0.0;
};

struct SplitFailure {
  std::size_t split_index = 0;
  std::string message;
};

struct Aggregate {
  static constexpr std::string_view kStdConvention = "sample (n-1)";

  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;
  std::vector<SplitResult> per_split;  // ascending split_index
  std::vector<SplitFailure> failures;
  bool partial = false;
};

/// Sees the split positions (indices into Split::slices) of every training
/// batch before its gradient step.
using BatchObserver = std::function<void(std::span<const std::size_t> positions)>;

/// [N, 2, 100] batch of the transformed slices at `positions` and their labels.
Tensor make_batch(const Split& split, std::span<const std::size_t> positions, InputMode mode);

/// Fraction of the split's test slices the model classifies correctly (eval mode).
SplitResult evaluate(Model& model, const Split& split, InputMode mode);

/// Trains on the split's train slices with batch statistics, then evaluates
/// with running statistics. The shuffle order derives from hp.seed. A final
/// batch smaller than 2 is dropped. Throws TrainingError on a non-finite loss.
SplitResult train_on_split(Model& model, const Split& split, InputMode mode, const Hyperparams& hp,
                           const BatchObserver& observer = {});

/// Mean and sample standard deviation (0 for a single result). Throws
/// std::invalid_argument on empty input.
Aggregate aggregate_mean_std(std::span<const SplitResult> results);

/// Seed of split `split_index` in a run seeded with `seed`.
std::uint64_t split_seed(std::uint64_t seed, std::size_t split_index);

struct ScenarioRun {
  ModelKind model = ModelKind::kCvnn;
  InputMode mode = InputMode::kIQ;
  AblationConfig ablation = AblationConfig::none();
  Hyperparams hp;
  std::size_t workers = 1;
  std::set<std::size_t> skip;  // split indices already done
};

/// Split index -> split; called from worker threads.
using SplitSource = std::function<Split(std::size_t split_index)>;
/// Called once per finished split in ascending split order, from one thread at a time.
using ResultSink = std::function<void(const SplitResult&)>;

/// Trains a fresh model per split (seeded by split_seed) on the S = M*P splits
/// of `scenario`. Failed splits are recorded and mark the aggregate partial;
/// the aggregate covers the splits that succeeded in this call.
Aggregate run_scenario(const ScenarioSpec& scenario, const SplitSource& source, const ScenarioRun& run,
                       const ResultSink& sink = {});

}  // namespace rfcvnn
