#include "rfcvnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include "rfcvnn/errors.hpp"

#if defined(__GLIBC__)
#include <malloc.h>
#endif

namespace rfcvnn {

Tensor make_batch(const Split& split, std::span<const std::size_t> positions, InputMode mode) {
  constexpr std::size_t kRow = 2 * kWindow;
  std::vector<double> values(positions.size() * kRow);
  for (std::size_t b = 0; b < positions.size(); ++b) {
    const auto x = input_transform(split.slices.at(positions[b]), mode);
    std::copy(x.begin(), x.end(), values.begin() + static_cast<std::ptrdiff_t>(b * kRow));
  }
  return Tensor::from({positions.size(), 2, kWindow}, std::move(values));
}

namespace {

std::vector<std::size_t> labels_of(const Split& split, std::span<const std::size_t> positions) {
  std::vector<std::size_t> labels;
  labels.reserve(positions.size());
  for (std::size_t p : positions) labels.push_back(static_cast<std::size_t>(split.slices[p].device_id));
  return labels;
}

constexpr std::size_t kEvalBatch = 256;

// Activations are large and short lived. Keep glibc from returning them to
// the kernel with mmap/munmap on every step.
void keep_heap() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_TOP_PAD, 256 << 20);
  });
#endif
}

}  // namespace

SplitResult evaluate(Model& model, const Split& split, InputMode mode) {
  SplitResult r;
  r.split_index = split.split_index;
  std::vector<std::size_t> test;
  for (std::size_t i = 0; i < split.slices.size(); ++i)
    if (split.assignment[i] == Assignment::kTest) test.push_back(i);
  for (std::size_t at = 0; at < test.size(); at += kEvalBatch) {
    const std::span<const std::size_t> pos(test.data() + at, std::min(kEvalBatch, test.size() - at));
    const auto pred = model.predict(make_batch(split, pos, mode));
    for (std::size_t b = 0; b < pos.size(); ++b)
      if (pred[b] == static_cast<std::size_t>(split.slices[pos[b]].device_id)) ++r.correct;
  }
  r.total = test.size();
  r.test_accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
  return r;
}

SplitResult train_on_split(Model& model, const Split& split, InputMode mode, const Hyperparams& hp,
                           const BatchObserver& observer) {
  hp.validate();
  keep_heap();
  if (split.assignment.size() != split.slices.size())
    throw std::invalid_argument("split assignment does not match its slices");
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < split.slices.size(); ++i)
    if (split.assignment[i] == Assignment::kTrain) train.push_back(i);
  if (train.size() < 2) throw std::invalid_argument("split has fewer than 2 training slices");

  const auto t0 = std::chrono::steady_clock::now();
  Optimizer opt(hp.optimizer, hp.learning_rate, model.parameters());
  std::mt19937_64 rng(hp.seed);
  std::vector<double> trace;
  model.enforce_frozen();

  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t at = 0; at < train.size(); at += hp.batch_size) {
      const std::size_t n = std::min(hp.batch_size, train.size() - at);
      if (n < 2) break;
      const std::span<const std::size_t> pos(train.data() + at, n);
      if (observer) observer(pos);
      const auto labels = labels_of(split, pos);
      const auto where = [&] {
        return " on split " + std::to_string(split.split_index) + ", epoch " + std::to_string(epoch + 1) +
               ", step " + std::to_string(opt.steps() + 1);
      };
      model.zero_grad();
      Tensor loss;
      try {
        loss = softmax_cross_entropy(model.forward(make_batch(split, pos, mode), Mode::kTrain), labels);
      } catch (const NumericError& e) {
        throw TrainingError(std::string("non-finite values in forward pass") + where() + ": " + e.what());
      }
      const double l = loss.item();
      if (!std::isfinite(l)) throw TrainingError("non-finite loss " + std::to_string(l) + where());
      loss.backward();
      opt.step();
      model.enforce_frozen();
      loss_sum += l * static_cast<double>(n);
      seen += n;
    }
    trace.push_back(seen ? loss_sum / static_cast<double>(seen) : 0.0);
  }

  SplitResult r = evaluate(model, split, mode);
  r.train_loss = std::move(trace);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Aggregate aggregate_mean_std(std::span<const SplitResult> results) {
  if (results.empty()) throw std::invalid_argument("aggregate_mean_std: no results");
  Aggregate agg;
  agg.per_split.assign(results.begin(), results.end());
  std::stable_sort(agg.per_split.begin(), agg.per_split.end(),
                   [](const SplitResult& a, const SplitResult& b) { return a.split_index < b.split_index; });
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t n = 0;
  for (const auto& r : agg.per_split) {
    ++n;
    const double d = r.test_accuracy - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (r.test_accuracy - mean);
  }
  agg.mean_accuracy = mean;
  agg.std_accuracy = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
  return agg;
}

std::uint64_t split_seed(std::uint64_t seed, std::size_t split_index) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(split_index) + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Aggregate run_scenario(const ScenarioSpec& scenario, const SplitSource& source, const ScenarioRun& run,
                       const ResultSink& sink) {
  run.hp.validate();
  if (run.model == ModelKind::kRvnn && run.ablation.active())
    throw std::invalid_argument("ablation " + run.ablation.name() + " requires the CVNN model");

  std::vector<std::size_t> todo;
  for (std::size_t s = 1; s <= scenario.splits(); ++s)
    if (!run.skip.count(s)) todo.push_back(s);

  struct Outcome {
    bool done = false;
    bool ok = false;
    SplitResult result;
    std::string error;
  };
  std::vector<Outcome> outcomes(todo.size());
  std::mutex mu;
  std::size_t emitted = 0;  // next position to hand to the sink
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= todo.size()) return;
      const std::size_t index = todo[slot];
      Outcome out;
      try {
        const Split split = source(index);
        Hyperparams hp = run.hp;
        hp.seed = split_seed(run.hp.seed, index);
        Model model = build_model(run.model, scenario.k, hp.seed, run.ablation);
        out.result = train_on_split(model, split, run.mode, hp);
        out.result.split_index = index;
        out.ok = true;
      } catch (const std::exception& e) {
        out.error = e.what();
      }
      out.done = true;
      std::lock_guard lock(mu);
      outcomes[slot] = std::move(out);
      while (emitted < outcomes.size() && outcomes[emitted].done) {
        if (outcomes[emitted].ok && sink) sink(outcomes[emitted].result);
        ++emitted;
      }
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(run.workers, todo.size()));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::vector<SplitResult> ok;
  std::vector<SplitFailure> failures;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (outcomes[i].ok)
      ok.push_back(std::move(outcomes[i].result));
    else
      failures.push_back({todo[i], outcomes[i].error});
  }
  Aggregate agg;
  if (!ok.empty()) agg = aggregate_mean_std(ok);
  agg.failures = std::move(failures);
  agg.partial = !agg.failures.empty();
  return agg;
}

}  // namespace rfcvnn
