#include "rfcvnn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace rfcvnn {
namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finaliser over a simple combination.
  std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

enum Stream : std::uint64_t { kSymbols = 1, kPhaseNoise, kNoise, kJitter, kDraw, kCrossI, kCrossQ };

}  // namespace

void DeviceImpairment::validate() const {
  const bool finite = std::isfinite(gain_imbalance) && std::isfinite(phase_skew) && std::isfinite(dc_offset.real()) &&
                      std::isfinite(dc_offset.imag()) && std::isfinite(cfo) && std::isfinite(phase_noise_std);
  if (!finite) throw std::invalid_argument("impairment parameters must be finite");
  if (std::abs(gain_imbalance) >= 0.5) throw std::invalid_argument("|gain imbalance| must be < 0.5");
  if (std::abs(phase_skew) >= kPi / 4) throw std::invalid_argument("|phase skew| must be < pi/4");
  if (phase_noise_std < 0.0) throw std::invalid_argument("phase noise std must be >= 0");
}

std::vector<std::complex<double>> base_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, kSymbols));
  const double a = 1.0 / std::sqrt(2.0);
  std::vector<std::complex<double>> out(n);
  for (auto& s : out) {
    const auto bits = rng();
    s = {(bits & 1) ? a : -a, (bits & 2) ? a : -a};
  }
  return out;
}

Recording generate_recording(const DeviceImpairment& imp, std::size_t n, std::uint64_t seed, double snr_db,
                             int device_id, int transmission_id) {
  imp.validate();
  if (n < min_samples_for(1))
    throw std::invalid_argument("generate_recording: need at least " + std::to_string(min_samples_for(1)) +
                                " samples, got " + std::to_string(n));
  if (std::isnan(snr_db)) throw std::invalid_argument("generate_recording: SNR is NaN");

  const auto base = base_signal(n, seed);
  std::vector<std::complex<double>> z(n);
  const double cs = std::cos(imp.phase_skew);
  const double sn = std::sin(imp.phase_skew);
  std::mt19937_64 pn_rng(mix(seed, kPhaseNoise));
  std::normal_distribution<double> pn(0.0, 1.0);
  double wiener = 0.0;
  double power = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double i = (1.0 + imp.gain_imbalance) * base[t].real();
    const double q = cs * base[t].imag() + sn * base[t].real();
    const double re = i + imp.dc_offset.real();
    const double im = q + imp.dc_offset.imag();
    if (t > 0 && imp.phase_noise_std > 0.0) wiener += imp.phase_noise_std * pn(pn_rng);
    const double theta = 2.0 * kPi * imp.cfo * static_cast<double>(t) + wiener;
    const double c = std::cos(theta), s = std::sin(theta);
    z[t] = {re * c - im * s, re * s + im * c};
    power += std::norm(z[t]);
  }
  power /= static_cast<double>(n);

  if (std::isfinite(snr_db)) {
    const double sigma = std::sqrt(power / std::pow(10.0, snr_db / 10.0) / 2.0);
    std::mt19937_64 noise_rng(mix(seed, kNoise));
    std::normal_distribution<double> noise(0.0, sigma);
    for (auto& v : z) v += std::complex<double>(noise(noise_rng), noise(noise_rng));
  }

  Recording rec;
  rec.device_id = device_id;
  rec.transmission_id = transmission_id;
  rec.samples.resize(n);
  for (std::size_t t = 0; t < n; ++t)
    rec.samples[t] = {static_cast<float>(z[t].real()), static_cast<float>(z[t].imag())};
  return rec;
}

bool devices_separated(const std::vector<DeviceImpairment>& d, const ImpairmentJitter& j) {
  for (std::size_t a = 0; a < d.size(); ++a)
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      const bool apart = std::abs(d[a].gain_imbalance - d[b].gain_imbalance) >= 3 * j.gain_imbalance ||
                         std::abs(d[a].phase_skew - d[b].phase_skew) >= 3 * j.phase_skew ||
                         std::abs(d[a].dc_offset.real() - d[b].dc_offset.real()) >= 3 * j.dc_offset ||
                         std::abs(d[a].dc_offset.imag() - d[b].dc_offset.imag()) >= 3 * j.dc_offset ||
                         std::abs(d[a].cfo - d[b].cfo) >= 3 * j.cfo;
      if (!apart) return false;
    }
  return true;
}

SynthScenario draw_scenario(const ScenarioSpec& spec, std::uint64_t seed, double snr_db,
                            std::size_t samples_per_transmission) {
  if (spec.k < 2) throw std::invalid_argument("a synthetic scenario needs at least 2 devices");
  SynthScenario sc;
  sc.spec = spec;
  sc.snr_db = snr_db;
  sc.samples_per_transmission = samples_per_transmission ? samples_per_transmission : min_samples_for(spec.p);
  std::mt19937_64 rng(mix(seed, kDraw));
  // Every parameter range is cut into K strata and each device takes a
  // different one, staying within the middle half of it. Any two devices are
  // then at least half a stratum apart in every parameter.
  const std::size_t k = spec.k;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto strata = [&](double lo, double hi) {
    std::vector<std::size_t> perm(k);
    for (std::size_t i = 0; i < k; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<double> v(k);
    for (std::size_t i = 0; i < k; ++i)
      v[i] = lo + (hi - lo) * (static_cast<double>(perm[i]) + 0.25 + 0.5 * unit(rng)) / static_cast<double>(k);
    return v;
  };
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto alpha = strata(-0.45, 0.45), skew = strata(-0.6, 0.6), dc_re = strata(-0.8, 0.8),
               dc_im = strata(-0.8, 0.8), cfo = strata(-1e-6, 1e-6), pn = strata(0.0, 5e-4);
    sc.devices.clear();
    for (std::size_t d = 0; d < k; ++d) {
      DeviceImpairment imp;
      imp.gain_imbalance = alpha[d];
      imp.phase_skew = skew[d];
      imp.dc_offset = {dc_re[d], dc_im[d]};
      imp.cfo = cfo[d];
      imp.phase_noise_std = pn[d];
      sc.devices.push_back(imp);
    }
    if (devices_separated(sc.devices, sc.jitter)) return sc;
  }
  throw std::runtime_error("could not draw separated device impairments");
}

std::vector<Recording> generate_scenario(const SynthScenario& sc, std::uint64_t seed) {
  std::vector<Recording> out;
  out.reserve(sc.spec.k * sc.spec.m);
  for (std::size_t d = 0; d < sc.spec.k; ++d)
    for (std::size_t m = 1; m <= sc.spec.m; ++m) {
      const std::uint64_t tx_seed = mix(mix(seed, d), m);
      std::mt19937_64 jr(mix(tx_seed, kJitter));
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      DeviceImpairment imp = sc.devices.at(d);
      imp.gain_imbalance += sc.jitter.gain_imbalance * u(jr);
      imp.phase_skew += sc.jitter.phase_skew * u(jr);
      imp.dc_offset += std::complex<double>(sc.jitter.dc_offset * u(jr), sc.jitter.dc_offset * u(jr));
      imp.cfo += sc.jitter.cfo * u(jr);
      out.push_back(generate_recording(imp, sc.samples_per_transmission, tx_seed, sc.snr_db, static_cast<int>(d),
                                       static_cast<int>(m)));
    }
  return out;
}

CrosstermTask generate_crossterm_task(std::size_t k, std::uint64_t seed, std::size_t m, std::size_t p,
                                      std::size_t samples_per_transmission) {
  if (k < 2) throw std::invalid_argument("crossterm task needs at least 2 devices");
  CrosstermTask task;
  task.spec = ScenarioSpec::custom(k, m, p);
  const std::size_t n = samples_per_transmission ? samples_per_transmission : min_samples_for(p);

  constexpr std::size_t kTaps = 31;
  for (std::size_t d = 0; d < k; ++d) {
    const double f = (static_cast<double>(d) + 0.5) / (2.0 * static_cast<double>(k));
    std::vector<double> h(kTaps);
    double energy = 0.0;
    for (std::size_t j = 0; j < kTaps; ++j) {
      const double hann = 0.5 - 0.5 * std::cos(2.0 * kPi * (static_cast<double>(j) + 1.0) / (kTaps + 1.0));
      h[j] = hann * std::cos(2.0 * kPi * f * static_cast<double>(j));
      energy += h[j] * h[j];
    }
    for (double& v : h) v /= std::sqrt(energy);
    task.q_filters.push_back(std::move(h));
  }

  const double sigma = 1.0 / std::sqrt(2.0);
  for (std::size_t d = 0; d < k; ++d)
    for (std::size_t tx = 1; tx <= m; ++tx) {
      const std::uint64_t tx_seed = mix(mix(seed, d), tx);
      std::mt19937_64 ri(mix(tx_seed, kCrossI));
      std::mt19937_64 rq(mix(tx_seed, kCrossQ));
      std::normal_distribution<double> g(0.0, sigma);
      const auto& h = task.q_filters[d];
      std::vector<double> u(n + kTaps - 1);
      for (double& v : u) v = g(rq);
      Recording rec;
      rec.device_id = static_cast<int>(d);
      rec.transmission_id = static_cast<int>(tx);
      rec.samples.resize(n);
      for (std::size_t t = 0; t < n; ++t) {
        double q = 0.0;
        for (std::size_t j = 0; j < kTaps; ++j) q += h[j] * u[t + kTaps - 1 - j];
        rec.samples[t] = {static_cast<float>(g(ri)), static_cast<float>(q)};
      }
      task.recordings.push_back(std::move(rec));
    }
  return task;
}

}  // namespace rfcvnn
