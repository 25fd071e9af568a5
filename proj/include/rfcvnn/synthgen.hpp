#pragma once

// Seeded synthetic transmitters standing in for real RF captures.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "rfcvnn/datapipe.hpp"

namespace rfcvnn {

/// Transmit-chain impairments of one device.
struct DeviceImpairment {
  double gain_imbalance = 0.0;          // alpha, |alpha| < 0.5
  double phase_skew = 0.0;              // phi [rad], |phi| < pi/4
  std::complex<double> dc_offset{};     //
  double cfo = 0.0;                     // cycles/sample
  double phase_noise_std = 0.0;         // Wiener increment std [rad/sample]

  /// Throws std::invalid_argument when a parameter is out of range or not finite.
  void validate() const;
};

/// Per-transmission wobble of an impairment around its device value.
struct ImpairmentJitter {
  double gain_imbalance = 0.004;
  double phase_skew = 0.004;
  double dc_offset = 0.004;  // per component
  double cfo = 5e-8;
};

inline constexpr double kInfiniteSnr = std::numeric_limits<double>::infinity();

/// Unit-power QPSK symbols (+-1 +-i)/sqrt(2), one per sample.
std::vector<std::complex<double>> base_signal(std::size_t n, std::uint64_t seed);

/// base_signal(n, seed) through I' = (1+alpha) I, Q' = cos(phi) Q + sin(phi) I,
/// + dc, rotation by exp(i(2 pi cfo n + Wiener phase noise)), then complex
/// white Gaussian noise at `snr_db` relative to the impaired signal power.
/// Requires n >= min_samples_for(1).
Recording generate_recording(const DeviceImpairment& impairment, std::size_t n, std::uint64_t seed,
                             double snr_db = kInfiniteSnr, int device_id = 0, int transmission_id = 1);

struct SynthScenario {
  ScenarioSpec spec;
  std::vector<DeviceImpairment> devices;  // one per class
  ImpairmentJitter jitter;
  std::size_t samples_per_transmission = 0;
  double snr_db = 20.0;
};

/// True when every pair of devices differs in at least one impairment
/// parameter by three times that parameter's jitter.
bool devices_separated(const std::vector<DeviceImpairment>& devices, const ImpairmentJitter& jitter);

/// K distinct impairment draws satisfying devices_separated. Samples per
/// transmission default to min_samples_for(P).
SynthScenario draw_scenario(const ScenarioSpec& spec, std::uint64_t seed, double snr_db = 20.0,
                            std::size_t samples_per_transmission = 0);

/// K*M recordings, device-major. Each transmission jitters its device's
/// impairments and uses its own seed.
std::vector<Recording> generate_scenario(const SynthScenario& scenario, std::uint64_t seed);

/// A task whose labels live only in Q: every device draws I from the same
/// white Gaussian process, while Q is white noise through a device-specific
/// unit-energy band-pass filter. Mode I inputs therefore carry no label
/// information. K >= 2.
struct CrosstermTask {
  ScenarioSpec spec;
  std::vector<std::vector<double>> q_filters;  // one per device
  std::vector<Recording> recordings;
};
CrosstermTask generate_crossterm_task(std::size_t k, std::uint64_t seed, std::size_t m = 1, std::size_t p = 1,
                                      std::size_t samples_per_transmission = 0);

}  // namespace rfcvnn
