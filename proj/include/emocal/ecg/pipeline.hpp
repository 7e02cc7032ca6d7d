#pragma once

// Heart-rate extraction from two-channel ECG and the preparation steps that
// turn HR series into labeled training windows.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emocal/domain.hpp"

namespace emocal::ecg {

/// Self-reported valence/arousal/dominance on a 1..5 scale.
struct Ratings {
  int valence = 3;
  int arousal = 3;
  int dominance = 3;

  bool operator==(const Ratings&) const = default;
};

enum class Dimension { valence, arousal, dominance };

Dimension dimension_from_string(std::string_view text);
std::string_view to_string(Dimension d);
int rating_for(const Ratings& r, Dimension d);

struct EcgRecording {
  std::vector<std::array<double, 2>> samples;  // M rows, one column per channel
  double sample_rate_hz = 256.0;
  std::optional<Ratings> ratings;

  std::size_t size() const { return samples.size(); }
  /// Copy of one channel; `channel` is 1 or 2.
  std::vector<double> channel(int channel) const;
  /// At least two seconds of signal, positive sample rate, ratings in 1..5.
  void validate() const;
};

struct HrSeries {
  std::vector<double> bpm;
  std::vector<std::size_t> peak_indices;
};

struct WindowedDataset {
  std::vector<std::vector<double>> windows;
  std::vector<Level> labels;
  std::size_t window_size = 0;

  std::size_t size() const { return windows.size(); }
  void append(const WindowedDataset& other);
};

struct DetectorConfig {
  double integration_ms = 150.0;
  double threshold_fraction = 0.5;
  double rolling_max_s = 2.0;
  double refractory_ms = 200.0;
  // Integrated energy at or below this is treated as a flat signal.
  double min_energy = 1e-12;
};

/// R-peak sample indices, strictly increasing. Differentiation, squaring,
/// moving-window integration, then an adaptive threshold at a fraction of the
/// rolling maximum; each supra-threshold region contributes the raw-signal
/// maximum inside it, subject to a refractory period.
/// Throws NoPeaksFound on flat or sub-threshold input.
std::vector<std::size_t> detect_r_peaks(const EcgRecording& rec, int channel = 1, const DetectorConfig& cfg = {});

inline constexpr double kMinPlausibleBpm = 20.0;
inline constexpr double kMaxPlausibleBpm = 260.0;

/// bpm[k] = 60 / RR_k seconds; intervals outside (20, 260) bpm are dropped.
/// Throws TooFewPeaks with fewer than two peaks.
HrSeries peaks_to_hr(std::span<const std::size_t> peaks, double sample_rate_hz);

/// Min-max scaling to [0,1]; a constant series maps to zeros.
std::vector<double> normalize(std::span<const double> series);

/// Right-pads every series with zeros to the longest length in the set.
std::vector<std::vector<double>> zero_pad(const std::vector<std::vector<double>>& series_set);

/// 4 and 5 are high; 1..3 low. Throws OutOfRange outside 1..5.
Level binarize_rating(int rating);

inline constexpr std::size_t kDefaultWindow = 32;

/// Sliding windows [i, i+w) for i in [0, len - w), all labeled `label`:
/// each window has a following sample, so there are len - w windows.
/// Throws SeriesTooShort unless len > w.
WindowedDataset make_windows(std::span<const double> series, Level label, std::size_t w = kDefaultWindow);
WindowedDataset make_windows(const HrSeries& hr, Level label, std::size_t w = kDefaultWindow);

struct SyntheticEcg {
  EcgRecording recording;
  std::vector<std::size_t> planted_peaks;
};

struct SyntheticEcgOptions {
  double sample_rate_hz = 256.0;
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  double qrs_sigma_s = 0.010;
  double channel2_gain = 0.8;
  std::optional<Ratings> ratings;
};

/// Gaussian-QRS pulse train. bpm_profile[k] is the rate during second k, so
/// the recording lasts bpm_profile.size() seconds; the first beat is at t=0.
/// White noise is added per channel at the requested SNR (mean signal power
/// over noise power); planted peaks do not depend on the noise.
SyntheticEcg generate_synthetic_ecg(std::span<const double> bpm_profile, const SyntheticEcgOptions& opts = {});
SyntheticEcg generate_synthetic_ecg(std::span<const double> bpm_profile, double sample_rate_hz, double snr_db,
                                    std::uint64_t seed = 1);

// Text format: a header line "<sample_rate_hz> [valence arousal dominance]"
// followed by M lines of two whitespace-separated reals.
EcgRecording read_recording(std::istream& in);
EcgRecording load_recording(const std::string& path);
void write_recording(std::ostream& out, const EcgRecording& rec);
void save_recording(const std::string& path, const EcgRecording& rec);

/// Peaks (channel), HR, and min-max normalization in one step.
std::vector<double> normalized_hr(const EcgRecording& rec, int channel = 1);

}  // namespace emocal::ecg
