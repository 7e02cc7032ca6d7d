#include "emocal/ecg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <istream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

#include "emocal/error.hpp"

namespace emocal::ecg {

Dimension dimension_from_string(std::string_view text) {
  if (text == "valence") return Dimension::valence;
  if (text == "arousal") return Dimension::arousal;
  if (text == "dominance") return Dimension::dominance;
  throw Error(ErrorCode::ValidationFailed, "unknown emotion dimension '" + std::string(text) + "'");
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::valence: return "valence";
    case Dimension::arousal: return "arousal";
    case Dimension::dominance: return "dominance";
  }
  return "valence";
}

int rating_for(const Ratings& r, Dimension d) {
  switch (d) {
    case Dimension::valence: return r.valence;
    case Dimension::arousal: return r.arousal;
    case Dimension::dominance: return r.dominance;
  }
  return r.valence;
}

std::vector<double> EcgRecording::channel(int channel) const {
  if (channel != 1 && channel != 2) throw Error(ErrorCode::ValidationFailed, "channel must be 1 or 2");
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& row : samples) out.push_back(row[static_cast<std::size_t>(channel - 1)]);
  return out;
}

void EcgRecording::validate() const {
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw Error(ErrorCode::ValidationFailed, "sample rate must be positive");
  }
  if (static_cast<double>(samples.size()) < 2.0 * sample_rate_hz) {
    throw Error(ErrorCode::ValidationFailed, "recording must hold at least two seconds of signal",
                {{"samples", samples.size()}, {"sample_rate_hz", sample_rate_hz}});
  }
  if (ratings) {
    for (int r : {ratings->valence, ratings->arousal, ratings->dominance}) {
      if (r < 1 || r > 5) throw Error(ErrorCode::ValidationFailed, "ratings must lie in 1..5");
    }
  }
}

void WindowedDataset::append(const WindowedDataset& other) {
  if (windows.empty()) window_size = other.window_size;
  if (!other.windows.empty() && other.window_size != window_size) {
    throw Error(ErrorCode::ShapeMismatch, "cannot merge datasets with different window sizes");
  }
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
}

namespace {

// Maximum over a window of 2*half+1 samples around every n. Near the ends the
// window is shifted rather than clipped so that it always spans the full width.
std::vector<double> rolling_max(const std::vector<double>& x, std::size_t half) {
  const std::size_t n = x.size();
  const std::size_t span = std::min(n, 2 * half + 1);
  std::vector<double> out(n);
  std::deque<std::size_t> dq;
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = std::min(i >= half ? i - half : 0, n - span);
    const std::size_t hi = lo + span - 1;
    while (next <= hi) {
      while (!dq.empty() && x[dq.back()] <= x[next]) dq.pop_back();
      dq.push_back(next++);
    }
    while (dq.front() < lo) dq.pop_front();
    out[i] = x[dq.front()];
  }
  return out;
}

// Whole-sample reflection about the first and last samples.
std::size_t reflect(std::ptrdiff_t i, std::size_t n) {
  const auto last = static_cast<std::ptrdiff_t>(n) - 1;
  if (last == 0) return 0;
  while (i < 0 || i > last) i = i < 0 ? -i : 2 * last - i;
  return static_cast<std::size_t>(i);
}

}  // namespace

std::vector<std::size_t> detect_r_peaks(const EcgRecording& rec, int channel, const DetectorConfig& cfg) {
  rec.validate();
  const std::vector<double> x = rec.channel(channel);
  const std::size_t n = x.size();
  const double fs = rec.sample_rate_hz;

  // Five-point derivative, squared; the signal is mirrored at both ends.
  auto at = [&](std::ptrdiff_t i) { return x[reflect(i, n)]; };
  std::vector<double> energy(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    const double d = (-at(k - 2) - 2.0 * at(k - 1) + 2.0 * at(k + 1) + at(k + 2)) / 8.0;
    energy[i] = d * d;
  }

  // Centered moving-window integration.
  const auto width = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(cfg.integration_ms * 1e-3 * fs)));
  const std::size_t half = width / 2;
  const std::size_t span = 2 * half + 1;
  std::vector<double> prefix(n + span, 0.0);
  for (std::size_t j = 0; j + 1 < prefix.size(); ++j) {
    prefix[j + 1] = prefix[j] + energy[reflect(static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>(half), n)];
  }
  std::vector<double> integrated(n);
  for (std::size_t i = 0; i < n; ++i) integrated[i] = (prefix[i + span] - prefix[i]) / static_cast<double>(span);

  const auto window_half = static_cast<std::size_t>(std::lround(cfg.rolling_max_s * fs / 2.0));
  const std::vector<double> local_max = rolling_max(integrated, window_half);
  const auto refractory = static_cast<std::size_t>(std::lround(cfg.refractory_ms * 1e-3 * fs));

  std::vector<std::size_t> peaks;
  std::size_t i = 0;
  while (i < n) {
    const double threshold = std::max(cfg.threshold_fraction * local_max[i], cfg.min_energy);
    if (integrated[i] <= threshold) {
      ++i;
      continue;
    }
    std::size_t end = i;
    while (end + 1 < n && integrated[end + 1] > std::max(cfg.threshold_fraction * local_max[end + 1], cfg.min_energy)) {
      ++end;
    }
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(n - 1, end + half);
    std::size_t best = lo;
    for (std::size_t k = lo; k <= hi; ++k) {
      if (x[k] > x[best]) best = k;
    }
    if (!peaks.empty() && best <= peaks.back()) {
      // Region overlaps the previous search window; nothing new.
    } else if (!peaks.empty() && best - peaks.back() < refractory) {
      if (x[best] > x[peaks.back()]) peaks.back() = best;
    } else {
      peaks.push_back(best);
    }
    i = end + 1;
  }
  if (peaks.empty()) {
    throw Error(ErrorCode::NoPeaksFound, "no R-peaks found (flat or sub-threshold signal)", {{"channel", channel}});
  }
  return peaks;
}

HrSeries peaks_to_hr(std::span<const std::size_t> peaks, double sample_rate_hz) {
  if (peaks.size() < 2) {
    throw Error(ErrorCode::TooFewPeaks, "at least two R-peaks are needed for an RR interval",
                {{"peaks", peaks.size()}});
  }
  HrSeries hr;
  hr.peak_indices.assign(peaks.begin(), peaks.end());
  for (std::size_t k = 0; k + 1 < peaks.size(); ++k) {
    if (peaks[k + 1] <= peaks[k]) throw Error(ErrorCode::ValidationFailed, "peak indices must be strictly increasing");
    const double rr = static_cast<double>(peaks[k + 1] - peaks[k]) / sample_rate_hz;
    const double bpm = 60.0 / rr;
    if (bpm > kMinPlausibleBpm && bpm < kMaxPlausibleBpm) hr.bpm.push_back(bpm);
  }
  return hr;
}

std::vector<double> normalize(std::span<const double> series) {
  if (series.empty()) throw Error(ErrorCode::EmptyInput, "cannot normalize an empty series");
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  const double min = *lo;
  const double range = *hi - *lo;
  std::vector<double> out(series.size(), 0.0);
  if (range > 0.0) {
    for (std::size_t i = 0; i < series.size(); ++i) out[i] = (series[i] - min) / range;
  }
  return out;
}

std::vector<std::vector<double>> zero_pad(const std::vector<std::vector<double>>& series_set) {
  if (series_set.empty()) throw Error(ErrorCode::EmptyInput, "nothing to pad");
  std::size_t longest = 0;
  for (const auto& s : series_set) longest = std::max(longest, s.size());
  auto out = series_set;
  for (auto& s : out) s.resize(longest, 0.0);
  return out;
}

Level binarize_rating(int rating) {
  if (rating < 1 || rating > 5) {
    throw Error(ErrorCode::OutOfRange, "rating must lie in 1..5", {{"rating", rating}});
  }
  return rating >= 4 ? Level::high : Level::low;
}

WindowedDataset make_windows(std::span<const double> series, Level label, std::size_t w) {
  if (w == 0) throw Error(ErrorCode::ValidationFailed, "window size must be positive");
  if (series.size() <= w) {
    throw Error(ErrorCode::SeriesTooShort, "series must be longer than the window",
                {{"length", series.size()}, {"window", w}});
  }
  WindowedDataset out;
  out.window_size = w;
  for (std::size_t i = 0; i + w < series.size(); ++i) {
    out.windows.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(i),
                             series.begin() + static_cast<std::ptrdiff_t>(i + w));
    out.labels.push_back(label);
  }
  return out;
}

WindowedDataset make_windows(const HrSeries& hr, Level label, std::size_t w) { return make_windows(hr.bpm, label, w); }

SyntheticEcg generate_synthetic_ecg(std::span<const double> bpm_profile, const SyntheticEcgOptions& opts) {
  for (double bpm : bpm_profile) {
    if (!(bpm > 30.0 && bpm < 220.0)) {
      throw Error(ErrorCode::ValidationFailed, "synthetic bpm must lie in (30, 220)", {{"bpm", bpm}});
    }
  }
  const double fs = opts.sample_rate_hz;
  const double duration = static_cast<double>(bpm_profile.size());
  const auto m = static_cast<std::size_t>(std::llround(duration * fs));

  SyntheticEcg out;
  double t = 0.0;
  while (t < duration) {
    const auto idx = static_cast<std::size_t>(std::llround(t * fs));
    if (idx >= m) break;
    out.planted_peaks.push_back(idx);
    t += 60.0 / bpm_profile[static_cast<std::size_t>(t)];
  }

  std::vector<double> pulse(m, 0.0);
  const double sigma = opts.qrs_sigma_s * fs;
  const auto reach = static_cast<std::ptrdiff_t>(std::ceil(6.0 * sigma));
  for (std::size_t p : out.planted_peaks) {
    const auto c = static_cast<std::ptrdiff_t>(p);
    for (std::ptrdiff_t k = std::max<std::ptrdiff_t>(0, c - reach);
         k <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(m) - 1, c + reach); ++k) {
      const double z = static_cast<double>(k - c) / sigma;
      pulse[static_cast<std::size_t>(k)] += std::exp(-0.5 * z * z);
    }
  }

  std::mt19937_64 rng(opts.seed);
  auto noise_std = [&](double gain) {
    if (!std::isfinite(opts.snr_db)) return 0.0;
    double power = 0.0;
    for (double v : pulse) power += gain * gain * v * v;
    power /= static_cast<double>(m);
    return std::sqrt(power / std::pow(10.0, opts.snr_db / 10.0));
  };
  const double sd1 = noise_std(1.0);
  const double sd2 = noise_std(opts.channel2_gain);
  std::normal_distribution<double> gauss(0.0, 1.0);

  out.recording.sample_rate_hz = fs;
  out.recording.ratings = opts.ratings;
  out.recording.samples.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double n1 = sd1 > 0 ? sd1 * gauss(rng) : 0.0;
    const double n2 = sd2 > 0 ? sd2 * gauss(rng) : 0.0;
    out.recording.samples[i] = {pulse[i] + n1, opts.channel2_gain * pulse[i] + n2};
  }
  return out;
}

SyntheticEcg generate_synthetic_ecg(std::span<const double> bpm_profile, double sample_rate_hz, double snr_db,
                                    std::uint64_t seed) {
  SyntheticEcgOptions opts;
  opts.sample_rate_hz = sample_rate_hz;
  opts.snr_db = snr_db;
  opts.seed = seed;
  return generate_synthetic_ecg(bpm_profile, opts);
}

EcgRecording read_recording(std::istream& in) {
  EcgRecording rec;
  std::string header;
  if (!std::getline(in, header)) throw Error(ErrorCode::ParseError, "recording file is empty");
  std::istringstream hs(header);
  if (!(hs >> rec.sample_rate_hz)) throw Error(ErrorCode::ParseError, "header must start with the sample rate");
  Ratings r;
  if (hs >> r.valence) {
    if (!(hs >> r.arousal >> r.dominance)) throw Error(ErrorCode::ParseError, "header ratings need three values");
    rec.ratings = r;
  }
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::array<double, 2> row{};
    if (!(ls >> row[0] >> row[1])) {
      throw Error(ErrorCode::ParseError, "bad sample row", {{"line", line_no}});
    }
    rec.samples.push_back(row);
  }
  rec.validate();
  return rec;
}

EcgRecording load_recording(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open recording '" + path + "'");
  return read_recording(in);
}

void write_recording(std::ostream& out, const EcgRecording& rec) {
  out << std::setprecision(10) << rec.sample_rate_hz;
  if (rec.ratings) out << ' ' << rec.ratings->valence << ' ' << rec.ratings->arousal << ' ' << rec.ratings->dominance;
  out << '\n';
  for (const auto& row : rec.samples) out << row[0] << ' ' << row[1] << '\n';
}

void save_recording(const std::string& path, const EcgRecording& rec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ValidationFailed, "cannot write recording '" + path + "'");
  write_recording(out, rec);
}

std::vector<double> normalized_hr(const EcgRecording& rec, int channel) {
  const auto peaks = detect_r_peaks(rec, channel);
  const auto hr = peaks_to_hr(peaks, rec.sample_rate_hz);
  if (hr.bpm.empty()) throw Error(ErrorCode::TooFewPeaks, "no plausible RR intervals in recording");
  return normalize(hr.bpm);
}

}  // namespace emocal::ecg
