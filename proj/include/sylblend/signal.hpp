#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace sylblend {

/// One recording (or an envelope/CSV series derived from it).
struct Sequence {
  std::vector<double> samples;
  std::optional<unsigned> sample_rate;  // absent for CSV-sourced series

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  std::span<const double> view() const noexcept { return samples; }

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

struct PreprocessParams {
  bool z_normalize = true;
  std::size_t envelope_window = 256;
  std::size_t envelope_hop = 128;
};

namespace signal {

/// RIFF/WAVE, PCM 16-bit mono. Samples are scaled by 1/32768.
Sequence read_wav(const std::filesystem::path& path);

/// One number per line; an optional first line "sample" is skipped.
Sequence read_sequence_csv(const std::filesystem::path& path);

/// Either reader, chosen by extension (".wav" case-insensitively, else CSV).
Sequence read_any(const std::filesystem::path& path);

Sequence z_normalize(const Sequence& s);

/// Frame-wise RMS: out[k] = rms(samples[k*hop, k*hop+window)).
Sequence envelope(const Sequence& s, std::size_t window, std::size_t hop);

/// z_normalize (if enabled) followed by the envelope. The envelope step is
/// skipped when window is 0.
Sequence preprocess(const Sequence& s, const PreprocessParams& params);

/// Both inputs expanded along one optimal DTW path (|a-b| local cost).
/// Ties prefer the diagonal step, then the step advancing `a`.
std::pair<Sequence, Sequence> dtw_align(const Sequence& a, const Sequence& b);

}  // namespace signal
}  // namespace sylblend
