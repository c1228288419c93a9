#include "sylblend/signal.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>

#include "sylblend/error.hpp"

namespace sylblend::signal {

namespace {

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double mean_of(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

}  // namespace

Sequence read_wav(const std::filesystem::path& path) {
  const auto bytes = slurp(path);
  const unsigned char* data = bytes.data();
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
    throw Error(ErrorCode::FormatError, "not a RIFF/WAVE file: " + path.string());

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > n) throw Error(ErrorCode::FormatError, "truncated chunk in " + path.string());

    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw Error(ErrorCode::FormatError, "fmt chunk too small");
      format = le16(data + body);
      channels = le16(data + body + 2);
      rate = le32(data + body + 4);
      bits = le16(data + body + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw Error(ErrorCode::FormatError, "data chunk before fmt chunk");
      if (format != 1 || bits != 16 || channels != 1)
        throw Error(ErrorCode::UnsupportedFormat,
                    "only PCM 16-bit mono is supported (format " + std::to_string(format) +
                        ", " + std::to_string(channels) + " channels, " +
                        std::to_string(bits) + " bits)");
      if (rate == 0) throw Error(ErrorCode::FormatError, "zero sample rate");
      Sequence out;
      out.sample_rate = rate;
      const std::size_t frames = size / 2;
      out.samples.reserve(frames);
      for (std::size_t i = 0; i < frames; ++i) {
        const auto raw = static_cast<std::int16_t>(le16(data + body + 2 * i));
        out.samples.push_back(static_cast<double>(raw) / 32768.0);
      }
      return out;
    }
    pos = body + size + (size & 1u);  // chunks are word aligned
  }
  throw Error(ErrorCode::FormatError, "missing fmt or data chunk in " + path.string());
}

Sequence read_sequence_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  Sequence out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto field = trim(line);
    if (field.empty()) continue;
    if (lineno == 1 && field == "sample") continue;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(value))
      throw Error(ErrorCode::ParseError, "not a finite number: '" + std::string(field) + "'",
                  lineno);
    out.samples.push_back(value);
  }
  return out;
}

Sequence read_any(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".wav" ? read_wav(path) : read_sequence_csv(path);
}

Sequence z_normalize(const Sequence& s) {
  if (s.size() < 2) throw Error(ErrorCode::TooShort, "z_normalize needs at least 2 samples");
  const double mean = mean_of(s.samples);
  double ss = 0.0;
  for (double x : s.samples) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(s.size()));
  if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVariance, "constant sequence");

  Sequence out{.samples = {}, .sample_rate = s.sample_rate};
  out.samples.reserve(s.size());
  for (double x : s.samples) out.samples.push_back((x - mean) / sd);
  return out;
}

Sequence envelope(const Sequence& s, std::size_t window, std::size_t hop) {
  if (window == 0 || hop == 0) throw Error(ErrorCode::BadParam, "window and hop must be positive");
  if (s.size() < window)
    throw Error(ErrorCode::TooShort, "sequence of " + std::to_string(s.size()) +
                                         " samples is shorter than window " +
                                         std::to_string(window));
  const std::size_t frames = (s.size() - window) / hop + 1;
  Sequence out;
  if (s.sample_rate) out.sample_rate = std::max(1u, static_cast<unsigned>(*s.sample_rate / hop));
  out.samples.reserve(frames);
  for (std::size_t k = 0; k < frames; ++k) {
    double acc = 0.0;
    for (std::size_t i = k * hop; i < k * hop + window; ++i) acc += s.samples[i] * s.samples[i];
    out.samples.push_back(std::sqrt(acc / static_cast<double>(window)));
  }
  return out;
}

Sequence preprocess(const Sequence& s, const PreprocessParams& params) {
  if (params.envelope_window != 0 && params.envelope_hop > params.envelope_window)
    throw Error(ErrorCode::BadParam, "envelope hop exceeds window");
  Sequence out = params.z_normalize ? z_normalize(s) : s;
  if (params.envelope_window != 0) out = envelope(out, params.envelope_window, params.envelope_hop);
  return out;
}

std::pair<Sequence, Sequence> dtw_align(const Sequence& a, const Sequence& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "dtw_align on empty sequence");
  const std::size_t n = a.size(), m = b.size();
  const std::size_t stride = m + 1;
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost((n + 1) * stride, inf);
  cost[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const double best = std::min({cost[(i - 1) * stride + j - 1], cost[(i - 1) * stride + j],
                                    cost[i * stride + j - 1]});
      cost[i * stride + j] = std::abs(a.samples[i - 1] - b.samples[j - 1]) + best;
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> path;
  path.reserve(n + m);
  std::size_t i = n, j = m;
  while (true) {
    path.emplace_back(i - 1, j - 1);
    if (i == 1 && j == 1) break;
    const double diag = cost[(i - 1) * stride + j - 1];
    const double up = cost[(i - 1) * stride + j];    // previous step advanced a
    const double left = cost[i * stride + j - 1];    // previous step advanced b
    if (diag <= up && diag <= left) {
      --i;
      --j;
    } else if (up <= left) {
      --i;
    } else {
      --j;
    }
  }

  Sequence out_a{.samples = {}, .sample_rate = a.sample_rate};
  Sequence out_b{.samples = {}, .sample_rate = b.sample_rate};
  out_a.samples.reserve(path.size());
  out_b.samples.reserve(path.size());
  for (auto it = path.rbegin(); it != path.rend(); ++it) {
    out_a.samples.push_back(a.samples[it->first]);
    out_b.samples.push_back(b.samples[it->second]);
  }
  return {std::move(out_a), std::move(out_b)};
}

}  // namespace sylblend::signal
