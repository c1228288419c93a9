#pragma once
// Reference implementations and fixtures shared by the test binaries. The
// oracles are written independently of the library kernels (enumeration,
// textbook tables) so agreement is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "sylblend/dataprep.hpp"
#include "sylblend/matrix.hpp"
#include "sylblend/metrics.hpp"

namespace testsupport {

/// Minimum warping-path cost by enumerating every monotone path.
inline double dtw_enumerate(const std::vector<double>& a, const std::vector<double>& b) {
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += std::abs(a[i] - b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
    if (i + 1 < a.size()) walk(i + 1, j, acc);
    if (j + 1 < b.size()) walk(i, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// Every optimal path, expanded into aligned pairs.
inline std::vector<std::pair<std::vector<double>, std::vector<double>>> dtw_optimal_alignments(
    const std::vector<double>& a, const std::vector<double>& b) {
  const double best = dtw_enumerate(a, b);
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  std::vector<double> pa, pb;
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j, double acc) {
    acc += std::abs(a[i] - b[j]);
    pa.push_back(a[i]);
    pb.push_back(b[j]);
    if (i + 1 == a.size() && j + 1 == b.size()) {
      if (acc == best) out.emplace_back(pa, pb);
    } else {
      if (i + 1 < a.size() && j + 1 < b.size()) walk(i + 1, j + 1, acc);
      if (i + 1 < a.size()) walk(i + 1, j, acc);
      if (j + 1 < b.size()) walk(i, j + 1, acc);
    }
    pa.pop_back();
    pb.pop_back();
  };
  walk(0, 0, 0.0);
  return out;
}

/// Textbook Levenshtein distance on exact equality.
inline std::size_t levenshtein(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) t[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) t[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1, t[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
  return t[a.size()][b.size()];
}

/// Textbook longest common subsequence on exact equality.
inline std::size_t lcs(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t[a.size()][b.size()];
}

/// All sequences of length 1..max_len over an alphabet.
inline std::vector<std::vector<double>> all_sequences(const std::vector<double>& alphabet, std::size_t max_len) {
  std::vector<std::vector<double>> out;
  std::vector<std::vector<double>> frontier{{}};
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::vector<std::vector<double>> next;
    for (const auto& s : frontier)
      for (double v : alphabet) {
        auto t = s;
        t.push_back(v);
        next.push_back(t);
      }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

inline std::vector<double> random_sequence(std::mt19937_64& gen, std::size_t min_len, std::size_t max_len) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::normal_distribution<double> value(0.0, 1.0);
  std::vector<double> s(len(gen));
  for (auto& v : s) v = value(gen);
  return s;
}

inline std::vector<double> random_int_sequence(std::mt19937_64& gen, std::size_t max_len, int alphabet) {
  std::uniform_int_distribution<std::size_t> len(0, max_len);
  std::uniform_int_distribution<int> value(0, alphabet - 1);
  std::vector<double> s(len(gen));
  for (auto& v : s) v = value(gen);
  return s;
}

/// Distance from p to the closest segment between two rows of `pts`.
inline double min_segment_distance(std::span<const double> p, const std::vector<std::vector<double>>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i; j < pts.size(); ++j) {
      const auto& x = pts[i];
      const auto& y = pts[j];
      double dd = 0, dp = 0;
      for (std::size_t c = 0; c < p.size(); ++c) {
        dd += (y[c] - x[c]) * (y[c] - x[c]);
        dp += (p[c] - x[c]) * (y[c] - x[c]);
      }
      const double t = dd > 0 ? std::clamp(dp / dd, 0.0, 1.0) : 0.0;
      double dist = 0;
      for (std::size_t c = 0; c < p.size(); ++c) {
        const double q = x[c] + t * (y[c] - x[c]);
        dist += (p[c] - q) * (p[c] - q);
      }
      best = std::min(best, std::sqrt(dist));
    }
  return best;
}

/// Within-cluster sum of squares of the best 2-partition, by brute force.
inline std::pair<double, std::vector<int>> best_two_partition(const std::vector<std::vector<double>>& pts) {
  const std::size_t n = pts.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_assign;
  for (std::uint32_t mask = 1; mask + 1 < (1u << n); ++mask) {
    double cost = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<double> mean(pts[0].size(), 0.0);
      std::size_t count = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side)) {
          for (std::size_t c = 0; c < mean.size(); ++c) mean[c] += pts[i][c];
          ++count;
        }
      for (auto& m : mean) m /= count;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1u) == static_cast<unsigned>(side))
          for (std::size_t c = 0; c < mean.size(); ++c) cost += (pts[i][c] - mean[c]) * (pts[i][c] - mean[c]);
    }
    if (cost < best) {
      best = cost;
      best_assign.assign(n, 0);
      for (std::size_t i = 0; i < n; ++i) best_assign[i] = (mask >> i) & 1u;
    }
  }
  return {best, best_assign};
}

struct WavSpec {
  std::string magic = "RIFF";
  std::uint16_t format = 1;
  std::uint16_t channels = 1;
  std::uint32_t rate = 8000;
  std::uint16_t bits = 16;
  bool extra_chunk = false;  // a LIST chunk before "data"
};

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>(v >> 8));
}

inline std::string wav_bytes(const std::vector<std::int16_t>& samples, const WavSpec& w = {}) {
  std::string data;
  for (auto v : samples) put_u16(data, static_cast<std::uint16_t>(v));
  std::string body = "WAVE";
  body += "fmt ";
  put_u32(body, 16);
  put_u16(body, w.format);
  put_u16(body, w.channels);
  put_u32(body, w.rate);
  put_u32(body, w.rate * w.channels * (w.bits / 8));
  put_u16(body, static_cast<std::uint16_t>(w.channels * (w.bits / 8)));
  put_u16(body, w.bits);
  if (w.extra_chunk) {
    body += "LIST";
    put_u32(body, 3);
    body += "abc";
    body.push_back('\0');  // pad byte for the odd chunk size
  }
  body += "data";
  put_u32(body, static_cast<std::uint32_t>(data.size()));
  body += data;
  std::string out = w.magic;
  put_u32(out, static_cast<std::uint32_t>(body.size()));
  return out + body;
}

inline void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream f(p, std::ios::binary);
  f << bytes;
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("sylblend_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Two unit-variance Gaussian blobs in d dimensions whose means differ by
/// `gap` standard deviations on every feature; labels drawn by fair coin.
inline void gaussian_task(std::uint64_t seed, std::size_t n, double gap, std::size_t d,
                          sylblend::FeatureMatrix& x, sylblend::Labels& y) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  x = sylblend::FeatureMatrix::with_columns(d);
  y.clear();
  std::vector<double> row(d);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = coin(gen) ? 1 : 0;
    for (auto& v : row) v = z(gen) + (label ? gap : 0.0);
    x.push_row(row);
    y.push_back(label);
  }
}

}  // namespace testsupport
