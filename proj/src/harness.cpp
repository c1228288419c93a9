#include "sylblend/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string_view>
#include <mutex>
#include <thread>

#include "sylblend/error.hpp"
#include "sylblend/rng.hpp"

namespace sylblend::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

// Shortest representation that parses back to the same double.
void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, ptr);
}

struct ColumnScaler {
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> scale{};

  static ColumnScaler fit(const Dataset& d) {
    ColumnScaler s;
    s.scale.fill(1.0);
    if (d.empty()) return s;
    const auto n = static_cast<double>(d.size());
    for (const auto& r : d.rows) {
      const auto f = r.features();
      for (std::size_t k = 0; k < kFeatureCount; ++k) s.mean[k] += f[k];
    }
    for (auto& m : s.mean) m /= n;
    std::array<double, kFeatureCount> ss{};
    for (const auto& r : d.rows) {
      const auto f = r.features();
      for (std::size_t k = 0; k < kFeatureCount; ++k) ss[k] += (f[k] - s.mean[k]) * (f[k] - s.mean[k]);
    }
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      const double sd = std::sqrt(ss[k] / n);
      s.scale[k] = sd > 0.0 ? sd : 1.0;
    }
    return s;
  }

  Dataset apply(const Dataset& d) const {
    Dataset out = d;
    for (auto& r : out.rows) {
      auto f = r.features();
      for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = (f[k] - mean[k]) / scale[k];
      r = FeatureRow::from_features(f, r.label);
    }
    return out;
  }
};

// Stable per-configuration seed codes, independent of pool order.
std::uint64_t baseline_code(ClassifierKind kind) { return 0x100 + static_cast<std::uint64_t>(kind); }

std::uint64_t ensemble_code(ClassifierKind meta, const std::vector<ClassifierKind>& bases) {
  std::uint64_t mask = 0;
  for (auto b : bases) mask |= 1ULL << static_cast<unsigned>(b);
  return 0x10000 + (static_cast<std::uint64_t>(meta) << 8) + mask;
}

void run_parallel(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  workers.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string markdown_table(const std::vector<std::string>& header,
                           const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) width[c] = std::max<std::size_t>(3, header[c].size());
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    out += "|";
    for (std::size_t c = 0; c < cells.size(); ++c) out += " " + pad(cells[c], width[c]) + " |";
    out += "\n";
  };
  line(header);
  out += "|";
  for (auto w : width) out += " " + std::string(w, '-') + " |";
  out += "\n";
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  Dataset d;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto content = trim(line);
    if (!header_seen) {
      if (content != kDatasetHeader)
        throw Error(ErrorCode::FormatError,
                    "expected header '" + std::string(kDatasetHeader) + "', got '" + std::string(content) + "'",
                    lineno);
      header_seen = true;
      continue;
    }
    if (content.empty()) continue;
    const auto fields = split_fields(content);
    if (fields.size() != kFeatureCount + 1)
      throw Error(ErrorCode::FormatError, "expected 8 fields, got " + std::to_string(fields.size()), lineno);
    std::array<double, kFeatureCount> f{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      const auto field = fields[k];
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), f[k]);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw Error(ErrorCode::ParseError, "not a number: '" + std::string(field) + "'", lineno);
      if (!std::isfinite(f[k]))
        throw Error(ErrorCode::NonFiniteFeature, "non-finite value in column " + std::string(kFeatureNames[k]),
                    lineno);
    }
    const auto label = fields[kFeatureCount];
    if (label != "0" && label != "1")
      throw Error(ErrorCode::LabelError, "label must be 0 or 1, got '" + std::string(label) + "'", lineno);
    d.rows.push_back(FeatureRow::from_features(f, label == "1" ? 1 : 0));
  }
  if (!header_seen) throw Error(ErrorCode::FormatError, "missing header line");
  return d;
}

Dataset load_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset_csv(buf.str());
}

std::string dataset_to_csv(const Dataset& d) {
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& r : d.rows) {
    for (double v : r.features()) {
      append_double(out, v);
      out += ',';
    }
    out += r.label == 1 ? "1\n" : "0\n";
  }
  return out;
}

void save_dataset_csv(const Dataset& d, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << dataset_to_csv(d);
}

std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s) {
  const auto parts = partition_rows(d.labels(), s.test_fraction, s.stratified, s.seed);
  return {d.subset(parts.kept), d.subset(parts.held_out)};
}

double accuracy(const Labels& predicted, const Labels& truth) {
  if (predicted.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, "prediction and truth lengths differ");
  if (truth.empty()) throw Error(ErrorCode::EmptyInput, "accuracy of nothing");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

Dataset synth_dataset(const SynthParams& p) {
  if (p.rows < 10) throw Error(ErrorCode::BadParam, "synthetic dataset needs at least 10 rows");
  if (!(p.minority_fraction > 0.0 && p.minority_fraction < 0.5))
    throw Error(ErrorCode::BadParam, "minority fraction must lie in (0, 0.5)");
  if (!(p.separation >= 0.0) || !std::isfinite(p.separation))
    throw Error(ErrorCode::BadParam, "separation must be finite and non-negative");

  // Class 0 (distorted) sits at +separation/2 along distance-type features
  // and -separation/2 along similarity-type ones; class 1 mirrors it.
  constexpr std::array<double, kFeatureCount> direction = {+1, -1, +1, +1, +1, -1, +1};
  constexpr std::array<double, kFeatureCount> offset = {20.0, 0.5, 3.0, 0.5, 15.0, 0.5, 25.0};
  constexpr std::array<double, kFeatureCount> unit = {4.0, 0.15, 0.6, 0.1, 3.0, 0.1, 5.0};
  constexpr double kCoupling = 0.8;
  const double residual = std::sqrt(1.0 - kCoupling * kCoupling);

  const auto zeros = static_cast<std::size_t>(std::llround(static_cast<double>(p.rows) * p.minority_fraction));
  Labels labels(p.rows, 1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(zeros), 0);
  Rng rng(p.seed);
  rng.shuffle(labels.begin(), labels.end());

  Dataset d;
  d.phoneme_tag = "synthetic";
  d.rows.reserve(p.rows);
  for (int label : labels) {
    std::array<double, kFeatureCount> z{};
    for (auto& v : z) v = rng.normal();
    z[2] = kCoupling * z[0] + residual * z[2];   // minkowski follows dtw
    z[5] = -kCoupling * z[3] + residual * z[5];  // lcss mirrors edr

    const double sign = label == 0 ? 0.5 : -0.5;
    std::array<double, kFeatureCount> latent{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) latent[k] = sign * p.separation * direction[k] + z[k];

    if (p.region_noise) {
      const bool distance_noisy = rng.uniform() < 0.5;
      const std::array<std::size_t, 3> noisy =
          distance_noisy ? std::array<std::size_t, 3>{0, 2, 4} : std::array<std::size_t, 3>{1, 3, 5};
      for (auto k : noisy) latent[k] += 2.0 * z[k];
      latent[6] = (distance_noisy ? 2.0 : -2.0) + z[6];
    }

    std::array<double, kFeatureCount> f{};
    for (std::size_t k = 0; k < kFeatureCount; ++k) f[k] = offset[k] + unit[k] * latent[k];
    d.rows.push_back(FeatureRow::from_features(f, label));
  }
  return d;
}

std::vector<std::vector<ClassifierKind>> base_subsets(const std::vector<ClassifierKind>& pool,
                                                      const std::vector<std::size_t>& sizes) {
  std::vector<std::size_t> ordered = sizes;
  std::sort(ordered.begin(), ordered.end());
  ordered.erase(std::unique(ordered.begin(), ordered.end()), ordered.end());
  std::vector<std::vector<ClassifierKind>> out;
  const std::size_t n = pool.size();
  for (auto size : ordered) {
    if (size == 0 || size > n) continue;
    std::vector<std::size_t> idx(size);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    while (true) {
      std::vector<ClassifierKind> subset;
      for (auto i : idx) subset.push_back(pool[i]);
      out.push_back(std::move(subset));
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t q = pos; q < size; ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  return out;
}

SweepData prepare_sweep_data(const Dataset& d, const SweepOptions& options) {
  d.validate();
  const SplitSpec outer{.test_fraction = options.test_fraction, .stratified = true,
                        .seed = derive_seed(options.seed, 1)};
  auto [train, test] = split(d, outer);
  if (options.standardize) {
    const auto scaler = ColumnScaler::fit(train);
    train = scaler.apply(train);
    test = scaler.apply(test);
  }
  SmoteParams smote = options.smote;
  smote.seed = derive_seed(options.seed, 2);
  SweepData data{.train = train, .test = test, .variants = dataprep::make_variants(train, smote, options.fence_k)};
  return data;
}

SweepReport sweep(const Dataset& d, const SweepOptions& options) {
  if (options.pool.empty()) throw Error(ErrorCode::EmptyPool, "sweep pool is empty");
  const SweepData data = prepare_sweep_data(d, options);
  const FeatureMatrix test_x = data.test.features();
  const Labels test_y = data.test.labels();
  const auto subsets = base_subsets(options.pool, options.subset_sizes);

  SweepReport report;
  report.options = options;
  report.dataset_rows = d.size();

  struct Job {
    Variant variant;
    ClassifierKind kind;                 // baseline kind or meta kind
    std::vector<ClassifierKind> bases;   // empty for baselines
  };
  std::vector<Job> jobs;
  for (auto v : kAllVariants)
    for (auto kind : options.pool) jobs.push_back({v, kind, {}});
  const std::size_t n_baselines = jobs.size();
  for (auto v : kAllVariants)
    for (auto meta : options.pool)
      for (const auto& subset : subsets) jobs.push_back({v, meta, subset});

  report.baselines.resize(n_baselines);
  report.ensembles.resize(jobs.size() - n_baselines);

  run_parallel(jobs.size(), options.threads, [&](std::size_t j) {
    const Job& job = jobs[j];
    const Dataset& train = data.variants.get(job.variant);
    const FeatureMatrix train_x = train.features();
    const Labels train_y = train.labels();
    const std::uint64_t variant_seed = derive_seed(options.seed, 16 + static_cast<std::uint64_t>(job.variant));
    if (job.bases.empty()) {
      const std::uint64_t seed = derive_seed(variant_seed, baseline_code(job.kind));
      const auto model = learners::fit(ClassifierSpec::defaults(job.kind, seed), train_x, train_y);
      report.baselines[j] = {job.variant, job.kind, accuracy(learners::predict(model, test_x), test_y),
                             train.size(), data.test.size(), seed};
      return;
    }
    const std::uint64_t seed = derive_seed(variant_seed, ensemble_code(job.kind, job.bases));
    BlendConfig config = blend::make_config(job.kind, job.bases, seed);
    config.val_fraction = options.val_fraction;
    config.meta_feature_mode = options.meta_feature_mode;
    const auto ensemble = blend::fit_ensemble(config, train_x, train_y);
    report.ensembles[j - n_baselines] = {job.variant,  job.kind,
                                         job.bases,    accuracy(blend::predict_ensemble(ensemble, test_x), test_y),
                                         train.size(), data.test.size(),
                                         seed};
  });
  return report;
}

std::string join_kinds(const std::vector<ClassifierKind>& kinds, char sep) {
  std::string out;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) out += sep;
    out += to_string(kinds[i]);
  }
  return out;
}

std::vector<VariantSummary> best_of(const SweepReport& report) {
  if (report.baselines.empty() && report.ensembles.empty())
    throw Error(ErrorCode::EmptyInput, "empty sweep report");

  auto ensemble_better = [](const EnsembleRow& a, const EnsembleRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    if (a.bases.size() != b.bases.size()) return a.bases.size() < b.bases.size();
    const std::string ka = std::string(to_string(a.meta)) + "|" + join_kinds(a.bases);
    const std::string kb = std::string(to_string(b.meta)) + "|" + join_kinds(b.bases);
    return ka < kb;
  };
  auto baseline_better = [](const BaselineRow& a, const BaselineRow& b) {
    if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
    return to_string(a.kind) < to_string(b.kind);
  };

  std::vector<VariantSummary> out;
  for (auto v : kAllVariants) {
    VariantSummary s;
    s.variant = v;
    for (const auto& b : report.baselines)
      if (b.variant == v && (!s.best_baseline || baseline_better(b, *s.best_baseline))) s.best_baseline = b;
    for (const auto& e : report.ensembles)
      if (e.variant == v && (!s.best_ensemble || ensemble_better(e, *s.best_ensemble))) s.best_ensemble = e;
    if (!s.best_baseline && !s.best_ensemble) continue;
    if (s.best_baseline && s.best_ensemble)
      s.improvement = s.best_ensemble->accuracy - s.best_baseline->accuracy;
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_accuracy(double accuracy) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, accuracy, std::chars_format::fixed, 3);
  return std::string(buf, ptr);
}

std::string report_csv(const SweepReport& report) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& b : report.baselines) {
    out += std::string(to_string(b.variant)) + "," + std::string(to_string(b.kind)) + ",," +
           format_accuracy(b.accuracy) + "," + std::to_string(b.n_train) + "," + std::to_string(b.n_test) +
           "," + std::to_string(b.seed) + "\n";
  }
  for (const auto& e : report.ensembles) {
    out += std::string(to_string(e.variant)) + "," + std::string(to_string(e.meta)) + "," + join_kinds(e.bases) +
           "," + format_accuracy(e.accuracy) + "," + std::to_string(e.n_train) + "," + std::to_string(e.n_test) +
           "," + std::to_string(e.seed) + "\n";
  }
  return out;
}

std::string report_markdown(const SweepReport& report) {
  const auto& o = report.options;
  std::vector<std::string> sizes;
  for (auto s : o.subset_sizes) sizes.push_back(std::to_string(s));
  std::string out = "# Blending sweep\n\n";
  out += "- dataset rows: " + std::to_string(report.dataset_rows) + "\n";
  out += "- master seed: " + std::to_string(o.seed) + "\n";
  out += "- pool: " + join_kinds(o.pool, ',') + "\n";
  out += "- base subset sizes: ";
  for (std::size_t i = 0; i < sizes.size(); ++i) out += (i ? "," : "") + sizes[i];
  out += "\n";
  out += "- test fraction: " + format_accuracy(o.test_fraction) + ", blend validation fraction: " +
         format_accuracy(o.val_fraction) + ", meta features: " + std::string(to_string(o.meta_feature_mode)) + "\n";
  out += "- feature scaling: " + std::string(o.standardize ? "z-score (train statistics)" : "none") + "\n";
  out += "- variants built from the training split only; the test split is untouched\n\n";

  out += "## Best per variant\n\n";
  std::vector<std::vector<std::string>> summary_rows;
  for (const auto& s : best_of(report)) {
    summary_rows.push_back({std::string(to_string(s.variant)),
                            s.best_baseline ? std::string(to_string(s.best_baseline->kind)) : "-",
                            s.best_baseline ? format_accuracy(s.best_baseline->accuracy) : "-",
                            s.best_ensemble ? std::string(to_string(s.best_ensemble->meta)) + " <- " +
                                                  join_kinds(s.best_ensemble->bases)
                                            : "-",
                            s.best_ensemble ? format_accuracy(s.best_ensemble->accuracy) : "-",
                            s.improvement ? (*s.improvement >= 0 ? "+" : "") + format_accuracy(*s.improvement)
                                          : "-"});
  }
  out += markdown_table({"variant", "best single", "accuracy", "best blend (meta <- bases)", "accuracy", "difference"},
                        summary_rows);

  out += "\n## All configurations\n\n";
  std::vector<std::vector<std::string>> rows;
  for (const auto& b : report.baselines)
    rows.push_back({std::string(to_string(b.variant)), std::string(to_string(b.kind)), "-",
                    format_accuracy(b.accuracy), std::to_string(b.n_train), std::to_string(b.n_test),
                    std::to_string(b.seed)});
  for (const auto& e : report.ensembles)
    rows.push_back({std::string(to_string(e.variant)), std::string(to_string(e.meta)), join_kinds(e.bases),
                    format_accuracy(e.accuracy), std::to_string(e.n_train), std::to_string(e.n_test),
                    std::to_string(e.seed)});
  out += markdown_table({"variant", "meta", "bases", "accuracy", "n_train", "n_test", "seed"}, rows);
  return out;
}

}  // namespace sylblend::harness
