#include "sylblend/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sylblend/error.hpp"
#include "sylblend/rng.hpp"

namespace sylblend {

FeatureMatrix::FeatureMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows.size() == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw Error(ErrorCode::ShapeMismatch, "ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

void FeatureMatrix::push_row(std::span<const double> values) {
  if (values.size() != cols_)
    throw Error(ErrorCode::ShapeMismatch, "row has " + std::to_string(values.size()) +
                                              " values, matrix has " + std::to_string(cols_) +
                                              " columns");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out(indices.size(), cols_);
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const auto src = row(indices[k]);
    std::copy(src.begin(), src.end(), out.row(k).begin());
  }
  return out;
}

Labels select_labels(const Labels& labels, std::span<const std::size_t> indices) {
  Labels out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels[i]);
  return out;
}

namespace {

std::size_t held_out_count(std::size_t count, double fraction) {
  if (count < 2) return 0;
  const auto wanted = static_cast<std::size_t>(std::llround(static_cast<double>(count) * fraction));
  return std::clamp<std::size_t>(wanted, 1, count - 1);
}

}  // namespace

Partition partition_rows(const Labels& labels, double fraction, bool stratified,
                         unsigned long long seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw Error(ErrorCode::BadParam, "split fraction must lie in (0, 1)");
  Rng rng(seed);
  std::vector<bool> held(labels.size(), false);

  auto draw = [&](std::vector<std::size_t> pool) {
    rng.shuffle(pool.begin(), pool.end());
    const std::size_t take = held_out_count(pool.size(), fraction);
    for (std::size_t k = 0; k < take; ++k) held[pool[k]] = true;
  };

  if (stratified) {
    for (int cls : {0, 1}) {
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == cls) members.push_back(i);
      if (members.size() == 1)
        throw Error(ErrorCode::DegenerateSplit,
                    "class " + std::to_string(cls) + " has a single row; cannot stratify");
      draw(std::move(members));
    }
  } else {
    std::vector<std::size_t> all(labels.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    draw(std::move(all));
  }

  Partition p;
  for (std::size_t i = 0; i < labels.size(); ++i) (held[i] ? p.held_out : p.kept).push_back(i);
  return p;
}

}  // namespace sylblend
