#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sylblend {

/// Binary class labels (0 = distorted, 1 = intelligible).
using Labels = std::vector<int>;

/// Dense row-major feature matrix.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
  FeatureMatrix(std::initializer_list<std::initializer_list<double>> rows);

  /// Empty matrix with a fixed column count, for appending rows.
  static FeatureMatrix with_columns(std::size_t cols) {
    FeatureMatrix m;
    m.cols_ = cols;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0; }

  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  void push_row(std::span<const double> values);
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Labels select_labels(const Labels& labels, std::span<const std::size_t> indices);

/// Row indices split into a kept part and a held-out part, each ascending.
struct Partition {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> held_out;
};

/// Random partition holding out `fraction` of the rows. When stratified,
/// every class contributes round(count * fraction) rows to the held-out
/// part, clamped so both parts keep at least one row of the class.
/// Throws DegenerateSplit if stratifying a class with a single row.
Partition partition_rows(const Labels& labels, double fraction, bool stratified,
                         unsigned long long seed);

}  // namespace sylblend
