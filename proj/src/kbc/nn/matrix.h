#ifndef KBC_NN_MATRIX_H_
#define KBC_NN_MATRIX_H_

#include <algorithm>
#include <cassert>
#include <span>
#include <vector>

namespace kbc::nn {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double &operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  double *row_data(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double *row_data(int r) const {
    return data_.data() + static_cast<size_t>(r) * cols_;
  }
  std::span<double> row(int r) { return {row_data(r), static_cast<size_t>(cols_)}; }
  std::span<const double> row(int r) const {
    return {row_data(r), static_cast<size_t>(cols_)};
  }

  std::vector<double> &values() { return data_; }
  const std::vector<double> &values() const { return data_; }

  void Fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void SetZero() { Fill(0.0); }
  void Resize(int rows, int cols) {
    rows_ = rows;
    cols_ = cols;
    data_.assign(static_cast<size_t>(rows) * cols, 0.0);
  }

  bool operator==(const Matrix &) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

}  // namespace kbc::nn

#endif  // KBC_NN_MATRIX_H_
