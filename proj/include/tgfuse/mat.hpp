#pragma once

#include <cassert>
#include <cstdint>
#include <memory>
#include <span>

namespace tgfuse {

// Byte counter over live Mat buffers. The bench command reads the high-water
// mark to compare full-batch against mini-batch training footprints.
namespace memtrack {
std::int64_t current_bytes();
std::int64_t peak_bytes();
void reset_peak();
}  // namespace memtrack

// Dense row-major matrix of doubles. Copyable (deep) and movable.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols);  // zero-initialized
  Mat(const Mat& other);
  Mat& operator=(const Mat& other);
  Mat(Mat&& other) noexcept;
  Mat& operator=(Mat&& other) noexcept;
  ~Mat();

  static Mat zeros(int rows, int cols) { return Mat(rows, cols); }
  static Mat full(int rows, int cols, double value);
  // Skips zero-initialization; for buffers whose producer writes every entry.
  static Mat uninitialized(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::int64_t size() const { return static_cast<std::int64_t>(rows_) * cols_; }
  bool empty() const { return rows_ == 0 || cols_ == 0; }

  double* data() { return data_.get(); }
  const double* data() const { return data_.get(); }
  double* row(int r) { return data_.get() + static_cast<std::int64_t>(r) * cols_; }
  const double* row(int r) const { return data_.get() + static_cast<std::int64_t>(r) * cols_; }

  double& at(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::int64_t>(r) * cols_ + c];
  }
  double at(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<std::int64_t>(r) * cols_ + c];
  }

  std::span<double> flat() { return {data_.get(), static_cast<std::size_t>(size())}; }
  std::span<const double> flat() const { return {data_.get(), static_cast<std::size_t>(size())}; }

  void fill(double value);
  bool all_finite() const;

 private:
  void allocate(int rows, int cols, bool zeroed);
  void release();

  int rows_ = 0;
  int cols_ = 0;
  std::unique_ptr<double[]> data_;
};

}  // namespace tgfuse
