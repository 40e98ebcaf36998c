#include "tgfuse/mat.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>

namespace tgfuse {

namespace memtrack {
namespace {
std::atomic<std::int64_t> g_current{0};
std::atomic<std::int64_t> g_peak{0};

void on_alloc(std::int64_t bytes) {
  std::int64_t now = g_current.fetch_add(bytes) + bytes;
  std::int64_t peak = g_peak.load();
  while (now > peak && !g_peak.compare_exchange_weak(peak, now)) {
  }
}

void on_free(std::int64_t bytes) { g_current.fetch_sub(bytes); }
}  // namespace

std::int64_t current_bytes() { return g_current.load(); }
std::int64_t peak_bytes() { return g_peak.load(); }
void reset_peak() { g_peak.store(g_current.load()); }
}  // namespace memtrack

void Mat::allocate(int rows, int cols, bool zeroed) {
  rows_ = rows;
  cols_ = cols;
  if (size() > 0) {
    if (zeroed)
      data_ = std::make_unique<double[]>(static_cast<std::size_t>(size()));
    else
      data_ = std::make_unique_for_overwrite<double[]>(static_cast<std::size_t>(size()));
    memtrack::on_alloc(size() * static_cast<std::int64_t>(sizeof(double)));
  }
}

void Mat::release() {
  if (data_) {
    memtrack::on_free(size() * static_cast<std::int64_t>(sizeof(double)));
    data_.reset();
  }
  rows_ = cols_ = 0;
}

Mat::Mat(int rows, int cols) { allocate(rows, cols, true); }

Mat Mat::uninitialized(int rows, int cols) {
  Mat m;
  m.allocate(rows, cols, false);
  return m;
}

Mat::Mat(const Mat& other) {
  allocate(other.rows_, other.cols_, false);
  if (data_) std::memcpy(data_.get(), other.data_.get(), static_cast<std::size_t>(size()) * sizeof(double));
}

Mat& Mat::operator=(const Mat& other) {
  if (this == &other) return *this;
  release();
  allocate(other.rows_, other.cols_, false);
  if (data_) std::memcpy(data_.get(), other.data_.get(), static_cast<std::size_t>(size()) * sizeof(double));
  return *this;
}

Mat::Mat(Mat&& other) noexcept
    : rows_(other.rows_), cols_(other.cols_), data_(std::move(other.data_)) {
  other.rows_ = other.cols_ = 0;
}

Mat& Mat::operator=(Mat&& other) noexcept {
  if (this == &other) return *this;
  release();
  rows_ = other.rows_;
  cols_ = other.cols_;
  data_ = std::move(other.data_);
  other.rows_ = other.cols_ = 0;
  return *this;
}

Mat::~Mat() { release(); }

Mat Mat::full(int rows, int cols, double value) {
  Mat m(rows, cols);
  m.fill(value);
  return m;
}

void Mat::fill(double value) { std::fill_n(data_.get(), size(), value); }

bool Mat::all_finite() const {
  for (std::int64_t i = 0; i < size(); ++i) {
    if (!std::isfinite(data_[i])) return false;
  }
  return true;
}

}  // namespace tgfuse
