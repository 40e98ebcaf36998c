#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tgfuse/mat.hpp"
#include "tgfuse/tape.hpp"

namespace tgfuse::nn {

// Named-matrix container used for parameter checkpoints and train state.
//
// Binary layout (all integers little-endian, doubles IEEE-754 LE):
//   bytes 0..7   magic "TGFCKPT1"
//   u32          entry count
//   per entry:   u32 name length, name bytes (no terminator),
//                u32 rows, u32 cols, rows*cols f64 values (row-major)
struct MatStore {
  std::map<std::string, Mat> entries;

  void put(const std::string& name, Mat m) { entries[name] = std::move(m); }
  void put_scalar(const std::string& name, double v);
  bool has(const std::string& name) const { return entries.count(name) != 0; }
  const Mat& get(const std::string& name) const;  // throws DataError if absent
  double get_scalar(const std::string& name) const;

  void save(const std::string& path) const;
  static MatStore load(const std::string& path);
};

// Parameter values only, keyed by parameter name.
MatStore snapshot_params(const std::vector<Parameter*>& params);
void restore_params(const MatStore& store, const std::vector<Parameter*>& params);

}  // namespace tgfuse::nn
