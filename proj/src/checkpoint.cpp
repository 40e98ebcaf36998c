#include "tgfuse/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "tgfuse/errors.hpp"

namespace tgfuse::nn {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'F', 'C', 'K', 'P', 'T', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

void write_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t read_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

}  // namespace

void MatStore::put_scalar(const std::string& name, double v) {
  Mat m(1, 1);
  m.at(0, 0) = v;
  put(name, std::move(m));
}

const Mat& MatStore::get(const std::string& name) const {
  auto it = entries.find(name);
  if (it == entries.end()) throw DataError("checkpoint: missing entry '" + name + "'");
  return it->second;
}

double MatStore::get_scalar(const std::string& name) const { return get(name).at(0, 0); }

void MatStore::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw DataError("checkpoint: cannot open '" + path + "' for writing");
  os.write(kMagic, sizeof(kMagic));
  write_u32(os, static_cast<std::uint32_t>(entries.size()));
  for (const auto& [name, m] : entries) {
    write_u32(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u32(os, static_cast<std::uint32_t>(m.rows()));
    write_u32(os, static_cast<std::uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!os) throw DataError("checkpoint: write to '" + path + "' failed");
}

MatStore MatStore::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open '" + path + "'");
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw DataError("checkpoint: '" + path + "' is not a parameter file");
  MatStore store;
  const std::uint32_t count = read_u32(is);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = read_u32(is);
    std::string name(name_len, '\0');
    is.read(name.data(), name_len);
    const std::uint32_t rows = read_u32(is);
    const std::uint32_t cols = read_u32(is);
    Mat m(static_cast<int>(rows), static_cast<int>(cols));
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!is) throw DataError("checkpoint: '" + path + "' is truncated");
    store.entries.emplace(std::move(name), std::move(m));
  }
  return store;
}

MatStore snapshot_params(const std::vector<Parameter*>& params) {
  MatStore store;
  for (const Parameter* p : params) store.put(p->name, p->value);
  return store;
}

void restore_params(const MatStore& store, const std::vector<Parameter*>& params) {
  for (Parameter* p : params) {
    const Mat& saved = store.get(p->name);
    if (saved.rows() != p->value.rows() || saved.cols() != p->value.cols())
      throw DataError("checkpoint: shape mismatch for parameter '" + p->name + "'");
    p->value = saved;
    p->zero_grad();
  }
}

}  // namespace tgfuse::nn
