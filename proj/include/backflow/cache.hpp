#pragma once

// On-disk kernel-matrix cache. File layout:
//   magic "BFKM1" (5 bytes)
//   N, L, series_order, shape parameter: 8-byte little-endian doubles
//   (N+1)^2 complex entries as (re, im) 8-byte doubles, row-major
// The shape parameter slot holds the bump epsilon (or the straight slope);
// the file name disambiguates the family. Writes go to a temp file in the
// same directory followed by an atomic rename, so concurrent workers never
// observe a torn file. BACKFLOW_CACHE_DIR overrides the cache location.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unistd.h>

#include "backflow/errors.hpp"
#include "backflow/spectral.hpp"

namespace backflow {

inline std::filesystem::path cache_directory(const std::string& fallback) {
  if (const char* env = std::getenv("BACKFLOW_CACHE_DIR"); env != nullptr && *env != '\0')
    return std::filesystem::path(env);
  return std::filesystem::path(fallback);
}

namespace detail {

inline std::string sanitize_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  for (auto& c : s) {
    if (c == '.') c = 'p';
    if (c == '-') c = 'm';
    if (c == '+') c = '_';
  }
  return s;
}

inline std::pair<std::string, double> shape_tag(const BoundaryShape& shape) {
  if (shape.is_straight()) return {"straight", shape.straight_slope()};
  if (shape.is_gaussian_bump()) return {"bump", shape.bump_epsilon()};
  throw UnsupportedShapeError("kernel cache: tabulated shapes are not cached");
}

}  // namespace detail

inline std::string cache_file_name(const BoundaryShape& shape, const GridSpec& grid,
                                   int series_order, std::size_t rule_size,
                                   KernelFamily family = KernelFamily::kAuto) {
  const auto [tag, param] = detail::shape_tag(shape);
  std::string name = (family == KernelFamily::kBrackenMelloy) ? "bm" : tag;
  name += "_" + detail::sanitize_number(param);
  name += "_L" + detail::sanitize_number(grid.L);
  name += "_N" + std::to_string(grid.N);
  name += "_o" + std::to_string(series_order);
  name += "_q" + std::to_string(rule_size);
  return name + ".bfk";
}

inline void save_kernel_matrix(const std::filesystem::path& dir, const KernelMatrix& matrix,
                               std::size_t rule_size, KernelFamily family = KernelFamily::kAuto) {
  std::filesystem::create_directories(dir);
  const auto [tag, param] = detail::shape_tag(matrix.shape);
  const std::filesystem::path final_path =
      dir / cache_file_name(matrix.shape, matrix.grid, matrix.series_order, rule_size, family);
  const std::filesystem::path tmp_path =
      final_path.string() + ".tmp." + std::to_string(static_cast<unsigned>(::getpid()));
  {
    std::ofstream out(tmp_path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("kernel cache: cannot open " + tmp_path.string());
    out.write("BFKM1", 5);
    const double header[4] = {static_cast<double>(matrix.grid.N), matrix.grid.L,
                              static_cast<double>(matrix.series_order), param};
    out.write(reinterpret_cast<const char*>(header), sizeof header);
    const int P = matrix.grid.point_count();
    for (int a = 0; a < P; ++a)
      for (int b = 0; b < P; ++b) {
        const double pair[2] = {matrix.entries(a, b).real(), matrix.entries(a, b).imag()};
        out.write(reinterpret_cast<const char*>(pair), sizeof pair);
      }
    if (!out) throw ConfigError("kernel cache: short write to " + tmp_path.string());
  }
  std::filesystem::rename(tmp_path, final_path);
}

inline std::optional<KernelMatrix> load_kernel_matrix(const std::filesystem::path& dir,
                                                      const BoundaryShape& shape,
                                                      const GridSpec& grid, int series_order,
                                                      std::size_t rule_size,
                                                      KernelFamily family = KernelFamily::kAuto) {
  const auto [tag, param] = detail::shape_tag(shape);
  const std::filesystem::path path =
      dir / cache_file_name(shape, grid, series_order, rule_size, family);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "BFKM1", 5) != 0) return std::nullopt;
  double header[4];
  in.read(reinterpret_cast<char*>(header), sizeof header);
  if (!in) return std::nullopt;
  if (static_cast<int>(header[0]) != grid.N || header[1] != grid.L ||
      static_cast<int>(header[2]) != series_order || header[3] != param)
    return std::nullopt;
  KernelMatrix matrix;
  matrix.grid = grid;
  matrix.shape = shape;
  matrix.series_order = series_order;
  const int P = grid.point_count();
  matrix.entries.resize(P, P);
  for (int a = 0; a < P; ++a)
    for (int b = 0; b < P; ++b) {
      double pair[2];
      in.read(reinterpret_cast<char*>(pair), sizeof pair);
      if (!in) return std::nullopt;
      matrix.entries(a, b) = Complex(pair[0], pair[1]);
    }
  return matrix;
}

// Assemble with read-through disk caching; empty dir disables the cache.
inline KernelMatrix assemble_cached(const std::filesystem::path& dir, const BoundaryShape& shape,
                                    const GridSpec& grid, int series_order,
                                    const QuadratureRule& rule, const AssemblyOptions& opts = {}) {
  if (!dir.empty()) {
    if (auto hit = load_kernel_matrix(dir, shape, grid, series_order, rule.size(), opts.family))
      return *hit;
  }
  KernelMatrix fresh = assemble(shape, grid, series_order, rule, opts);
  if (!dir.empty()) save_kernel_matrix(dir, fresh, rule.size(), opts.family);
  return fresh;
}

}  // namespace backflow
