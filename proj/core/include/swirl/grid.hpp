#pragma once

#include <cstddef>
#include <stdexcept>

namespace swirl {

/// Uniform node grid over [0, R] x [0, top]; node (i, j) sits at
/// (i * dr, j * dz) and is stored at index j * nr + i.
struct Grid {
  int nr = 201;
  int nz = 301;
  double R = 4.0;
  double top = 6.0;

  double dr() const { return R / (nr - 1); }
  double dz() const { return top / (nz - 1); }
  double r(int i) const { return i == nr - 1 ? R : R * i / (nr - 1); }
  double z(int j) const { return j == nz - 1 ? top : top * j / (nz - 1); }
  std::size_t size() const { return static_cast<std::size_t>(nr) * nz; }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * nr + static_cast<std::size_t>(i);
  }

  void validate() const {
    if (nr < 3 || nz < 3) throw std::invalid_argument("Grid: nr and nz must be >= 3");
    if (!(R > 0.0) || !(top > 0.0)) throw std::invalid_argument("Grid: extents must be > 0");
  }
};

}  // namespace swirl
