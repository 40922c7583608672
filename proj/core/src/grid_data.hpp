#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "mosersys/grid.hpp"

namespace mosersys::detail {

/// Fast inverse of the 5-point Laplacian on the full n x n bounding box
/// (sine transform). Exact for the square; a preconditioner for the disk.
class PoissonKernel {
 public:
  PoissonKernel(int n, double h);
  ~PoissonKernel();
  PoissonKernel(const PoissonKernel&) = delete;
  PoissonKernel& operator=(const PoissonKernel&) = delete;

  int n() const { return n_; }

  /// box[(i-1) * n + (j-1)] holds node (i, j); solves in place.
  void solve_box(std::vector<double>& box) const;

 private:
  int n_;
  std::vector<double> inv_eigen_;  // 1 / (eigenvalue * (2(n+1))^2)
  void* plan_ = nullptr;           // fftw_plan, kept opaque in this header
};

struct GridData {
  Shape shape = Shape::UnitSquare;
  int n = 0;
  double h = 0.0;
  std::uint64_t id = 0;
  std::vector<std::int32_t> box_to_dense;  // n*n, -1 when masked out
  std::vector<std::array<int, 2>> nodes;   // dense -> (i, j)
  std::vector<std::array<std::int32_t, 4>> nbrs;
  std::vector<double> diag;  // stencil diagonal in units of 1/h^2
  std::unique_ptr<PoissonKernel> kernel;
};

}  // namespace mosersys::detail
