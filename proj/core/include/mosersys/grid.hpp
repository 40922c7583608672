#pragma once

// Masked uniform grids on the unit square and the unit disk, nodal fields,
// the 5-point Dirichlet Laplacian and the linear-algebra kernels built on it.

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mosersys {

enum class Shape { UnitSquare, UnitDisk };

/// Lower clamp for the boundary distance fraction on curved boundaries.
inline constexpr double kMinBoundaryFraction = 1e-3;

std::string_view to_string(Shape shape);
Shape parse_shape(std::string_view text);

namespace detail {
struct GridData;
class PoissonKernel;
}  // namespace detail

/// Handle to an immutable masked grid. Copies share the same underlying data
/// and identity, so fields built on one copy are accepted by all copies.
class Grid {
 public:
  Shape shape() const;
  /// Nodes per axis of the bounding box (boundary rows excluded).
  int n() const;
  double h() const;
  /// Number of interior nodes.
  std::size_t size() const;
  std::uint64_t id() const;

  /// Node (i, j) with 1 <= i, j <= n lies inside the domain.
  bool inside(int i, int j) const;
  /// Dense index of node (i, j), or -1 when it is not interior.
  std::ptrdiff_t index(int i, int j) const;
  /// Grid coordinates (i, j) of the k-th interior node.
  std::array<int, 2> node(std::size_t k) const;
  /// Physical coordinates of node (i, j).
  std::array<double, 2> coords(int i, int j) const;
  std::array<double, 2> coords(std::size_t k) const;
  /// East, west, north, south neighbours of interior node k (-1 off-domain).
  const std::array<std::int32_t, 4>& neighbours(std::size_t k) const;

  /// Area of the continuous domain (1 or pi).
  double domain_area() const;

  /// Diagonal of h^2 (-Delta_h): 4 on the square; on the disk, edges cut by
  /// the circle are weighted by h over the distance to the boundary.
  const std::vector<double>& stencil_diagonal() const;

  const detail::PoissonKernel& poisson_kernel() const;

 private:
  friend Grid build_domain(Shape shape, int n);
  explicit Grid(std::shared_ptr<const detail::GridData> data);
  std::shared_ptr<const detail::GridData> data_;
};

/// Builds the grid; n >= 3. Throws DomainError when no interior node exists.
Grid build_domain(Shape shape, int n);

/// Real values on the interior nodes of one grid.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  std::uint64_t grid_id() const noexcept { return grid_id_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double factor);
  /// this += factor * other
  Field& axpy(double factor, const Field& other);

  bool belongs_to(const Grid& grid) const noexcept;

 private:
  std::vector<double> values_;
  std::uint64_t grid_id_ = 0;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double factor, Field a);

/// Throws GridMismatchError unless f lives on grid.
void require_on_grid(const Grid& grid, const Field& f, const char* what);

/// Samples fn(x, y) on every interior node.
template <class Fn>
Field sample(const Grid& grid, Fn&& fn) {
  Field f(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [x, y] = grid.coords(k);
    f[k] = fn(x, y);
  }
  return f;
}

Field abs(Field f);
double max_abs(const Field& f);
double min_value(const Field& f);

/// (4 u_ij - sum of neighbours) / h^2 with zero Dirichlet data.
Field neg_laplacian_apply(const Grid& grid, const Field& u);

/// h^2 * sum over interior nodes.
double integrate(const Grid& grid, const Field& f);
/// h^2 * sum u_k v_k.
double l2_inner(const Grid& grid, const Field& u, const Field& v);
/// h^2 * sum |u_k|^p, i.e. the discrete integral of |u|^p.
double lp_integral(const Grid& grid, const Field& u, double p);

/// <-Delta_h u, v> h^2 + lambda <u, v> h^2.
double h1_inner(const Grid& grid, const Field& u, const Field& v, double lambda);
/// Discrete ||grad u||_2^2 = <-Delta_h u, u> h^2.
double dirichlet_energy(const Grid& grid, const Field& u);

struct PoissonOptions {
  double rel_tol = 1e-10;
  int max_iter = 2000;
};

/// Solves -Delta_h u = rhs. Throws SolverError with the final relative
/// residual when the tolerance is not reached.
Field poisson_solve(const Grid& grid, const Field& rhs, const PoissonOptions& opts = {});

struct Eigenpair {
  double lambda1 = 0.0;
  Field phi;  ///< ||phi||_2 = 1, positive
  double residual = 0.0;  ///< ||-Delta phi - lambda1 phi||_2 / (lambda1 ||phi||_2)
  int iterations = 0;
};

struct EigenOptions {
  double rel_tol = 1e-8;
  int max_iter = 500;
};

Eigenpair principal_eigenpair(const Grid& grid, const EigenOptions& opts = {});

struct SobolevResult {
  double s4 = 0.0;
  Field phi;  ///< minimiser, normalised to ||phi||_4 = 1, positive
  double stationarity = 0.0;
  int iterations = 0;
};

struct SobolevOptions {
  double rel_tol = 1e-6;
  int max_iter = 5000;
};

/// ||grad u||_2^2 / ||u||_4^2 (the quotient minimised by best_sobolev_s4).
double sobolev_quotient(const Grid& grid, const Field& u);

/// Best constant of H_0^1 -> L^4 on the grid, by normalised H^1-preconditioned
/// descent started from the principal eigenfunction.
SobolevResult best_sobolev_s4(const Grid& grid, const SobolevOptions& opts = {});
SobolevResult best_sobolev_s4(const Grid& grid, const Field& start, const SobolevOptions& opts = {});

}  // namespace mosersys
