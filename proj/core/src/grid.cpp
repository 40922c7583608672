#include "mosersys/grid.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "grid_data.hpp"
#include "mosersys/errors.hpp"

namespace mosersys {

std::string_view to_string(Shape shape) {
  return shape == Shape::UnitSquare ? "unit-square" : "unit-disk";
}

Shape parse_shape(std::string_view text) {
  if (text == "unit-square" || text == "square") return Shape::UnitSquare;
  if (text == "unit-disk" || text == "disk") return Shape::UnitDisk;
  throw DomainError("unknown domain shape '" + std::string(text) + "'");
}

namespace {
std::atomic<std::uint64_t> next_grid_id{1};
}

Grid::Grid(std::shared_ptr<const detail::GridData> data) : data_(std::move(data)) {}

Shape Grid::shape() const { return data_->shape; }
int Grid::n() const { return data_->n; }
double Grid::h() const { return data_->h; }
std::size_t Grid::size() const { return data_->nodes.size(); }
std::uint64_t Grid::id() const { return data_->id; }

bool Grid::inside(int i, int j) const { return index(i, j) >= 0; }

std::ptrdiff_t Grid::index(int i, int j) const {
  const int n = data_->n;
  if (i < 1 || j < 1 || i > n || j > n) return -1;
  return data_->box_to_dense[static_cast<std::size_t>((i - 1) * n + (j - 1))];
}

std::array<int, 2> Grid::node(std::size_t k) const { return data_->nodes[k]; }

std::array<double, 2> Grid::coords(int i, int j) const {
  const double h = data_->h;
  if (data_->shape == Shape::UnitSquare) return {i * h, j * h};
  return {-1.0 + i * h, -1.0 + j * h};
}

std::array<double, 2> Grid::coords(std::size_t k) const {
  const auto [i, j] = data_->nodes[k];
  return coords(i, j);
}

const std::array<std::int32_t, 4>& Grid::neighbours(std::size_t k) const { return data_->nbrs[k]; }

double Grid::domain_area() const {
  return data_->shape == Shape::UnitSquare ? 1.0 : std::numbers::pi;
}

const detail::PoissonKernel& Grid::poisson_kernel() const { return *data_->kernel; }

const std::vector<double>& Grid::stencil_diagonal() const { return data_->diag; }

namespace {
double boundary_fraction(double along, double across, double h) {
  // distance from the node to the unit circle along one axis, in units of h
  const double reach = std::sqrt(std::max(0.0, 1.0 - across * across)) - std::fabs(along);
  return std::clamp(reach / h, kMinBoundaryFraction, 1.0);
}

double diagonal_weight(const detail::GridData& g, int i, int j) {
  if (g.shape == Shape::UnitSquare) return 4.0;
  const auto& nb = g.nbrs.back();
  const double x = -1.0 + i * g.h;
  const double y = -1.0 + j * g.h;
  // A neighbour cut off by the circle contributes 1/theta instead of 1, where
  // theta h is the distance to the boundary along that edge. Only the diagonal
  // changes, so the operator stays symmetric positive definite.
  double w = 0.0;
  w += nb[0] >= 0 ? 1.0 : 1.0 / boundary_fraction(x, y, g.h);
  w += nb[1] >= 0 ? 1.0 : 1.0 / boundary_fraction(x, y, g.h);
  w += nb[2] >= 0 ? 1.0 : 1.0 / boundary_fraction(y, x, g.h);
  w += nb[3] >= 0 ? 1.0 : 1.0 / boundary_fraction(y, x, g.h);
  return w;
}
}  // namespace

Grid build_domain(Shape shape, int n) {
  if (n < 3) throw DomainError("grid needs n >= 3 nodes per axis");
  auto data = std::make_shared<detail::GridData>();
  data->shape = shape;
  data->n = n;
  data->h = shape == Shape::UnitSquare ? 1.0 / (n + 1) : 2.0 / (n + 1);
  data->id = next_grid_id.fetch_add(1);
  data->box_to_dense.assign(static_cast<std::size_t>(n) * n, -1);

  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      bool in = true;
      if (shape == Shape::UnitDisk) {
        const double x = -1.0 + i * data->h;
        const double y = -1.0 + j * data->h;
        in = x * x + y * y < 1.0;
      }
      if (in) {
        data->box_to_dense[static_cast<std::size_t>((i - 1) * n + (j - 1))] =
            static_cast<std::int32_t>(data->nodes.size());
        data->nodes.push_back({i, j});
      }
    }
  }
  if (data->nodes.empty()) throw DomainError("domain contains no interior grid nodes");

  auto lookup = [&](int i, int j) -> std::int32_t {
    if (i < 1 || j < 1 || i > n || j > n) return -1;
    return data->box_to_dense[static_cast<std::size_t>((i - 1) * n + (j - 1))];
  };
  data->nbrs.reserve(data->nodes.size());
  for (const auto& [i, j] : data->nodes) {
    data->nbrs.push_back({lookup(i + 1, j), lookup(i - 1, j), lookup(i, j + 1), lookup(i, j - 1)});
    data->diag.push_back(diagonal_weight(*data, i, j));
  }
  data->kernel = std::make_unique<detail::PoissonKernel>(n, data->h);
  return Grid(std::move(data));
}

// ---------------------------------------------------------------------------
// Field

Field::Field(const Grid& grid, double value) : values_(grid.size(), value), grid_id_(grid.id()) {}

Field::Field(const Grid& grid, std::vector<double> values)
    : values_(std::move(values)), grid_id_(grid.id()) {
  if (values_.size() != grid.size()) {
    throw GridMismatchError("field length does not match the grid's interior node count");
  }
}

bool Field::belongs_to(const Grid& grid) const noexcept {
  return grid_id_ == grid.id() && values_.size() == grid.size();
}

namespace {
void require_same(const Field& a, const Field& b) {
  if (a.grid_id() != b.grid_id() || a.size() != b.size()) {
    throw GridMismatchError("fields live on different grids");
  }
}
}  // namespace

Field& Field::operator+=(const Field& other) {
  require_same(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += other.values_[k];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= other.values_[k];
  return *this;
}

Field& Field::operator*=(double factor) {
  for (double& x : values_) x *= factor;
  return *this;
}

Field& Field::axpy(double factor, const Field& other) {
  require_same(*this, other);
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += factor * other.values_[k];
  return *this;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double factor, Field a) { return a *= factor; }

void require_on_grid(const Grid& grid, const Field& f, const char* what) {
  if (!f.belongs_to(grid)) {
    throw GridMismatchError(std::string(what) + ": field does not belong to this grid");
  }
}

Field abs(Field f) {
  for (double& x : f) x = std::fabs(x);
  return f;
}

double max_abs(const Field& f) {
  double m = 0.0;
  for (double x : f) m = std::max(m, std::fabs(x));
  return m;
}

double min_value(const Field& f) {
  return f.empty() ? 0.0 : *std::min_element(f.begin(), f.end());
}

// ---------------------------------------------------------------------------
// stencil and quadrature

Field neg_laplacian_apply(const Grid& grid, const Field& u) {
  require_on_grid(grid, u, "neg_laplacian_apply");
  const double inv_h2 = 1.0 / (grid.h() * grid.h());
  const auto& diag = grid.stencil_diagonal();
  Field out(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double acc = diag[k] * u[k];
    for (const std::int32_t nb : grid.neighbours(k)) {
      if (nb >= 0) acc -= u[static_cast<std::size_t>(nb)];
    }
    out[k] = acc * inv_h2;
  }
  return out;
}

double integrate(const Grid& grid, const Field& f) {
  require_on_grid(grid, f, "integrate");
  double sum = 0.0;
  for (double x : f) sum += x;
  return sum * grid.h() * grid.h();
}

double l2_inner(const Grid& grid, const Field& u, const Field& v) {
  require_on_grid(grid, u, "l2_inner");
  require_on_grid(grid, v, "l2_inner");
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += u[k] * v[k];
  return sum * grid.h() * grid.h();
}

double lp_integral(const Grid& grid, const Field& u, double p) {
  require_on_grid(grid, u, "lp_integral");
  double sum = 0.0;
  if (p == 2.0) {
    for (double x : u) sum += x * x;
  } else if (p == 4.0) {
    for (double x : u) sum += (x * x) * (x * x);
  } else {
    for (double x : u) sum += std::pow(std::fabs(x), p);
  }
  return sum * grid.h() * grid.h();
}

double h1_inner(const Grid& grid, const Field& u, const Field& v, double lambda) {
  require_on_grid(grid, u, "h1_inner");
  require_on_grid(grid, v, "h1_inner");
  // Sum over the stencil pairs directly so that h1_inner(u, v) and
  // h1_inner(v, u) perform identical floating-point operations.
  const auto& diag = grid.stencil_diagonal();
  double grad = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& nb = grid.neighbours(k);
    // diagonal term, then each interior edge counted from its east/north end
    double edge = 0.0;
    for (int d = 0; d < 4; d += 2) {
      const std::int32_t m = nb[static_cast<std::size_t>(d)];
      if (m >= 0) {
        const auto mm = static_cast<std::size_t>(m);
        edge += u[k] * v[mm] + u[mm] * v[k];
      }
    }
    grad += diag[k] * (u[k] * v[k]) - edge;
    mass += u[k] * v[k];
  }
  // the 1/h^2 of the stencil cancels against the quadrature weight
  return grad + lambda * mass * grid.h() * grid.h();
}

double dirichlet_energy(const Grid& grid, const Field& u) { return h1_inner(grid, u, u, 0.0); }

}  // namespace mosersys
