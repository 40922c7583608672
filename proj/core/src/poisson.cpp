// Poisson solves, principal eigenpair and the L^4 Sobolev constant.

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

#include "grid_data.hpp"
#include "mosersys/errors.hpp"
#include "mosersys/grid.hpp"

namespace mosersys {
namespace detail {

namespace {
// FFTW's planner is not thread-safe; execution with new arrays is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t len) : ptr(fftw_alloc_real(len)) {
    if (ptr == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  double* ptr;
};
}  // namespace

PoissonKernel::PoissonKernel(int n, double h) : n_(n) {
  const auto len = static_cast<std::size_t>(n) * n;
  inv_eigen_.resize(len);
  std::vector<double> s2(static_cast<std::size_t>(n));
  for (int p = 1; p <= n; ++p) {
    const double s = std::sin(p * std::numbers::pi / (2.0 * (n + 1)));
    s2[static_cast<std::size_t>(p - 1)] = 4.0 / (h * h) * s * s;
  }
  // RODFT00 applied twice in both directions scales by (2(n+1))^2
  const double norm = 4.0 * (n + 1.0) * (n + 1.0);
  for (int p = 0; p < n; ++p) {
    for (int q = 0; q < n; ++q) {
      inv_eigen_[static_cast<std::size_t>(p * n + q)] =
          1.0 / ((s2[static_cast<std::size_t>(p)] + s2[static_cast<std::size_t>(q)]) * norm);
    }
  }
  FftwBuffer tmp(len);
  std::lock_guard lock(planner_mutex());
  // FFTW_ESTIMATE picks the algorithm without timing, so runs are reproducible.
  plan_ = fftw_plan_r2r_2d(n, n, tmp.ptr, tmp.ptr, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  if (plan_ == nullptr) throw Error("failed to create sine-transform plan");
}

PoissonKernel::~PoissonKernel() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_));
}

void PoissonKernel::solve_box(std::vector<double>& box) const {
  const auto len = static_cast<std::size_t>(n_) * n_;
  FftwBuffer buf(len);
  std::copy(box.begin(), box.end(), buf.ptr);
  auto plan = static_cast<fftw_plan>(plan_);
  fftw_execute_r2r(plan, buf.ptr, buf.ptr);
  for (std::size_t k = 0; k < len; ++k) buf.ptr[k] *= inv_eigen_[k];
  fftw_execute_r2r(plan, buf.ptr, buf.ptr);
  std::copy(buf.ptr, buf.ptr + len, box.begin());
}

}  // namespace detail

namespace {

// Bounding-box inverse restricted to the interior nodes.
Field box_preconditioner(const Grid& grid, const Field& r) {
  const int n = grid.n();
  std::vector<double> box(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [i, j] = grid.node(k);
    box[static_cast<std::size_t>((i - 1) * n + (j - 1))] = r[k];
  }
  grid.poisson_kernel().solve_box(box);
  Field z(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto [i, j] = grid.node(k);
    z[k] = box[static_cast<std::size_t>((i - 1) * n + (j - 1))];
  }
  return z;
}

double dot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

}  // namespace

Field poisson_solve(const Grid& grid, const Field& rhs, const PoissonOptions& opts) {
  require_on_grid(grid, rhs, "poisson_solve");
  const double bnorm = std::sqrt(dot(rhs, rhs));
  Field u(grid);
  if (bnorm == 0.0) return u;

  // Preconditioned CG; the preconditioner is exact on the square.
  Field r = rhs;
  Field z = box_preconditioner(grid, r);
  Field p = z;
  double rz = dot(r, z);
  double rel = 1.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Field ap = neg_laplacian_apply(grid, p);
    const double alpha = rz / dot(p, ap);
    u.axpy(alpha, p);
    r.axpy(-alpha, ap);
    rel = std::sqrt(dot(r, r)) / bnorm;
    if (rel <= opts.rel_tol) {
      // confirm against the true residual; recurrence drift can hide error
      const Field true_r = rhs - neg_laplacian_apply(grid, u);
      rel = std::sqrt(dot(true_r, true_r)) / bnorm;
      if (rel <= opts.rel_tol) return u;
      r = true_r;
    }
    z = box_preconditioner(grid, r);
    const double rz_next = dot(r, z);
    p *= rz_next / rz;
    p += z;
    rz = rz_next;
  }
  throw SolverError("poisson_solve: CG did not reach tolerance", rel, opts.max_iter);
}

Eigenpair principal_eigenpair(const Grid& grid, const EigenOptions& opts) {
  // start from a positive bump; it is never orthogonal to the ground mode
  Field phi = sample(grid, [&](double x, double y) {
    if (grid.shape() == Shape::UnitSquare) return x * (1.0 - x) * y * (1.0 - y);
    return std::max(0.0, 1.0 - x * x - y * y);
  });
  const double h2 = grid.h() * grid.h();
  auto normalise = [&](Field& f) { f *= 1.0 / std::sqrt(dot(f, f) * h2); };
  normalise(phi);

  Eigenpair out;
  double rel = 1.0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    phi = poisson_solve(grid, phi);
    normalise(phi);
    const Field aphi = neg_laplacian_apply(grid, phi);
    const double lam = dot(aphi, phi) * h2;  // ||phi||_2 = 1
    Field res = aphi;
    res.axpy(-lam, phi);
    rel = std::sqrt(dot(res, res) * h2) / lam;
    if (rel <= opts.rel_tol) {
      double total = 0.0;
      for (double x : phi) total += x;
      if (total < 0.0) phi *= -1.0;
      out.lambda1 = lam;
      out.phi = std::move(phi);
      out.residual = rel;
      out.iterations = it;
      return out;
    }
  }
  throw SolverError("principal_eigenpair: inverse iteration did not converge", rel, opts.max_iter);
}

double sobolev_quotient(const Grid& grid, const Field& u) {
  const double l4 = std::sqrt(lp_integral(grid, u, 4.0));
  if (l4 == 0.0) throw DomainError("sobolev_quotient: zero field");
  return dirichlet_energy(grid, u) / l4;
}

SobolevResult best_sobolev_s4(const Grid& grid, const SobolevOptions& opts) {
  const Eigenpair eig = principal_eigenpair(grid);
  return best_sobolev_s4(grid, eig.phi, opts);
}

SobolevResult best_sobolev_s4(const Grid& grid, const Field& start, const SobolevOptions& opts) {
  require_on_grid(grid, start, "best_sobolev_s4");
  auto normalise = [&](Field& f) { f *= 1.0 / std::sqrt(std::sqrt(lp_integral(grid, f, 4.0))); };
  Field u = abs(start);
  normalise(u);
  double q = sobolev_quotient(grid, u);
  double tau = 1.0;
  SobolevResult out;

  for (int it = 1; it <= opts.max_iter; ++it) {
    // H^1-preconditioned gradient of the quotient on ||u||_4 = 1:
    // d = Q (-Delta)^{-1} u^3 - u
    Field cube(grid);
    for (std::size_t k = 0; k < u.size(); ++k) cube[k] = u[k] * u[k] * u[k];
    Field d = poisson_solve(grid, cube);
    d *= q;
    d -= u;
    const double stat = std::sqrt(dirichlet_energy(grid, d) / dirichlet_energy(grid, u));
    if (stat <= opts.rel_tol) {
      out.s4 = q;
      out.phi = std::move(u);
      out.stationarity = stat;
      out.iterations = it;
      return out;
    }
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Field trial = u;
      trial.axpy(tau, d);
      trial = abs(std::move(trial));
      normalise(trial);
      const double qt = sobolev_quotient(grid, trial);
      if (qt < q) {
        u = std::move(trial);
        q = qt;
        accepted = true;
        tau = std::min(2.0 * tau, 1.0);
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) throw SolverError("best_sobolev_s4: line search failed", stat, it);
  }
  throw SolverError("best_sobolev_s4: did not converge", q, opts.max_iter);
}

}  // namespace mosersys
