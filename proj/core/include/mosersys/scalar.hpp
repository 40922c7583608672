#pragma once

// Ground states of the single equation -Delta u + lambda u = mu u (e^{u^2} - 1)
// by descent on the Nehari set.

#include <cstdint>

#include "mosersys/grid.hpp"

namespace mosersys {

struct SolverOptions {
  double tol = 1e-8;       ///< relative strong-residual tolerance
  int max_iter = 2000;
  int restarts = 5;        ///< perturbed restarts in addition to the plain start
  std::uint64_t seed = 42;
};

struct GroundState {
  Field u;
  double lambda = 0.0;
  double mu = 1.0;
  double energy = 0.0;
  double nehari_residual = 0.0;  ///< |A(u) - mu int u^2(e^{u^2}-1)| / A(u)
  double pde_residual = 0.0;     ///< ||-Delta u + lambda u - mu u(e^{u^2}-1)||_2 / ||-Delta u||_2
  double stationarity = 0.0;     ///< H^{-1} norm of the gradient relative to sqrt(A)
  double sup_norm = 0.0;
  double grad_norm = 0.0;        ///< ||grad u||_2, reported as the radius proxy
  bool interior_positive = false;
  int iterations = 0;
  int restart_index = 0;         ///< which start produced the kept state
};

/// The t > 0 with A(u) = mu int u^2 (e^{t u^2} - 1), so that sqrt(t) u lies on
/// the Nehari set. Throws HypothesisError when A(u) <= 0.
double fiber_root_scalar(const Grid& grid, double lambda, double mu, const Field& u);

/// Keeps the lowest-energy state over the plain start and opts.restarts
/// seeded perturbations of the principal eigenfunction.
GroundState solve_scalar_ground_state(const Grid& grid, double lambda, double mu,
                                      const SolverOptions& opts = {});
GroundState solve_scalar_ground_state(const Grid& grid, const Eigenpair& eig, double lambda,
                                      double mu, const SolverOptions& opts = {});

/// A single descent from a given positive start (no restarts).
GroundState descend_scalar(const Grid& grid, double lambda, double mu, const Field& start,
                           const SolverOptions& opts = {});

/// Smooth positive perturbation of base, deterministic in (seed, index).
Field perturbed_start(const Grid& grid, const Field& base, std::uint64_t seed, int index,
                      double amplitude = 0.5);

/// Uniform double in [0, 1) from the top 53 bits; identical across standard libraries.
double unit_uniform(std::uint64_t bits);

}  // namespace mosersys
