#pragma once

#include <functional>

#include "mosersys/system.hpp"

namespace mosersys::detail {

// A descent on a set of scaled pairs: every step is taken along the
// H^1-preconditioned negative gradient and pulled back onto the set.
struct PairProblem {
  std::function<FieldPair(FieldPair)> project;  // abs + rescale; may throw
  std::function<double(const FieldPair&)> energy;
  std::function<FieldPair(const FieldPair&)> residual;   // strong-form gradient of the energy
  std::function<FieldPair(const FieldPair&)> direction;  // defaults to residual when empty
  std::function<void(const FieldPair&)> on_accept;       // certificate hooks; may throw
};

struct PairDescentResult {
  FieldPair state;
  int iterations = 0;
  double residual = 0.0;
};

PairDescentResult descend_pair(const Grid& grid, FieldPair start, const PairProblem& problem,
                               const SystemOptions& opts);

double l2_norm(const Grid& grid, const Field& f);
/// ||g||_2 / ||-Delta u||_2
double relative_residual(const Grid& grid, const Field& u, const Field& g);
/// sqrt(||grad(u - a)||^2 + ||grad(v - b)||^2)
double h1_distance(const Grid& grid, const FieldPair& x, const Field& a, const Field& b);

void require_seeds(const Grid& grid, const Seeds& seeds);
/// Fills level, residuals, det_j fields shared by all regimes.
void fill_diagnostics(const Grid& grid, SystemSolution& sol);

void add(SystemSolution& sol, std::string name, bool passed, double value, double bound);

}  // namespace mosersys::detail
