#include <cmath>
#include <numbers>

#include "mosersys/constants.hpp"
#include "mosersys/errors.hpp"

namespace mosersys {

MoserCheck moser_sup_check(const Grid& grid, double alpha, int trials) {
  if (!(alpha > 0.0)) throw DomainError("moser_sup_check: alpha must be positive");
  if (trials < 1) throw DomainError("moser_sup_check: need at least one trial");
  // largest centred ball inside the domain
  const bool square = grid.shape() == Shape::UnitSquare;
  const double cx = square ? 0.5 : 0.0;
  const double radius = square ? 0.5 : 1.0;
  const double h2 = grid.h() * grid.h();

  MoserCheck out;
  for (int k = 1; k <= trials; ++k) {
    const double rho = std::ldexp(1.0, -k);
    if (rho * radius < grid.h()) {
      out.resolution_limited = true;
      break;
    }
    Field m = sample(grid, [&](double x, double y) {
      return moser_profile(std::hypot(x - cx, y - cx), radius, rho);
    });
    m *= 1.0 / std::sqrt(dirichlet_energy(grid, m));
    double sum = 0.0;
    for (double x : m) {
      const double z = alpha * x * x;
      if (z > kOverflowCap) throw OverflowError("moser_sup_check: exponent beyond cap", z);
      sum += std::exp(z);
    }
    const double value = sum * h2;
    out.trial_values.push_back(value);
    out.plateau_radii.push_back(rho * radius);
    out.sup_estimate = std::max(out.sup_estimate, value);
  }
  out.divergence_witness =
      alpha > 4.0 * std::numbers::pi && out.sup_estimate > 1e6 * grid.domain_area();
  return out;
}

}  // namespace mosersys
