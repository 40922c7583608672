#include <cmath>
#include <random>

#include "doctest.h"
#include "mosersys/errors.hpp"
#include "mosersys/nonlin.hpp"
#include "mosersys/scalar.hpp"
#include "oracles.hpp"

using namespace mosersys;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * unit_uniform(rng()); }

// (0, hi]
double open_uniform(std::mt19937_64& rng, double hi) { return hi * (1.0 - unit_uniform(rng())); }

}  // namespace

TEST_CASE("cross remainder: values, symmetry, cancellation") {
  for (double y : {0.0, 0.5, 3.0, -7.0}) CHECK(g_val(0.0, y) == 0.0);
  CHECK(g_val(1.0, 1.0) == doctest::Approx(std::exp(1.0) - 2.0).epsilon(1e-15));
  CHECK(g_val(1.0, 1.0) == doctest::Approx(0.718281828).epsilon(1e-9));
  const double tiny = g_val(1e-4, 1e-4);
  CHECK(tiny == doctest::Approx(5.0e-17).epsilon(1e-7));
  CHECK(std::fabs(tiny - oracle::exp_remainder_reference(1e-8)) <= 1e-12 * tiny);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 2000; ++i) {
    const double x = uniform(rng, -5.0, 5.0);
    const double y = uniform(rng, -5.0, 5.0);
    CHECK(g_val(x, y) >= 0.0);
    CHECK(g_val(x, y) == g_val(y, x));
    CHECK(g_val(x, y) <= std::sqrt(g_val(x, x) * g_val(y, y)) * (1.0 + 1e-12));
  }
  CHECK_THROWS_AS(g_val(30.0, 30.0), OverflowError);
}

TEST_CASE("remainder primitive against a 50-digit series") {
  for (double z : {1e-12, 1e-9, 3e-6, 1e-4, 5e-4, 9.999e-4, 1e-3, 1.0001e-3, 2e-3, 0.1, 0.5, 0.999, 1.0, 2.0, 10.0, 50.0}) {
    const double ref = oracle::exp_remainder_reference(z);
    CHECK(std::fabs(exp_remainder2(z) - ref) <= 1e-14 * ref);
  }
  // the two evaluation branches meet at the switch point
  const double below = exp_remainder2(std::nextafter(kSeriesSwitch, 0.0));
  const double above = exp_remainder2(kSeriesSwitch);
  CHECK(std::fabs(above - below) <= 1e-13 * above);
  CHECK(expm1_capped(1e-10) == doctest::Approx(1e-10).epsilon(1e-15));
  CHECK_THROWS_AS(expm1_capped(kOverflowCap + 1.0), OverflowError);
}

TEST_CASE("potential: zero, symmetric collapse, competitive lower bound") {
  const ModelParams p{0.0, 0.0, 1.3, 0.7, 0.4};
  CHECK(h_val(p, 0.0, 0.0) == 0.0);
  const ModelParams sym{0.0, 0.0, 2.0, 2.0, 0.6};
  for (double x : {0.01, 0.3, 1.0, 2.2}) {
    CHECK(h_val(sym, x, x) == doctest::Approx((2.0 + 0.6) * g_val(x, x)).epsilon(1e-14));
  }
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10000; ++i) {
    ModelParams q{0.0, 0.0, uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0), 0.0};
    q.beta = -uniform(rng, 0.0, 0.999) * q.sqrt_mu1mu2();
    const double x = open_uniform(rng, 4.0);
    const double y = open_uniform(rng, 4.0);
    const double floor = (1.0 + q.beta / q.sqrt_mu1mu2()) * (q.mu1 * g_val(x, x) + q.mu2 * g_val(y, y)) / 2.0;
    CHECK(h_val(q, x, y) >= floor - 1e-12 * std::fabs(floor));
    CHECK(floor >= 0.0);
  }
}

TEST_CASE("potential gradient: decoupling, Euler-type bound, central differences") {
  const ModelParams p{0.0, 0.0, 1.1, 0.9, 0.5};
  for (double y : {0.2, 1.0, 2.5}) {
    const auto g = h_grad(p, 0.0, y);
    CHECK(g.hx == 0.0);
    CHECK(g.hy == doctest::Approx(p.mu2 * y * std::expm1(y * y)).epsilon(1e-14));
  }
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = open_uniform(rng, 5.0);
    const double y = open_uniform(rng, 5.0);
    CHECK(check_euler_bound(p, x, y));
    const auto g = h_grad(p, x, y);
    const double four_h = 4.0 * h_val(p, x, y);
    CHECK(x * g.hx + y * g.hy >= four_h - 1e-12 * four_h);
  }
  for (auto [x, y] : {std::pair{0.7, 1.2}, {1.5, 0.4}, {1.1, 1.3}}) {
    const auto g = h_grad(p, x, y);
    double err[2];
    int k = 0;
    for (double eps : {1e-4, 5e-5}) {
      const double fx = (h_val(p, x + eps, y) - h_val(p, x - eps, y)) / (2.0 * eps);
      err[k++] = std::fabs(fx - g.hx);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("potential Hessian: identities and central differences") {
  const ModelParams p{0.0, 0.0, 1.2, 0.8, 0.3};
  const auto z = h_hess(p, 0.0, 0.0);
  CHECK(z.hxx == 0.0);
  CHECK(z.hxy == 0.0);
  CHECK(z.hyy == 0.0);
  CHECK_THROWS_AS(h_hess(p, -0.1, 1.0), DomainError);
  CHECK_THROWS_AS(h_hess(p, 1.0, -0.1), DomainError);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    const double x = open_uniform(rng, 3.0);
    const double y = open_uniform(rng, 3.0);
    const auto g = h_grad(p, x, y);
    const auto hs = h_hess(p, x, y);
    const double xy = x * y;
    const double lhs = x * x * hs.hxx - x * g.hx;
    const double rhs = 2.0 * p.mu1 * std::pow(x, 4) * std::exp(x * x) +
                       p.beta * (xy * xy * std::exp(xy) - xy * std::expm1(xy));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    CHECK(xy * hs.hxy == doctest::Approx(p.beta * (xy * xy * std::exp(xy) + xy * std::expm1(xy))).epsilon(1e-12));
  }
  for (auto [x, y] : {std::pair{0.7, 1.2}, {1.5, 0.4}}) {
    const auto hs = h_hess(p, x, y);
    double exx[2], exy[2], eyy[2];
    int k = 0;
    for (double eps : {1e-4, 5e-5}) {
      const auto px = h_grad(p, x + eps, y), mx = h_grad(p, x - eps, y);
      const auto py = h_grad(p, x, y + eps), my = h_grad(p, x, y - eps);
      exx[k] = std::fabs((px.hx - mx.hx) / (2.0 * eps) - hs.hxx);
      exy[k] = std::fabs((py.hx - my.hx) / (2.0 * eps) - hs.hxy);
      eyy[k] = std::fabs((py.hy - my.hy) / (2.0 * eps) - hs.hyy);
      ++k;
    }
    CHECK(exx[0] / exx[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(exy[0] / exy[1] == doctest::Approx(4.0).epsilon(0.1));
    CHECK(eyy[0] / eyy[1] == doctest::Approx(4.0).epsilon(0.1));
  }
}

TEST_CASE("energy: zero, decoupling, energy identity") {
  const Grid g = build_domain(Shape::UnitSquare, 31);
  const ModelParams p{0.5, -2.0, 1.1, 0.9, 0.4};
  const Field zero(g);
  CHECK(energy(g, p, zero, zero) == 0.0);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 5; ++t) {
    const Field u = oracle::random_smooth_field(g, rng, true);
    const Field v = oracle::random_smooth_field(g, rng, true);
    CHECK(energy(g, p, u, zero) == scalar_energy(g, p.lambda1, p.mu1, u));
    CHECK(energy(g, p, zero, v) == scalar_energy(g, p.lambda2, p.mu2, v));
    // I - (1/p)<I'(u,v),(u,v)> - (p-2)/(2p) Q = K_p
    const FieldPair gr = energy_grad(g, p, u, v);
    const double pairing = l2_inner(g, gr.u, u) + l2_inner(g, gr.v, v);
    const double q = quadratic_part(g, u, p.lambda1) + quadratic_part(g, v, p.lambda2);
    const double level = energy(g, p, u, v);
    for (double pe : {2.0, 3.0, 4.0}) {
      const double lhs = level - pairing / pe - (pe - 2.0) / (2.0 * pe) * q;
      CHECK(std::fabs(lhs - k_p(g, p, u, v, pe)) <= 1e-10 * std::fabs(level));
    }
  }
}

TEST_CASE("energy gradient matches central differences") {
  const Grid g = build_domain(Shape::UnitSquare, 15);
  const ModelParams p{0.3, 0.1, 1.0, 1.5, 0.6};
  std::mt19937_64 rng(6);
  const Field u = oracle::random_smooth_field(g, rng, true);
  const Field v = oracle::random_smooth_field(g, rng, true);
  const FieldPair gr = energy_grad(g, p, u, v);
  for (int d = 0; d < 20; ++d) {
    const Field phi = oracle::random_smooth_field(g, rng);
    const Field psi = oracle::random_smooth_field(g, rng);
    const double exact = l2_inner(g, gr.u, phi) + l2_inner(g, gr.v, psi);
    double err[2];
    int k = 0;
    for (double eps : {1e-3, 5e-4}) {
      const double fd = (energy(g, p, u + eps * phi, v + eps * psi) - energy(g, p, u - eps * phi, v - eps * psi)) /
                        (2.0 * eps);
      err[k++] = std::fabs(fd - exact);
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.125));
  }
  const Field zero(g);
  const FieldPair at_zero = energy_grad(g, p, zero, zero);
  CHECK(max_abs(at_zero.u) == 0.0);
  CHECK(max_abs(at_zero.v) == 0.0);
}

TEST_CASE("gradient vanishes at a scalar ground state paired with zero") {
  const Grid g = build_domain(Shape::UnitSquare, 31);
  const ModelParams p{0.0, 0.0, 10.0, 1.0, 0.5};
  SolverOptions opts;
  opts.restarts = 0;
  const GroundState gs = solve_scalar_ground_state(g, p.lambda1, p.mu1, opts);
  const FieldPair gr = energy_grad(g, p, gs.u, Field(g));
  CHECK(max_abs(gr.v) == 0.0);
  const Field lu = neg_laplacian_apply(g, gs.u);
  CHECK(std::sqrt(l2_inner(g, gr.u, gr.u) / l2_inner(g, lu, lu)) <= opts.tol);
}

TEST_CASE("pointwise exponential inequalities on 1e5 samples") {
  for (double x : {0.0, 0.1, 1.0, 2.5, 5.0}) {
    const auto c = check_exponential_bounds(x, x);
    CHECK(c.product_bound);
    CHECK(c.remainder_bound);
    CHECK(c.secant_bound);
    const auto z = check_exponential_bounds(0.0, x);
    CHECK(z.product_bound);
    CHECK(z.remainder_bound);
  }
  std::mt19937_64 rng(42);
  long violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double x = open_uniform(rng, 6.0);
    const double y = open_uniform(rng, 6.0);
    const auto c = check_exponential_bounds(x, y);
    violations += !c.product_bound + !c.remainder_bound + !c.secant_bound;
  }
  CHECK(violations == 0);
  CHECK_THROWS_AS(check_exponential_bounds(-1.0, 1.0), DomainError);
}

TEST_CASE("remainder functional K_p") {
  const Grid g = build_domain(Shape::UnitSquare, 15);
  const ModelParams p{0.0, 0.0, 1.0, 1.0, 0.7};
  const Field zero(g);
  CHECK(k_p(g, p, zero, zero, 3.0) == 0.0);
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    Field u = oracle::random_smooth_field(g, rng);
    Field v = oracle::random_smooth_field(g, rng);
    u *= 2.0;
    CHECK(k_p(g, p, u, v, 4.0) >= -1e-12 * std::fabs(energy(g, p, abs(u), abs(v))));
  }
  CHECK_THROWS_AS(k_p(g, p, zero, zero, 1.5), DomainError);
  CHECK_THROWS_AS(k_p(g, p, zero, zero, 4.5), DomainError);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS((ModelParams{0.0, 0.0, 0.0, 1.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{0.0, 0.0, 1.0, -1.0, 0.0}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{-20.0, 0.0, 1.0, 1.0, 0.0}.require_admissible(19.7)), HypothesisError);
  CHECK_NOTHROW((ModelParams{-19.0, -19.0, 1.0, 1.0, 0.0}.require_admissible(19.7)));
}
