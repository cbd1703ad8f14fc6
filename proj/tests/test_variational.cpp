#include "critsys/variational.hpp"

#include <cmath>
#include <random>

#include "doctest.h"

using namespace critsys;

namespace {

double sup_abs_map(const pmap& u) {
  double s = 0.0;
  for (const field& f : u.comp)
    for (double v : f) s = std::max(s, std::abs(v));
  return s;
}

pmap embed(const field& f) {
  pmap u;
  u.comp = {f};
  return u;
}

}  // namespace

TEST_CASE("functional I_A: zero map, diagonal embedding, sphere constant") {
  const manifold_model m = sphere_model(4, 512);
  const coupling A = constant_coupling(2, {1.3, 0.4, 0.4, 0.9});

  CHECK(functional_ia(m, zero_map(2, m.N), A) == 0.0);

  // U = (u, 0): the off-diagonal row does not contribute
  field u(m.N);
  for (int j = 0; j < m.N; ++j) u[j] = 1.0 + 0.5 * std::cos(m.x[j]);
  pmap U = zero_map(2, m.N);
  U.comp[0] = u;
  const double scalar = grad_energy(m, u) + 1.3 * dot_w(m, u, u);
  CHECK(functional_ia(m, U, A) == doctest::Approx(scalar).epsilon(1e-13));

  // Phi-normalized constant with the conformal potential gives K_n^{-2}
  const pmap c = normalize_phi(m, constant_map({1.0}, m.N));
  const double mu = functional_ia(m, c, yamabe_coupling(4, 1));
  CHECK(std::abs(mu - sharp_sobolev_sq_inv(4)) <=
        10.0 * m.h * m.h * sharp_sobolev_sq_inv(4));
}

TEST_CASE("constraint Phi: zero, additivity, normalization") {
  const manifold_model m = sphere_model(4, 256);
  CHECK(constraint_phi(m, zero_map(2, m.N)) == 0.0);

  field u(m.N);
  for (int j = 0; j < m.N; ++j) u[j] = std::sin(m.x[j]) + 0.1;
  pmap single = zero_map(2, m.N);
  single.comp[0] = u;
  pmap both;
  both.comp = {u, u};
  CHECK(constraint_phi(m, both) ==
        doctest::Approx(2.0 * constraint_phi(m, single)).epsilon(1e-13));

  const pmap nu = normalize_phi(m, both);
  CHECK(constraint_phi(m, nu) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(normalize_phi(m, zero_map(2, m.N)), std::invalid_argument);
}

TEST_CASE("free energy: zero map, one-bubble limit, discrete-root identity") {
  const manifold_model m = sphere_model(4, 8192);
  const coupling A = yamabe_coupling(4, 1);
  CHECK(free_energy(m, zero_map(1, m.N), A) == 0.0);

  // single sphere bubble at lam = 1.01 carries (1/n) K_n^{-n} within 1%
  const double quantum = std::pow(sharp_sobolev_sq_inv(4), 2.0) / 4.0;
  const double fe = free_energy(m, embed(sphere_bubble_field(m, 1.01)), A);
  CHECK(std::abs(fe - quantum) <= 0.01 * quantum);

  // exact discrete root: the constant solution of the unit Yamabe system
  const manifold_model ms = sphere_model(4, 512);
  const pmap c = constant_map({constant_yamabe(4)}, ms.N);
  const double lhs = free_energy(ms, c, yamabe_coupling(4, 1));
  const double rhs = constraint_phi(ms, c) / 4.0;
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}

TEST_CASE("gradient_residual closed-form roots") {
  const manifold_model m6 = sphere_model(6, 256);
  const triple_solutions fam = remark13_family(m6, 1.0);
  for (int s = 0; s < 3; ++s)
    CHECK(sup_abs_map(gradient_residual(m6, fam.maps[s], fam.A, -1.0)) <= 1e-11);

  const manifold_model m4 = sphere_model(4, 512);
  const pmap c = constant_map({constant_yamabe(4)}, m4.N);
  CHECK(sup_abs_map(gradient_residual(m4, c, yamabe_coupling(4, 1), 1.0)) <= 1e-10);
}

TEST_CASE("assembled gradient matches finite differences of I_A") {
  const manifold_model m = sphere_model(4, 128);
  const coupling A = constant_coupling(2, {2.0, 0.5, 0.5, 2.0});
  pmap u = zero_map(2, m.N);
  for (int j = 0; j < m.N; ++j) {
    u.comp[0][j] = 1.0 + 0.3 * std::cos(m.x[j]);
    u.comp[1][j] = -0.2 + 0.1 * std::sin(2.0 * m.x[j]);
  }
  const pmap g = functional_gradient(m, u, A);

  std::mt19937 rng(20240815u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  const double eps = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    pmap v = zero_map(2, m.N);
    for (field& f : v.comp)
      for (double& x : f) x = dist(rng);
    pmap up = u, um = u;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < m.N; ++j) {
        up.comp[i][j] += eps * v.comp[i][j];
        um.comp[i][j] -= eps * v.comp[i][j];
      }
    const double fd = (functional_ia(m, up, A) - functional_ia(m, um, A)) / (2.0 * eps);
    const double dir = dot_w(m, g, v);
    CHECK(std::abs(fd - dir) <= 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("minimize_mu on the round sphere") {
  const manifold_model m = sphere_model(4, 1024);
  const double kinv = sharp_sobolev_sq_inv(4);

  // the constant map is the exact discrete minimizer: zero iterations
  minimize_options o1;
  const solve_report r1 = minimize_mu(m, yamabe_coupling(4, 1), o1);
  CHECK(r1.converged);
  CHECK(r1.iterations == 0);
  CHECK(r1.value == doctest::Approx(kinv).epsilon(1e-12));
  CHECK(constraint_phi(m, r1.solution) == doctest::Approx(1.0).epsilon(1e-12));
  // converged implies the equation residual meets the tolerance
  CHECK(r1.residual_sup <= o1.tol);

  // p = 2 reaches the same invariant; history values never increase
  minimize_options o2;
  o2.p = 2;
  const solve_report r2 = minimize_mu(m, yamabe_coupling(4, 2), o2);
  CHECK(std::abs(r2.value - kinv) / kinv <= 1e-3);
  REQUIRE(r2.history.size() >= 2);
  for (size_t i = 1; i < r2.history.size(); ++i)
    CHECK(r2.history[i][1] <= r2.history[i - 1][1] + 1e-12);

  // guards
  minimize_options bad;
  bad.seed = constant_map({1.0}, m.N);
  CHECK_THROWS_AS(minimize_mu(m, yamabe_coupling(4, 2), bad), std::invalid_argument);
  minimize_options absopt;
  absopt.p = 2;
  absopt.abs_projection = true;
  const coupling coop = constant_coupling(2, {2.0, 0.5, 0.5, 2.0});
  CHECK_THROWS_AS(minimize_mu(m, coop, absopt), std::invalid_argument);
}

TEST_CASE("minimize_mu symmetries and upper bound") {
  const manifold_model m = sphere_model(4, 256);
  const double kinv = sharp_sobolev_sq_inv(4);
  std::vector<double> mus;

  // component permutation leaves the value unchanged
  minimize_options opts;
  opts.p = 2;
  opts.tol = 1e-10;
  const solve_report ra =
      minimize_mu(m, constant_coupling(2, {1.0, 0.3, 0.3, 2.0}), opts);
  const solve_report rb =
      minimize_mu(m, constant_coupling(2, {2.0, 0.3, 0.3, 1.0}), opts);
  CHECK(std::abs(ra.value - rb.value) <= 1e-8 * std::max(1.0, std::abs(ra.value)));
  mus.push_back(ra.value);

  // flipping the off-diagonal sign together with one component
  minimize_options sp, sm;
  sp.seed = constant_map({1.0, -0.2}, m.N);
  sm.seed = constant_map({1.0, 0.2}, m.N);
  const solve_report rp = minimize_mu(m, constant_coupling(2, {2.0, 0.5, 0.5, 2.0}), sp);
  const solve_report rm =
      minimize_mu(m, constant_coupling(2, {2.0, -0.5, -0.5, 2.0}), sm);
  CHECK(std::abs(rp.value - rm.value) <= 1e-8 * std::max(1.0, std::abs(rp.value)));
  mus.push_back(rp.value);

  // a constant potential below the conformal one forces mu strictly under K_n^{-2}
  const solve_report aubin = minimize_mu(m, diagonal_coupling(1, 1.0), {});
  CHECK(aubin.value < kinv - 1e-3);
  mus.push_back(aubin.value);

  // abs projection keeps the iterate nonnegative when -A is cooperative
  minimize_options ao;
  ao.p = 2;
  ao.abs_projection = true;
  const solve_report rabs = minimize_mu(m, diagonal_coupling(2, -1.0), ao);
  for (const field& f : rabs.solution.comp)
    for (double v : f) CHECK(v >= 0.0);
  mus.push_back(rabs.value);

  for (double v : mus) CHECK(v <= kinv + 1e-9);
}

TEST_CASE("rescale_to_solution homogeneity and residual transfer") {
  const manifold_model m = sphere_model(4, 512);
  const solve_report rep = minimize_mu(m, yamabe_coupling(4, 1), {});
  REQUIRE(rep.converged);

  // mu = 1 is the identity
  const pmap same = rescale_to_solution(rep.solution, 1.0, 4);
  CHECK(same.comp[0][10] == rep.solution.comp[0][10]);

  // Phi scales by mu^{n/2}
  const pmap scaled = rescale_to_solution(rep.solution, rep.value, 4);
  CHECK(constraint_phi(m, scaled) ==
        doctest::Approx(std::pow(rep.value, 2.0)).epsilon(1e-12));

  // the rescaled map solves the unit system about as well as the mu-form
  const double unit_res =
      residual_sup_relative(m, scaled, yamabe_coupling(4, 1), 1.0);
  CHECK(unit_res <= std::max(10.0 * rep.residual_sup, 1e-12));

  CHECK_THROWS_AS(rescale_to_solution(rep.solution, 0.0, 4), std::invalid_argument);
}

TEST_CASE("newton_solve: exact roots, attraction basin, zero branch") {
  // seeded at an exact constant root of the source -1 system
  const manifold_model m6 = sphere_model(6, 256);
  const triple_solutions fam = remark13_family(m6, 1.0);
  newton_options no;
  no.lambda_rhs = -1.0;
  const solve_report re = newton_solve(m6, fam.A, fam.maps[0], no);
  CHECK(re.converged);
  CHECK(re.iterations <= 2);
  CHECK(re.residual_sup <= 1e-12);

  // perturbed constant Yamabe seed falls back to the constant solution
  const manifold_model m4 = sphere_model(4, 512);
  const double cy = constant_yamabe(4);
  const solve_report rb =
      newton_solve(m4, yamabe_coupling(4, 1), constant_map({1.05 * cy}, m4.N), {});
  CHECK(rb.converged);
  CHECK(rb.residual_sup <= 1e-10);
  double dev = 0.0;
  for (double v : rb.solution.comp[0]) dev = std::max(dev, std::abs(v - cy));
  CHECK(dev <= 1e-9);
  // free energy identity on the discrete root
  const double fe = free_energy(m4, rb.solution, yamabe_coupling(4, 1));
  const double phi = constraint_phi(m4, rb.solution);
  CHECK(std::abs(fe - phi / 4.0) <=
        10.0 * std::max(rb.residual_sup, 1e-13) * std::max(1.0, phi));

  // zero seed sits on the trivial branch
  const solve_report rz = newton_solve(m4, yamabe_coupling(4, 1), zero_map(1, m4.N), {});
  CHECK(rz.converged);
  CHECK(rz.iterations == 0);
  CHECK(sup_abs_map(rz.solution) == 0.0);
}

TEST_CASE("coercivity eigenvalue") {
  const manifold_model m = sphere_model(4, 256);

  // constants are the ground state of c Id
  CHECK(coercivity_lambda(m, diagonal_coupling(1, 2.5)) ==
        doctest::Approx(2.5).epsilon(1e-6));
  CHECK(coercivity_lambda(m, diagonal_coupling(2, 0.75)) ==
        doctest::Approx(0.75).epsilon(1e-6));
  CHECK(coercivity_lambda(m, diagonal_coupling(1, -3.0)) ==
        doctest::Approx(-3.0).epsilon(1e-6));

  // clustered low spectrum: the pair (1.95, 2.05) must resolve to 1.95
  CHECK(coercivity_lambda(m, constant_coupling(2, {2.0, 0.05, 0.05, 2.0})) ==
        doctest::Approx(1.95).epsilon(1e-6));

  // constant eigenvector (1,-1) attains -3 for the source -1 family matrix
  const manifold_model m6 = sphere_model(6, 256);
  const triple_solutions fam = remark13_family(m6, 1.0);
  const double lam = coercivity_lambda(m6, fam.A);
  CHECK(lam <= -3.0 + 1e-6);
  CHECK(lam >= -3.0 - 1e-6);

  // sign agreement with the constrained minimum
  const double lpos = coercivity_lambda(m, yamabe_coupling(4, 1));
  const double mpos = minimize_mu(m, yamabe_coupling(4, 1), {}).value;
  CHECK(lpos > 0.0);
  CHECK(mpos > 0.0);
  const double lneg = coercivity_lambda(m, diagonal_coupling(1, -1.0));
  const double mneg = minimize_mu(m, diagonal_coupling(1, -1.0), {}).value;
  CHECK(lneg < 0.0);
  CHECK(mneg < 0.0);
}

TEST_CASE("multiplicity harness: alpha = 1 identity and guards") {
  minimize_options base;
  base.tol = 1e-9;
  base.record_history = false;
  const std::vector<multiplicity_row> rows =
      multiplicity_energies(diagonal_coupling(1, 1.0), 4, 40.0, 1, 512, base);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].identity_gap <= 1e-12);
  CHECK(rows[0].energy ==
        doctest::Approx(std::pow(rows[0].mu, 2.0)).epsilon(1e-11));
  CHECK(rows[0].mu > 0.0);

  CHECK_THROWS_AS(multiplicity_energies(diagonal_coupling(1, 1.0), 4, 40.0, 2, 511, base),
                  std::invalid_argument);
  CHECK_THROWS_AS(multiplicity_energies(varying_coupling(1, 512), 4, 40.0, 1, 512, base),
                  std::invalid_argument);
  CHECK_THROWS_AS(multiplicity_energies(diagonal_coupling(1, 1.0), 4, 40.0, 0, 512, base),
                  std::invalid_argument);
}

TEST_CASE("product-circle sharp inequality") {
  const int n = 4;
  const double T = 2.0;
  const manifold_model m = circle_model(n, T, 512);

  const hv_report z = hv_inequality_check(m, field(m.N, 0.0));
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.holds);

  // constant field: closed-form volume arithmetic
  const hv_report c = hv_inequality_check(m, field(m.N, 1.0));
  const double vol = total_volume(m);
  const double lhs_exact =
      sharp_sobolev_sq_inv(n) * std::pow(vol, 2.0 / critical_exp(n));
  const double rhs_exact = ((n - 2.0) * (n - 2.0) / 4.0 + 1.0 / (4.0 * T * T)) * vol;
  CHECK(c.lhs == doctest::Approx(lhs_exact).epsilon(1e-12));
  CHECK(c.rhs == doctest::Approx(rhs_exact).epsilon(1e-12));
  CHECK(c.holds);

  // random smooth periodic fields
  std::mt19937 rng(77u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int draw = 0; draw < 20; ++draw) {
    field u(m.N, 0.0);
    for (int k = 1; k <= 5; ++k) {
      const double a = dist(rng), b = dist(rng);
      for (int j = 0; j < m.N; ++j)
        u[j] += a * std::cos(k * m.x[j] / T) + b * std::sin(k * m.x[j] / T);
    }
    CHECK(hv_inequality_check(m, u).holds);
  }

  CHECK_THROWS_AS(hv_inequality_check(sphere_model(4, 64), field(64, 1.0)),
                  std::invalid_argument);
}
