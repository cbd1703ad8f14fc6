#include "critsys/variational.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <random>

namespace critsys {

namespace {

double abs_sup(const pmap& u) {
  double s = 0.0;
  for (const field& f : u.comp)
    for (double v : f) s = std::max(s, std::abs(v));
  return s;
}

double residual_scale(const manifold_model& m, const pmap& u) {
  const double ts = critical_exp(m.n);
  return std::max(1.0, std::pow(abs_sup(u), ts - 1.0));
}

pmap graded_constant_seed(int p, int N) {
  pmap u = zero_map(p, N);
  for (int i = 0; i < p; ++i)
    u.comp[i].assign(N, 1.0 / (i + 1.0));
  return u;
}

using triplets = std::vector<Eigen::Triplet<double>>;

// laplacian stencil rows as sparse triplets for one component block
void laplacian_triplets(const manifold_model& m, int base, triplets& t) {
  const int N = m.N;
  const double h = m.h, h2 = m.h * m.h;
  if (m.periodic) {
    for (int k = 0; k < N; ++k) {
      t.emplace_back(base + k, base + k, 2.0 / h2);
      t.emplace_back(base + k, base + (k + 1) % N, -1.0 / h2);
      t.emplace_back(base + k, base + (k + N - 1) % N, -1.0 / h2);
    }
    return;
  }
  for (int k = 1; k + 1 < N; ++k) {
    const double c = m.coef[k];
    t.emplace_back(base + k, base + k, 2.0 / h2);
    t.emplace_back(base + k, base + k + 1, -1.0 / h2 - c / (2.0 * h));
    t.emplace_back(base + k, base + k - 1, -1.0 / h2 + c / (2.0 * h));
  }
  {  // even reflection at the first cell
    const double c = m.coef[0];
    t.emplace_back(base + 0, base + 0, 1.0 / h2 + c / (2.0 * h));
    t.emplace_back(base + 0, base + 1, -1.0 / h2 - c / (2.0 * h));
  }
  if (m.kind == model_kind::sphere_radial) {
    const double c = m.coef[N - 1];
    t.emplace_back(base + N - 1, base + N - 1, 1.0 / h2 - c / (2.0 * h));
    t.emplace_back(base + N - 1, base + N - 2, -1.0 / h2 + c / (2.0 * h));
  } else {
    const double c = m.coef[N - 1];
    t.emplace_back(base + N - 1, base + N - 1, -2.0 / h2 - 3.0 * c / (2.0 * h));
    t.emplace_back(base + N - 1, base + N - 2, 5.0 / h2 + 2.0 * c / h);
    t.emplace_back(base + N - 1, base + N - 3, -4.0 / h2 - c / (2.0 * h));
    t.emplace_back(base + N - 1, base + N - 4, 1.0 / h2);
  }
}

// dirichlet-form matrix entries for one component block (symmetric PSD)
void stiffness_triplets(const manifold_model& m, int base, triplets& t) {
  const int N = m.N;
  const double h = m.h;
  auto face = [&](int a, int b, double s) {
    t.emplace_back(base + a, base + a, s / h);
    t.emplace_back(base + b, base + b, s / h);
    t.emplace_back(base + a, base + b, -s / h);
    t.emplace_back(base + b, base + a, -s / h);
  };
  if (m.periodic) {
    for (int j = 0; j < N; ++j) face(j, (j + 1) % N, m.sface[j]);
    return;
  }
  for (int j = 0; j + 1 < N; ++j) face(j, j + 1, m.sface[j]);
  if (m.kind == model_kind::ball_radial) face(N - 2, N - 1, m.sface[N - 1]);
}

}  // namespace

double functional_ia(const manifold_model& m, const pmap& u, const coupling& A) {
  double val = 0.0;
  for (const field& f : u.comp) val += grad_energy(m, f);
  const pmap au = coupling_apply(A, u);
  val += dot_w(m, u, au);
  return val;
}

double constraint_phi(const manifold_model& m, const pmap& u) {
  const double ts = critical_exp(m.n);
  double val = 0.0;
  for (const field& f : u.comp) {
    const double nf = lq_norm(m, f, ts);
    val += std::pow(nf, ts);
  }
  return val;
}

double free_energy(const manifold_model& m, const pmap& u, const coupling& A) {
  return 0.5 * functional_ia(m, u, A) - constraint_phi(m, u) / critical_exp(m.n);
}

pmap gradient_residual(const manifold_model& m, const pmap& u, const coupling& A,
                       double lambda) {
  const double ts = critical_exp(m.n);
  pmap res = coupling_apply(A, u);
  for (int i = 0; i < u.p(); ++i) {
    const field lap = laplacian(m, u.comp[i]);
    for (int k = 0; k < m.N; ++k) {
      const double v = u.comp[i][k];
      res.comp[i][k] += lap[k] - lambda * std::pow(std::abs(v), ts - 2.0) * v;
    }
  }
  return res;
}

double residual_sup_relative(const manifold_model& m, const pmap& u,
                             const coupling& A, double lambda) {
  const pmap res = gradient_residual(m, u, A, lambda);
  return abs_sup(res) / residual_scale(m, u);
}

pmap functional_gradient(const manifold_model& m, const pmap& u, const coupling& A) {
  pmap g = coupling_apply(A, u);
  for (int i = 0; i < u.p(); ++i) {
    const field q = stiffness_apply(m, u.comp[i]);
    for (int k = 0; k < m.N; ++k) g.comp[i][k] = 2.0 * q[k] / m.w[k] + 2.0 * g.comp[i][k];
  }
  return g;
}

pmap normalize_phi(const manifold_model& m, const pmap& u) {
  const double phi = constraint_phi(m, u);
  if (!(phi > 0.0)) throw std::invalid_argument("normalize_phi: zero map");
  const double c = std::pow(phi, -1.0 / critical_exp(m.n));
  pmap out = u;
  for (field& f : out.comp)
    for (double& v : f) v *= c;
  return out;
}

solve_report minimize_mu(const manifold_model& m, const coupling& A,
                         minimize_options opts) {
  const double ts = critical_exp(m.n);
  const int p = opts.seed.p() > 0 ? opts.seed.p() : (A.p > 0 ? A.p : opts.p);
  if (A.p != p) throw std::invalid_argument("minimize_mu: coupling size mismatch");
  if (opts.abs_projection) {
    const coupling_flags fl = structure_tests(A);
    if (!fl.neg_cooperative)
      throw std::invalid_argument(
          "minimize_mu: abs_projection requires a coupling whose negation is cooperative");
  }

  pmap u = opts.seed.p() > 0 ? opts.seed : graded_constant_seed(p, m.N);
  u = normalize_phi(m, u);
  if (opts.abs_projection)
    for (field& f : u.comp)
      for (double& v : f) v = std::abs(v);

  double val = functional_ia(m, u, A);
  double step = opts.step0;

  solve_report rep;
  auto tangent_gradient = [&](const pmap& at, pmap& gt) {
    gt = functional_gradient(m, at, A);
    pmap psi = at;
    for (field& f : psi.comp)
      for (double& v : f) v = ts * std::pow(std::abs(v), ts - 2.0) * v;
    const double ratio = dot_w(m, gt, psi) / dot_w(m, psi, psi);
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < m.N; ++k) gt.comp[i][k] -= ratio * psi.comp[i][k];
    return dot_w(m, gt, gt);
  };

  int it = 0;
  pmap gt, trial;
  for (it = 0; it < opts.max_iter; ++it) {
    const double gn2 = tangent_gradient(u, gt);
    const double gn = std::sqrt(gn2);
    if (opts.record_history) rep.history.push_back({double(it), val, gn});
    if (gn <= opts.tol * std::max(1.0, std::abs(val))) break;
    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      trial = u;
      for (int i = 0; i < p; ++i)
        for (int k = 0; k < m.N; ++k) trial.comp[i][k] -= step * gt.comp[i][k];
      trial = normalize_phi(m, trial);
      if (opts.abs_projection)
        for (field& f : trial.comp)
          for (double& v : f) v = std::abs(v);
      const double tv = functional_ia(m, trial, A);
      if (std::isnan(tv)) throw std::runtime_error("minimize_mu: NaN in line search");
      if (tv <= val - 1e-4 * step * gn2) {
        u = trial;
        val = tv;
        step *= 1.5;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;  // line search exhausted at this accuracy
  }

  rep.solution = u;
  rep.value = val;
  rep.iterations = it;
  // the flag reflects the final iterate, whichever break ended the loop
  rep.converged =
      std::sqrt(tangent_gradient(u, gt)) <= opts.tol * std::max(1.0, std::abs(val));
  rep.residual_sup = residual_sup_relative(m, u, A, val);
  return rep;
}

pmap rescale_to_solution(const pmap& u, double mu, int n) {
  if (!(mu > 0.0)) throw std::invalid_argument("rescale_to_solution: mu > 0 required");
  const double c = std::pow(mu, (n - 2.0) / 4.0);
  pmap out = u;
  for (field& f : out.comp)
    for (double& v : f) v *= c;
  return out;
}

solve_report newton_solve(const manifold_model& m, const coupling& A,
                          const pmap& seed, newton_options opts) {
  const int p = seed.p();
  if (A.p != p) throw std::invalid_argument("newton_solve: coupling size mismatch");
  const int N = m.N;
  const double ts = critical_exp(m.n);
  const int dim = p * N;

  pmap u = seed;
  solve_report rep;

  auto sup_of = [&](const pmap& r) { return abs_sup(r); };

  pmap res = gradient_residual(m, u, A, opts.lambda_rhs);
  double rsup = sup_of(res);
  int it = 0;
  for (it = 0; it < opts.max_iter; ++it) {
    const double scale = residual_scale(m, u);
    if (rep.history.empty() || rep.history.back()[0] != it)
      rep.history.push_back({double(it), rsup / scale, rsup});
    if (rsup / scale <= opts.tol) {
      rep.converged = true;
      break;
    }

    triplets t;
    t.reserve(static_cast<size_t>(dim) * (p + 4));
    for (int i = 0; i < p; ++i) laplacian_triplets(m, i * N, t);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        for (int k = 0; k < N; ++k) {
          const double aij = A.at(i, j, A.constant() ? 0 : k);
          if (aij != 0.0) t.emplace_back(i * N + k, j * N + k, aij);
        }
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < N; ++k) {
        const double v = u.comp[i][k];
        t.emplace_back(i * N + k, i * N + k,
                       -opts.lambda_rhs * (ts - 1.0) * std::pow(std::abs(v), ts - 2.0));
      }

    Eigen::SparseMatrix<double> jac(dim, dim);
    jac.setFromTriplets(t.begin(), t.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(jac);
    if (lu.info() != Eigen::Success)
      throw std::runtime_error("newton_solve: singular jacobian");

    Eigen::VectorXd rhs(dim);
    for (int i = 0; i < p; ++i)
      for (int k = 0; k < N; ++k) rhs[i * N + k] = -res.comp[i][k];
    const Eigen::VectorXd delta = lu.solve(rhs);

    double damp = 1.0;
    bool accepted = false;
    pmap trial = u;
    for (int halv = 0; halv <= opts.max_halvings; ++halv) {
      for (int i = 0; i < p; ++i)
        for (int k = 0; k < N; ++k)
          trial.comp[i][k] = u.comp[i][k] + damp * delta[i * N + k];
      const pmap tres = gradient_residual(m, trial, A, opts.lambda_rhs);
      const double tsup = sup_of(tres);
      if (tsup < rsup || rsup == 0.0) {
        u = trial;
        res = tres;
        rsup = tsup;
        accepted = true;
        break;
      }
      damp *= 0.5;
    }
    if (!accepted) break;  // overshoot not recoverable by damping
  }

  rep.solution = u;
  rep.iterations = it;
  rep.residual_sup = rsup / residual_scale(m, u);
  rep.value = free_energy(m, u, A);
  if (rep.residual_sup <= opts.tol) rep.converged = true;
  return rep;
}

double coercivity_lambda(const manifold_model& m, const coupling& A) {
  const int p = A.p;
  const int N = m.N;
  const int dim = p * N;

  triplets t;
  for (int i = 0; i < p; ++i) stiffness_triplets(m, i * N, t);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j)
      for (int k = 0; k < N; ++k) {
        const double aij = A.at(i, j, A.constant() ? 0 : k);
        if (aij != 0.0) t.emplace_back(i * N + k, j * N + k, m.w[k] * aij);
      }
  Eigen::SparseMatrix<double> M(dim, dim);
  M.setFromTriplets(t.begin(), t.end());

  Eigen::VectorXd wv(dim);
  for (int i = 0; i < p; ++i)
    for (int k = 0; k < N; ++k) wv[i * N + k] = m.w[k];

  // certified lower bound: the dirichlet form is PSD, so the pencil's
  // smallest eigenvalue is at least the worst nodal gershgorin row of A
  double lower = std::numeric_limits<double>::infinity();
  for (int k = 0; k < A.nodes; ++k)
    for (int i = 0; i < p; ++i) {
      double row = A.at(i, i, k);
      for (int j = 0; j < p; ++j)
        if (j != i) row -= std::abs(A.at(i, j, k));
      lower = std::min(lower, row);
    }
  // shifting just below the bound keeps the target eigenvalue dominant
  // in the inverse iteration even when the low spectrum is clustered
  const double sigma = lower - 1e-3 * (1.0 + std::abs(lower));

  Eigen::SparseMatrix<double> shifted = M;
  for (int d = 0; d < dim; ++d) shifted.coeffRef(d, d) -= sigma * wv[d];
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("coercivity_lambda: factorization failed");

  std::mt19937 rng(123456789u);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd x(dim);
  for (int d = 0; d < dim; ++d) x[d] = dist(rng);
  x /= std::sqrt(x.dot(wv.asDiagonal() * x));

  double rho = 0.0, rho_prev = 1e300;
  for (int iter = 0; iter < 400; ++iter) {
    Eigen::VectorXd y = wv.asDiagonal() * x;
    Eigen::VectorXd z = lu.solve(y);
    const double nz = std::sqrt(z.dot(wv.asDiagonal() * z));
    if (!(nz > 0.0)) throw std::runtime_error("coercivity_lambda: iteration collapsed");
    x = z / nz;
    rho = x.dot(M * x);
    if (std::abs(rho - rho_prev) <= 1e-13 * std::max(1.0, std::abs(rho))) break;
    rho_prev = rho;
  }
  return rho;
}

std::vector<multiplicity_row> multiplicity_energies(const coupling& A_base, int n,
                                                    double T, int k, int N,
                                                    minimize_options base) {
  if (k < 1) throw std::invalid_argument("multiplicity_energies: k >= 1 required");
  if (!A_base.constant())
    throw std::invalid_argument("multiplicity_energies: constant coupling required");
  const int p = A_base.p;
  const manifold_model big = circle_model(n, T, N);

  std::vector<multiplicity_row> rows;
  for (int alpha = 1; alpha <= k; ++alpha) {
    if (N % alpha != 0)
      throw std::invalid_argument("multiplicity_energies: N must be divisible by alpha");
    const int Na = N / alpha;
    const manifold_model small = circle_model(n, T / alpha, Na);

    minimize_options opts = base;
    if (opts.seed.p() == 0) {
      // localized bump seed; the constant map is a non-minimizing
      // critical point on long circles
      const double t0 = small.extent / 2.0;
      opts.seed = zero_map(p, Na);
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < Na; ++j) {
          const double d = coord_distance(small, small.x[j], t0);
          opts.seed.comp[i][j] = std::exp(-0.5 * d * d) / (i + 1.0);
        }
    }
    solve_report rep = minimize_mu(small, A_base, opts);

    const pmap v = rescale_to_solution(rep.solution, rep.value, n);
    pmap lifted = zero_map(p, N);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < N; ++j) lifted.comp[i][j] = v.comp[i][j % Na];

    multiplicity_row row;
    row.alpha = alpha;
    row.mu = rep.value;
    row.energy = constraint_phi(big, lifted);
    row.lift_residual = residual_sup_relative(big, lifted, A_base, 1.0);
    row.identity_gap =
        std::abs(std::pow(row.energy, 2.0 / n) - std::pow(alpha, 2.0 / n) * row.mu);
    row.converged = rep.converged;
    rows.push_back(row);
  }
  return rows;
}

hv_report hv_inequality_check(const manifold_model& circle, const field& u) {
  if (circle.kind != model_kind::product_circle)
    throw std::invalid_argument("hv_inequality_check: circle model required");
  const int n = circle.n;
  const double ts = critical_exp(n);
  hv_report rep;
  const double norm_ts = lq_norm(circle, u, ts);
  rep.lhs = sharp_sobolev_sq_inv(n) * norm_ts * norm_ts;
  const double mass = dot_w(circle, u, u);
  rep.rhs = grad_energy(circle, u) +
            ((n - 2.0) * (n - 2.0) / 4.0 + 1.0 / (4.0 * circle.T * circle.T)) * mass;
  const double scale = std::max(1.0, std::max(std::abs(rep.lhs), std::abs(rep.rhs)));
  rep.holds = rep.lhs <= rep.rhs + 10.0 * circle.h * circle.h * scale;
  return rep;
}

}  // namespace critsys
