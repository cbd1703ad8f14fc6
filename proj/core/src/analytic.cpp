#include "critsys/analytic.hpp"

#include <cmath>

namespace critsys {

namespace {

void check_symmetric_size(int p, const std::vector<double>& entries) {
  if (p < 1) throw std::invalid_argument("coupling: p >= 1 required");
  if (entries.size() != static_cast<size_t>(p) * p)
    throw std::invalid_argument("coupling: p*p entries required");
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (entries[i * p + j] != entries[j * p + i])
        throw std::invalid_argument("coupling: symmetry violated");
}

double safe_ratio(double num, double den, const char* what) {
  if (!(std::abs(den) > 1e-300))
    throw std::invalid_argument(std::string(what) + ": strict positivity violated");
  return num / den;
}

}  // namespace

coupling constant_coupling(int p, const std::vector<double>& entries) {
  check_symmetric_size(p, entries);
  coupling A;
  A.p = p;
  A.nodes = 1;
  A.a = entries;
  return A;
}

coupling diagonal_coupling(int p, double c) {
  std::vector<double> e(static_cast<size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i) e[i * p + i] = c;
  return constant_coupling(p, e);
}

coupling yamabe_coupling(int n, int p) {
  return diagonal_coupling(p, yamabe_potential(n));
}

coupling varying_coupling(int p, int N) {
  if (p < 1 || N < 1) throw std::invalid_argument("varying_coupling: bad shape");
  coupling A;
  A.p = p;
  A.nodes = N;
  A.a.assign(static_cast<size_t>(p) * p * N, 0.0);
  return A;
}

coupling_flags structure_tests(const coupling& A) {
  const int p = A.p;
  coupling_flags fl{true, true, false};
  std::vector<double> supij(static_cast<size_t>(p) * p, 0.0);
  for (int k = 0; k < A.nodes; ++k)
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) {
        const double v = A.at(i, j, k);
        supij[i * p + j] = std::max(supij[i * p + j], std::abs(v));
        if (i != j) {
          if (v < 0.0) fl.cooperative = false;
          if (v > 0.0) fl.neg_cooperative = false;
        }
      }
  // connectivity of the graph with edge i-j when sup|A_ij| > 1e-12
  std::vector<int> seen(p, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < p; ++j)
      if (!seen[j] && i != j && supij[i * p + j] > 1e-12) {
        seen[j] = 1;
        ++count;
        stack.push_back(j);
      }
  }
  fl.fully_coupled = (count == p);
  return fl;
}

pmap coupling_apply(const coupling& A, const pmap& u) {
  if (A.p != u.p()) throw std::invalid_argument("coupling_apply: p mismatch");
  const int N = static_cast<int>(u.comp[0].size());
  if (!A.constant() && A.nodes != N)
    throw std::invalid_argument("coupling_apply: node count mismatch");
  pmap out = zero_map(A.p, N);
  for (int i = 0; i < A.p; ++i)
    for (int j = 0; j < A.p; ++j) {
      if (A.constant()) {
        const double aij = A.at(i, j, 0);
        if (aij == 0.0) continue;
        for (int k = 0; k < N; ++k) out.comp[i][k] += aij * u.comp[j][k];
      } else {
        for (int k = 0; k < N; ++k) out.comp[i][k] += A.at(i, j, k) * u.comp[j][k];
      }
    }
  return out;
}

double euclid_bubble(double r, double lam, int n) {
  if (!(lam > 0.0)) throw std::invalid_argument("euclid_bubble: lam > 0 required");
  return std::pow(lam / (lam * lam + r * r / (n * (n - 2.0))), (n - 2.0) / 2.0);
}

field euclid_bubble_field(const manifold_model& ball, double lam) {
  field f(ball.N);
  for (int j = 0; j < ball.N; ++j) f[j] = euclid_bubble(ball.x[j], lam, ball.n);
  return f;
}

double sphere_bubble(double theta, double lam, int n) {
  if (!(lam > 1.0)) throw std::invalid_argument("sphere_bubble: lam > 1 required");
  const double c = std::pow(n * (n - 2.0) * (lam * lam - 1.0) / 4.0, (n - 2.0) / 4.0);
  return c * std::pow(lam - std::cos(theta), 1.0 - n / 2.0);
}

double sphere_bubble_max(double lam, int n) { return sphere_bubble(0.0, lam, n); }
double sphere_bubble_min(double lam, int n) {
  if (!(lam > 1.0)) throw std::invalid_argument("sphere_bubble: lam > 1 required");
  const double c = std::pow(n * (n - 2.0) * (lam * lam - 1.0) / 4.0, (n - 2.0) / 4.0);
  return c * std::pow(lam + 1.0, 1.0 - n / 2.0);
}

field sphere_bubble_field(const manifold_model& sph, double lam) {
  if (sph.kind != model_kind::sphere_radial)
    throw std::invalid_argument("sphere_bubble_field: sphere model required");
  field f(sph.N);
  for (int j = 0; j < sph.N; ++j) f[j] = sphere_bubble(sph.x[j], lam, sph.n);
  return f;
}

double constant_yamabe(int n) {
  return std::pow(yamabe_potential(n), (n - 2.0) / 4.0);
}

field manifold_bubble(const manifold_model& m, const bubble_params& bp) {
  if (!(bp.mu > 0.0)) throw std::invalid_argument("manifold_bubble: mu > 0 required");
  const int n = bp.n > 0 ? bp.n : m.n;
  field f(m.N);
  for (int j = 0; j < m.N; ++j) {
    const double d = coord_distance(m, m.x[j], bp.center);
    f[j] = std::pow(bp.mu / (bp.mu * bp.mu + d * d / (n * (n - 2.0))), (n - 2.0) / 2.0);
  }
  return f;
}

pair_system remark11_system(const manifold_model& sph, double lam) {
  if (sph.kind != model_kind::sphere_radial)
    throw std::invalid_argument("remark11_system: sphere model required");
  if (!(lam > 1.0)) throw std::invalid_argument("remark11_system: lam > 1 required");
  const int n = sph.n, N = sph.N;
  const double ln = yamabe_potential(n);
  const double ts = critical_exp(n);
  const double ml = sphere_bubble_min(lam, n);

  pair_system sys;
  sys.u = zero_map(2, N);
  sys.A = varying_coupling(2, N);
  for (int k = 0; k < N; ++k) {
    const double u = sphere_bubble(sph.x[k], lam, n);
    const double et = safe_ratio(u - ml, u, "remark11_system");
    const double eh = ln - std::pow(u, ts - 2.0) +
                      safe_ratio(std::pow(u - ml, ts - 1.0), u, "remark11_system");
    const double a12 = eh - et * ln;       // first defining identity
    const double a22 = ln - et * a12;      // second defining identity
    sys.u.comp[0][k] = u - ml;
    sys.u.comp[1][k] = u;
    sys.A.entry(0, 0, k) = ln;
    sys.A.entry(0, 1, k) = a12;
    sys.A.entry(1, 0, k) = a12;
    sys.A.entry(1, 1, k) = a22;
  }
  return sys;
}

triple_solutions remark13_family(const manifold_model& m, double lam) {
  if (!(lam > 0.0)) throw std::invalid_argument("remark13_family: lam > 0 required");
  const double wl = (lam * lam + (lam + 1.0) * (lam + 1.0)) / (2.0 * lam + 1.0);
  const double a11 = -(3.0 * lam * lam + 3.0 * lam + 1.0) / (2.0 * lam + 1.0);
  const double a12 = (lam * lam + lam) / (2.0 * lam + 1.0);

  triple_solutions out;
  out.values = {{{lam, lam + 1.0}, {lam + 1.0, lam}, {wl, wl}}};
  for (int s = 0; s < 3; ++s)
    out.maps[s] = constant_map({out.values[s][0], out.values[s][1]}, m.N);
  out.A = constant_coupling(2, {a11, a12, a12, a11});
  return out;
}

coupling coupling_from_scalars(const field& u, const field& v, const field& h,
                               const field& k, const field& beta) {
  const int N = static_cast<int>(u.size());
  if (v.size() != u.size() || h.size() != u.size() || k.size() != u.size() ||
      beta.size() != u.size())
    throw std::invalid_argument("coupling_from_scalars: size mismatch");
  coupling A = varying_coupling(2, N);
  for (int j = 0; j < N; ++j) {
    if (!(u[j] > 0.0) || !(v[j] > 0.0))
      throw std::invalid_argument("coupling_from_scalars: u, v must be positive");
    A.entry(0, 0, j) = h[j] - beta[j] * safe_ratio(v[j], u[j], "coupling_from_scalars");
    A.entry(1, 1, j) = k[j] - beta[j] * safe_ratio(u[j], v[j], "coupling_from_scalars");
    A.entry(0, 1, j) = beta[j];
    A.entry(1, 0, j) = beta[j];
  }
  return A;
}

coupling blowup_pair_coupling(const field& u, const field& ut, const field& beta,
                              int s, const field& h, const field& ht) {
  const int N = static_cast<int>(u.size());
  if (ut.size() != u.size() || beta.size() != u.size() || h.size() != u.size() ||
      ht.size() != u.size())
    throw std::invalid_argument("blowup_pair_coupling: size mismatch");
  if (s != 1 && s != -1)
    throw std::invalid_argument("blowup_pair_coupling: s must be +1 or -1");
  coupling A = varying_coupling(2, N);
  for (int j = 0; j < N; ++j) {
    if (!(u[j] > 0.0) || !(ut[j] > 0.0))
      throw std::invalid_argument("blowup_pair_coupling: u, ut must be positive");
    const double eps = beta[j] * safe_ratio(ut[j], u[j], "blowup_pair_coupling");
    const double epst = beta[j] * safe_ratio(u[j], ut[j], "blowup_pair_coupling");
    A.entry(0, 0, j) = h[j] - s * eps;
    A.entry(1, 1, j) = ht[j] - s * epst;
    A.entry(0, 1, j) = s * beta[j];
    A.entry(1, 0, j) = s * beta[j];
  }
  return A;
}

coupling remark91_matrix(int n, double a, double b, double c) {
  const double ln = yamabe_potential(n);
  if (std::abs(a + b - ln) > 1e-12)
    throw config_error("remark91_matrix: constraint a + b = n(n-2)/4 violated");
  if (std::abs(b + c - ln) > 1e-12)
    throw config_error("remark91_matrix: constraint b + c = n(n-2)/4 violated");
  return constant_coupling(2, {a, b, b, c});
}

coupling matrix936(int n, double a, double b, double c, double d, double e) {
  const double ln = yamabe_potential(n);
  if (!(a > 0.0 && b > 0.0 && c > 0.0 && d > 0.0 && e > 0.0))
    throw config_error("matrix936: entries a, b, c, d, e must be positive");
  if (std::abs(a + b - ln) > 1e-12)
    throw config_error("matrix936: constraint a + b = n(n-2)/4 violated");
  if (std::abs(b + c - d - ln) > 1e-12)
    throw config_error("matrix936: constraint b + c = d + n(n-2)/4 violated");
  if (std::abs(e - d - ln) > 1e-12)
    throw config_error("matrix936: constraint e = d + n(n-2)/4 violated");
  return constant_coupling(3, {a, b, 0.0, b, c, -d, 0.0, -d, e});
}

coupling remark12_matrix(double h, double alpha, double beta) {
  return constant_coupling(
      3, {h / 2.0, h / 2.0, alpha, h / 2.0, h / 2.0, -alpha, alpha, -alpha, beta});
}

coupling corollary91_path(const coupling& A, double t, int n) {
  const double ln = yamabe_potential(n);
  coupling out = A;
  for (size_t idx = 0; idx < out.a.size(); ++idx) out.a[idx] *= t;
  for (int k = 0; k < out.nodes; ++k)
    for (int i = 0; i < out.p; ++i) out.entry(i, i, k) += ln;
  return out;
}

}  // namespace critsys
