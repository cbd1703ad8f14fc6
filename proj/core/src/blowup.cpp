#include "critsys/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace critsys {

namespace {

// np.interp-style sampling: clamped at the ends, wrapped on the circle
double interp_at(const manifold_model& m, const field& f, double t) {
  const int N = m.N;
  if (m.periodic) {
    t = std::fmod(t, m.extent);
    if (t < 0.0) t += m.extent;
    if (t <= m.x[0]) {
      const double x0 = m.x[N - 1] - m.extent;  // wrap segment below x[0]
      const double s = (t - x0) / (m.x[0] - x0);
      return f[N - 1] + s * (f[0] - f[N - 1]);
    }
    if (t >= m.x[N - 1]) {
      const double x1 = m.x[0] + m.extent;
      const double s = (t - m.x[N - 1]) / (x1 - m.x[N - 1]);
      return f[N - 1] + s * (f[0] - f[N - 1]);
    }
  } else {
    if (t <= m.x[0]) return f[0];
    if (t >= m.x[N - 1]) return f[N - 1];
  }
  const auto it = std::upper_bound(m.x.begin(), m.x.end(), t);
  const int k = static_cast<int>(it - m.x.begin());
  const double s = (t - m.x[k - 1]) / (m.x[k] - m.x[k - 1]);
  return f[k - 1] + s * (f[k] - f[k - 1]);
}

double deviation_norm(const pmap& u, const pmap& u0, int k) {
  double s = 0.0;
  for (int i = 0; i < u.p(); ++i) {
    const double d = u.comp[i][k] - u0.comp[i][k];
    s += d * d;
  }
  return std::sqrt(s);
}

field constant_field(int N, double c) { return field(static_cast<size_t>(N), c); }

}  // namespace

int blowup_sequence::total_bubbles() const {
  int k = 0;
  for (int b : bubbles) k += b;
  return k;
}

center_weight extract_center_weight(const manifold_model& m, const pmap& u) {
  if (u.p() == 0 || u.comp[0].size() != static_cast<size_t>(m.N))
    throw std::invalid_argument("extract_center_weight: shape mismatch");
  double best = 0.0;
  int bi = -1, bk = -1;
  for (int k = 0; k < m.N; ++k)
    for (int i = 0; i < u.p(); ++i)
      if (u.comp[i][k] > best) {
        best = u.comp[i][k];
        bi = i;
        bk = k;
      }
  if (bi < 0) throw std::invalid_argument("extract_center_weight: map has no positive values");
  center_weight cw;
  cw.center = m.x[bk];
  cw.mu = std::pow(best, -2.0 / (m.n - 2.0));
  cw.component = bi;
  cw.index = bk;
  return cw;
}

std::vector<double> energy_splitting_residual(const blowup_sequence& seq,
                                              const coupling& A_limit) {
  if (!seq.has_limit || seq.bubbles.empty())
    throw config_error("energy_splitting_residual: sequence lacks a declared limit");
  const int n = seq.model.n;
  const double quantum =
      seq.total_bubbles() / double(n) * std::pow(sharp_sobolev_sq_inv(n), n / 2.0);
  const double limit_energy = free_energy(seq.model, seq.limit, A_limit);
  std::vector<double> out;
  out.reserve(seq.maps.size());
  for (int idx = 0; idx < seq.size(); ++idx) {
    const double e = free_energy(seq.model, seq.maps[idx], seq.couplings[idx]);
    out.push_back(std::abs(e - limit_energy - quantum));
  }
  return out;
}

double l2_concentration_ratio(const manifold_model& m, const pmap& u,
                              const std::vector<double>& centers, double delta) {
  if (centers.empty()) throw std::invalid_argument("l2_concentration_ratio: no centers");
  if (!(delta > 0.0) || delta >= m.diameter)
    throw std::invalid_argument("l2_concentration_ratio: delta outside (0, diameter)");
  double total = 0.0, exterior = 0.0;
  for (int k = 0; k < m.N; ++k) {
    double q = 0.0;
    for (int i = 0; i < u.p(); ++i) q += u.comp[i][k] * u.comp[i][k];
    q *= m.w[k];
    total += q;
    double d = m.diameter;
    for (double c : centers) d = std::min(d, coord_distance(m, m.x[k], c));
    if (d > delta) exterior += q;
  }
  if (!(total > 0.0)) throw std::invalid_argument("l2_concentration_ratio: zero map");
  return exterior / total;
}

double pointwise_envelope(const manifold_model& m, const pmap& u, const pmap& u0,
                          const std::vector<double>& centers) {
  if (centers.empty()) throw std::invalid_argument("pointwise_envelope: no centers");
  if (u.p() != u0.p() || u.comp[0].size() != u0.comp[0].size())
    throw std::invalid_argument("pointwise_envelope: shape mismatch");
  const double ex = (m.n - 2.0) / 2.0;
  double sup = 0.0;
  for (int k = 0; k < m.N; ++k) {
    double d = m.diameter;
    for (double c : centers) d = std::min(d, coord_distance(m, m.x[k], c));
    sup = std::max(sup, std::pow(d, ex) * deviation_norm(u, u0, k));
  }
  return sup;
}

double exterior_envelope(const manifold_model& m, const pmap& u, const pmap& u0,
                         const std::vector<double>& centers,
                         const std::vector<double>& mus, double R) {
  if (centers.size() != mus.size())
    throw std::invalid_argument("exterior_envelope: centers/weights mismatch");
  if (centers.empty()) throw std::invalid_argument("exterior_envelope: no centers");
  const double ex = (m.n - 2.0) / 2.0;
  double sup = 0.0;
  for (int k = 0; k < m.N; ++k) {
    bool outside = true;
    double d = m.diameter;
    for (size_t j = 0; j < centers.size(); ++j) {
      const double dj = coord_distance(m, m.x[k], centers[j]);
      d = std::min(d, dj);
      if (dj < R * std::sqrt(mus[j])) outside = false;
    }
    if (!outside) continue;
    sup = std::max(sup, std::pow(d, ex) * deviation_norm(u, u0, k));
  }
  return sup;
}

balance_report local_balance_checks(const manifold_model& m, const pmap& u,
                                    const coupling& A, double center, double delta,
                                    double s) {
  if (A.p != u.p()) throw std::invalid_argument("local_balance_checks: coupling size mismatch");
  if (!(delta > 0.0) || 2.0 * delta >= m.diameter)
    throw std::invalid_argument("local_balance_checks: double ball exceeds the model");
  if (!(s >= 1.0)) throw std::invalid_argument("local_balance_checks: s >= 1 required");
  const double ts = critical_exp(m.n);

  balance_report rep;
  double ls_mass = 0.0;
  for (int k = 0; k < m.N; ++k) {
    const double d = coord_distance(m, m.x[k], center);
    double q2 = 0.0;
    for (int i = 0; i < u.p(); ++i) {
      const double v = std::abs(u.comp[i][k]);
      rep.mass_lhs += m.w[k] * v;
      rep.mass_rhs += m.w[k] * std::pow(v, ts - 1.0);
      q2 += v * v;
      if (d <= delta) rep.sup_lhs = std::max(rep.sup_lhs, v);
      if (d <= 2.0 * delta) ls_mass += m.w[k] * std::pow(v, s);
    }
    if (d <= 2.0 * delta) {
      const double q = std::sqrt(q2);
      rep.grad_rhs += m.w[k] * (1.0 + std::pow(q, ts - 2.0)) * q2;
    }
  }
  rep.sup_rhs = std::pow(ls_mass, 1.0 / s);

  // dirichlet energy over the faces inside B(center, delta)
  auto face_term = [&](int a, int b, double sf, double pos) {
    if (coord_distance(m, pos, center) > delta) return;
    for (int i = 0; i < u.p(); ++i) {
      const double slope = (u.comp[i][b] - u.comp[i][a]) / m.h;
      rep.grad_lhs += sf * m.h * slope * slope;
    }
  };
  if (m.periodic) {
    for (int j = 0; j < m.N; ++j)
      face_term(j, (j + 1) % m.N, m.sface[j], std::fmod((j + 1) * m.h, m.extent));
  } else {
    for (int j = 0; j + 1 < m.N; ++j) face_term(j, j + 1, m.sface[j], (j + 1) * m.h);
    if (m.kind == model_kind::ball_radial)
      face_term(m.N - 2, m.N - 1, m.sface[m.N - 1], m.extent);
  }

  rep.sup_ratio = rep.sup_lhs / rep.sup_rhs;
  rep.mass_ratio = rep.mass_lhs / rep.mass_rhs;
  rep.grad_ratio = rep.grad_lhs / rep.grad_rhs;
  return rep;
}

rescaled_profile standard_rescale(const manifold_model& m, const pmap& u,
                                  double center, double mu, rescale_power power,
                                  double rho_max, int n_local) {
  if (!(mu > 0.0)) throw std::invalid_argument("standard_rescale: mu > 0 required");
  const int n = m.n;
  const double scale = power == rescale_power::half ? std::sqrt(mu) : mu;
  const double amp = power == rescale_power::half ? 1.0 : std::pow(mu, (n - 2.0) / 2.0);
  const double avail = m.periodic ? m.diameter : m.extent - center;
  if (!(avail > 0.0)) throw std::invalid_argument("standard_rescale: center outside the chart");
  if (rho_max <= 0.0) rho_max = 0.9 * avail / scale;
  if (scale * rho_max > avail * (1.0 + 1e-12))
    throw std::invalid_argument("standard_rescale: window exceeds the chart");

  rescaled_profile prof;
  prof.local = ball_model(n, rho_max, n_local);
  prof.rho_max = rho_max;
  prof.scale = scale;
  prof.u = zero_map(u.p(), n_local);
  for (int i = 0; i < u.p(); ++i)
    for (int j = 0; j < n_local; ++j)
      prof.u.comp[i][j] = amp * interp_at(m, u.comp[i], center + scale * prof.local.x[j]);
  return prof;
}

radial_fit sharp_asymptotics_fit(const manifold_model& local, const field& u,
                                 double r1, double r2) {
  if (!(r1 > 0.0) || !(r2 > r1)) throw std::invalid_argument("sharp_asymptotics_fit: degenerate annulus");
  const double ex = 2.0 - local.n;
  double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
  int count = 0;
  for (int k = 0; k < local.N; ++k) {
    const double r = local.x[k];
    if (r < r1 || r > r2) continue;
    const double phi = std::pow(r, ex);
    s11 += phi * phi;
    s12 += phi;
    s22 += 1.0;
    b1 += phi * u[k];
    b2 += u[k];
    ++count;
  }
  if (count < 3) throw std::invalid_argument("sharp_asymptotics_fit: degenerate annulus");
  const double det = s11 * s22 - s12 * s12;
  radial_fit fit;
  fit.amplitude = (b1 * s22 - b2 * s12) / det;
  fit.offset = (s11 * b2 - s12 * b1) / det;
  double misfit = 0.0, mass = 0.0;
  for (int k = 0; k < local.N; ++k) {
    const double r = local.x[k];
    if (r < r1 || r > r2) continue;
    const double e = u[k] - (fit.amplitude * std::pow(r, ex) + fit.offset);
    misfit += e * e;
    mass += u[k] * u[k];
  }
  fit.residual = mass > 0.0 ? std::sqrt(misfit / mass) : std::sqrt(misfit);
  return fit;
}

pohozaev_pair pohozaev_residual(const manifold_model& ball, const field& u, double r) {
  if (ball.kind != model_kind::ball_radial)
    throw std::invalid_argument("pohozaev_residual: flat radial model required");
  const int N = ball.N;
  const double h = ball.h;
  const long jface = std::lround(r / h);
  if (jface < 1 || jface > N - 1)
    throw std::invalid_argument("pohozaev_residual: radius outside the grid");
  const double rb = jface * h;
  const int n = ball.n;

  const field g = gradient(ball, u);
  const field L = laplacian(ball, u);
  pohozaev_pair pp;
  for (long j = 0; j < jface; ++j)
    pp.lhs += ball.w[j] * (ball.x[j] * g[j] + 0.5 * (n - 2.0) * u[j]) * L[j];

  const double ub = 0.5 * (u[jface - 1] + u[jface]);
  const double gb = (u[jface] - u[jface - 1]) / h;
  const double area = sphere_volume(n - 1) * std::pow(rb, n - 1.0);
  pp.rhs = -area * rb * gb * gb + 0.5 * area * rb * gb * gb -
           0.5 * (n - 2.0) * area * ub * gb;
  return pp;
}

std::vector<double> corollary81_ratio(const blowup_sequence& seq, double delta) {
  std::vector<double> out;
  out.reserve(seq.maps.size());
  const manifold_model& m = seq.model;
  for (const pmap& u : seq.maps) {
    const center_weight cw = extract_center_weight(m, u);
    if (cw.mu < 1e-12)
      throw std::invalid_argument("corollary81_ratio: weight below 1e-12");
    const double rad = delta * std::sqrt(cw.mu);
    if (rad >= m.diameter)
      throw std::invalid_argument("corollary81_ratio: ball exceeds the model");
    double mass = 0.0;
    for (int k = 0; k < m.N; ++k) {
      if (coord_distance(m, m.x[k], cw.center) > rad) continue;
      for (int i = 0; i < u.p(); ++i) mass += m.w[k] * u.comp[i][k] * u.comp[i][k];
    }
    out.push_back(mass / (cw.mu * cw.mu));
  }
  return out;
}

blowup_sequence build_family(const std::string& name, const manifold_model& m,
                             const std::vector<double>& grid,
                             const family_options& opts) {
  if (m.kind != model_kind::sphere_radial)
    throw config_error("build_family: sphere model required");
  if (grid.empty()) throw config_error("build_family: empty parameter grid");
  for (size_t i = 1; i < grid.size(); ++i) {
    const bool up = grid[1] > grid[0];
    if ((up && grid[i] <= grid[i - 1]) || (!up && grid[i] >= grid[i - 1]))
      throw config_error("build_family: parameter grid must be strictly monotone");
  }
  if (!opts.beta.empty() && opts.beta.size() != grid.size())
    throw config_error("build_family: beta schedule length mismatch");
  for (double b : opts.beta)
    if (!(b > 0.0)) throw config_error("build_family: beta schedule must be positive");

  const int n = m.n;
  const int N = m.N;
  blowup_sequence seq;
  seq.model = m;
  seq.params = grid;

  if (name == "sphere_yamabe") {
    for (double lam : grid) {
      pmap u = zero_map(1, N);
      u.comp[0] = sphere_bubble_field(m, lam);
      seq.maps.push_back(std::move(u));
      seq.couplings.push_back(yamabe_coupling(n, 1));
    }
    seq.limit = zero_map(1, N);
    seq.limit_coupling = yamabe_coupling(n, 1);
    seq.bubbles = {1};
    seq.has_limit = true;
  } else if (name == "remark11") {
    for (double lam : grid) {
      pair_system ps = remark11_system(m, lam);
      seq.maps.push_back(std::move(ps.u));
      seq.couplings.push_back(std::move(ps.A));
    }
    seq.limit = zero_map(2, N);
    seq.limit_coupling = yamabe_coupling(n, 2);
    seq.bubbles = {1, 1};
    seq.has_limit = true;
  } else if (name == "prop91_pair") {
    const field hv = constant_field(N, yamabe_potential(n));
    const field uc = constant_field(N, constant_yamabe(n));
    for (size_t idx = 0; idx < grid.size(); ++idx) {
      const double lam = grid[idx];
      const field ub = sphere_bubble_field(m, lam);
      const double mu = std::pow(sphere_bubble_max(lam, n), -2.0 / (n - 2.0));
      const double bval = opts.beta.empty() ? std::pow(mu, n - 2.0) : opts.beta[idx];
      const field bf = constant_field(N, bval);
      seq.couplings.push_back(blowup_pair_coupling(ub, uc, bf, opts.s, hv, hv));
      pmap u = zero_map(2, N);
      u.comp[0] = ub;
      u.comp[1] = uc;
      seq.maps.push_back(std::move(u));
    }
    seq.limit = zero_map(2, N);
    seq.limit.comp[1] = uc;
    seq.limit_coupling = yamabe_coupling(n, 2);
    seq.bubbles = {1, 0};
    seq.has_limit = true;
  } else if (name == "remark91_triple") {
    const double half = 0.5 * yamabe_potential(n);
    const coupling A = remark91_matrix(n, half, half, half);
    for (double lam : grid) {
      const field ub = sphere_bubble_field(m, lam);
      pmap u = zero_map(2, N);
      u.comp[0] = ub;
      u.comp[1] = ub;
      seq.maps.push_back(std::move(u));
      seq.couplings.push_back(A);
    }
    seq.limit = zero_map(2, N);
    seq.limit_coupling = A;
    seq.bubbles = {1, 1};
    seq.has_limit = true;
  } else {
    throw config_error("build_family: unknown family '" + name + "'");
  }
  return seq;
}

std::vector<blowup_row> family_diagnostics(const blowup_sequence& seq, double delta) {
  const std::vector<double> split = energy_splitting_residual(seq, seq.limit_coupling);
  std::vector<blowup_row> rows;
  rows.reserve(seq.maps.size());
  for (int idx = 0; idx < seq.size(); ++idx) {
    const pmap& u = seq.maps[idx];
    const center_weight cw = extract_center_weight(seq.model, u);
    blowup_row row;
    row.index = idx;
    row.lambda = seq.params[idx];
    row.mu = cw.mu;
    row.R_delta = l2_concentration_ratio(seq.model, u, {cw.center}, delta);
    row.envelope = pointwise_envelope(seq.model, u, seq.limit, {cw.center});
    row.splitting_residual = split[idx];

    const rescaled_profile slow =
        standard_rescale(seq.model, u, cw.center, cw.mu, rescale_power::half);
    const radial_fit fit = sharp_asymptotics_fit(
        slow.local, slow.u.comp[cw.component], 0.2 * slow.rho_max, 0.8 * slow.rho_max);
    row.A_fit = fit.amplitude;
    row.c_fit = fit.offset;

    const rescaled_profile fast =
        standard_rescale(seq.model, u, cw.center, cw.mu, rescale_power::one);
    const pohozaev_pair pp = pohozaev_residual(
        fast.local, fast.u.comp[cw.component], std::min(1.0, 0.8 * fast.rho_max));
    row.pohozaev_gap = std::abs(pp.lhs - pp.rhs);
    rows.push_back(row);
  }
  return rows;
}

std::string blowup_csv(const std::vector<blowup_row>& rows) {
  std::string out =
      "index,lambda,mu,R_delta,envelope,splitting_residual,A_fit,c_fit,pohozaev_gap\n";
  char buf[320];
  for (const blowup_row& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.index,
                  r.lambda, r.mu, r.R_delta, r.envelope, r.splitting_residual, r.A_fit,
                  r.c_fit, r.pohozaev_gap);
    out += buf;
  }
  return out;
}

}  // namespace critsys
