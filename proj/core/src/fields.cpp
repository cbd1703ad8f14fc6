#include "critsys/fields.hpp"

#include <cmath>
#include <cstdio>

namespace critsys {

namespace {
void check_field(const manifold_model& m, const field& f) {
  if (static_cast<int>(f.size()) != m.N)
    throw std::invalid_argument("field length does not match grid size");
}
}  // namespace

pmap zero_map(int p, int N) {
  if (p < 1) throw std::invalid_argument("zero_map: p >= 1 required");
  pmap u;
  u.comp.assign(p, field(N, 0.0));
  return u;
}

pmap constant_map(const std::vector<double>& values, int N) {
  pmap u;
  for (double v : values) u.comp.push_back(field(N, v));
  return u;
}

double dot_w(const manifold_model& m, const field& f, const field& g) {
  check_field(m, f);
  check_field(m, g);
  double s = 0.0;
  for (int j = 0; j < m.N; ++j) s += m.w[j] * f[j] * g[j];
  return s;
}

double dot_w(const manifold_model& m, const pmap& u, const pmap& v) {
  if (u.p() != v.p()) throw std::invalid_argument("dot_w: component count mismatch");
  double s = 0.0;
  for (int i = 0; i < u.p(); ++i) s += dot_w(m, u.comp[i], v.comp[i]);
  return s;
}

double lq_norm(const manifold_model& m, const field& f, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("lq_norm: q > 0 required");
  check_field(m, f);
  double s = 0.0;
  for (int j = 0; j < m.N; ++j) s += m.w[j] * std::pow(std::abs(f[j]), q);
  return std::pow(s, 1.0 / q);
}

double grad_energy(const manifold_model& m, const field& f) {
  check_field(m, f);
  const int N = m.N;
  const double h = m.h;
  double e = 0.0;
  if (m.periodic) {
    for (int j = 0; j < N; ++j) {
      const double d = (f[(j + 1) % N] - f[j]) / h;
      e += m.sface[j] * h * d * d;
    }
    return e;
  }
  for (int j = 0; j + 1 < N; ++j) {
    const double d = (f[j + 1] - f[j]) / h;
    e += m.sface[j] * h * d * d;
  }
  if (m.kind == model_kind::ball_radial) {
    const double d = (f[N - 1] - f[N - 2]) / h;
    e += m.sface[N - 1] * h * d * d;
  }
  return e;
}

field stiffness_apply(const manifold_model& m, const field& f) {
  check_field(m, f);
  const int N = m.N;
  const double h = m.h;
  field out(N, 0.0);
  if (m.periodic) {
    for (int j = 0; j < N; ++j) {
      const double c = m.sface[j] * (f[(j + 1) % N] - f[j]) / h;
      out[(j + 1) % N] += c;
      out[j] -= c;
    }
    return out;
  }
  for (int j = 0; j + 1 < N; ++j) {
    const double c = m.sface[j] * (f[j + 1] - f[j]) / h;
    out[j + 1] += c;
    out[j] -= c;
  }
  if (m.kind == model_kind::ball_radial) {
    const double c = m.sface[N - 1] * (f[N - 1] - f[N - 2]) / h;
    out[N - 1] += c;
    out[N - 2] -= c;
  }
  return out;
}

field gradient(const manifold_model& m, const field& f) {
  check_field(m, f);
  const int N = m.N;
  const double h = m.h;
  field g(N);
  if (m.periodic) {
    for (int j = 0; j < N; ++j)
      g[j] = (f[(j + 1) % N] - f[(j + N - 1) % N]) / (2.0 * h);
    return g;
  }
  for (int j = 1; j + 1 < N; ++j) g[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  g[0] = (f[1] - f[0]) / h;
  g[N - 1] = (f[N - 1] - f[N - 2]) / h;
  return g;
}

field pmap_abs_q(const pmap& u, double q) {
  if (!(q > 0.0)) throw std::invalid_argument("pmap_abs_q: q > 0 required");
  if (u.p() < 1) throw std::invalid_argument("pmap_abs_q: empty map");
  field out(u.comp[0].size(), 0.0);
  for (const field& f : u.comp)
    for (size_t j = 0; j < f.size(); ++j) out[j] += std::pow(std::abs(f[j]), q);
  return out;
}

std::string field_csv(const manifold_model& m, const field& f) {
  check_field(m, f);
  std::string s = "coordinate,value\n";
  char buf[64];
  for (int j = 0; j < m.N; ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", m.x[j], f[j]);
    s += buf;
  }
  return s;
}

}  // namespace critsys
