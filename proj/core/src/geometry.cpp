#include "critsys/geometry.hpp"

#include <cmath>
#include <numbers>

namespace critsys {

namespace {
constexpr double pi = std::numbers::pi;

void check_field(const manifold_model& m, const field& f) {
  if (static_cast<int>(f.size()) != m.N)
    throw std::invalid_argument("field length does not match grid size");
}
}  // namespace

double sphere_volume(int n) {
  if (n < 1) throw std::invalid_argument("sphere_volume: n >= 1 required");
  return 2.0 * std::pow(pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

double critical_exp(int n) {
  if (n < 3) throw std::invalid_argument("critical_exp: n >= 3 required");
  return 2.0 * n / (n - 2.0);
}

double sharp_sobolev_sq_inv(int n) {
  if (n < 3) throw std::invalid_argument("sharp_sobolev: n >= 3 required");
  return n * (n - 2.0) * std::pow(sphere_volume(n), 2.0 / n) / 4.0;
}

double sharp_sobolev(int n) { return 1.0 / std::sqrt(sharp_sobolev_sq_inv(n)); }

double yamabe_potential(int n) {
  if (n < 3) throw std::invalid_argument("yamabe_potential: n >= 3 required");
  return n * (n - 2.0) / 4.0;
}

manifold_model sphere_model(int n, int N) {
  if (n < 3) throw config_error("sphere model: n >= 3 required");
  if (N < 16) throw config_error("sphere model: N >= 16 required");
  manifold_model m;
  m.kind = model_kind::sphere_radial;
  m.n = n;
  m.N = N;
  m.extent = pi;
  m.diameter = pi;
  m.h = pi / N;
  m.periodic = false;
  m.x.resize(N);
  m.w.resize(N);
  m.coef.resize(N);
  m.sface.resize(N - 1);
  const double wn1 = sphere_volume(n - 1);
  for (int j = 0; j < N; ++j) {
    m.x[j] = (j + 0.5) * m.h;
    m.w[j] = wn1 * std::pow(std::sin(m.x[j]), n - 1) * m.h;
    m.coef[j] = (n - 1) / std::tan(m.x[j]);
  }
  for (int j = 0; j + 1 < N; ++j)
    m.sface[j] = wn1 * std::pow(std::sin((j + 1) * m.h), n - 1);
  return m;
}

manifold_model circle_model(int n, double T, int N) {
  if (n < 3) throw config_error("circle model: n >= 3 required");
  if (N < 16) throw config_error("circle model: N >= 16 required");
  if (!(T > 0.0)) throw config_error("circle model: T > 0 required");
  manifold_model m;
  m.kind = model_kind::product_circle;
  m.n = n;
  m.N = N;
  m.T = T;
  m.extent = 2.0 * pi * T;
  m.diameter = pi * T;
  m.h = m.extent / N;
  m.periodic = true;
  const double wn1 = sphere_volume(n - 1);
  m.x.resize(N);
  m.w.assign(N, wn1 * m.h);
  m.coef.assign(N, 0.0);
  m.sface.assign(N, wn1);  // face j sits between cells j and (j+1) mod N
  for (int j = 0; j < N; ++j) m.x[j] = (j + 0.5) * m.h;
  return m;
}

manifold_model ball_model(int n, double R, int N) {
  if (n < 3) throw config_error("ball model: n >= 3 required");
  if (N < 16) throw config_error("ball model: N >= 16 required");
  if (!(R > 0.0)) throw config_error("ball model: R > 0 required");
  manifold_model m;
  m.kind = model_kind::ball_radial;
  m.n = n;
  m.N = N;
  m.R = R;
  m.extent = R;
  m.diameter = R;
  m.h = R / N;
  m.periodic = false;
  const double wn1 = sphere_volume(n - 1);
  m.x.resize(N);
  m.w.resize(N);
  m.coef.resize(N);
  m.sface.resize(N);  // includes the outer face at r = R
  for (int j = 0; j < N; ++j) {
    m.x[j] = (j + 0.5) * m.h;
    m.w[j] = wn1 * std::pow(m.x[j], n - 1) * m.h;
    m.coef[j] = (n - 1) / m.x[j];
  }
  for (int j = 0; j < N; ++j)
    m.sface[j] = wn1 * std::pow((j + 1) * m.h, n - 1);
  return m;
}

manifold_model build_model(model_kind kind, int n, double param, int N) {
  switch (kind) {
    case model_kind::sphere_radial: return sphere_model(n, N);
    case model_kind::product_circle: return circle_model(n, param, N);
    case model_kind::ball_radial: return ball_model(n, param, N);
  }
  throw config_error("build_model: unknown model kind");
}

field laplacian(const manifold_model& m, const field& f) {
  check_field(m, f);
  const int N = m.N;
  const double h = m.h;
  field out(N);
  if (m.periodic) {
    for (int j = 0; j < N; ++j) {
      const double fp = f[(j + 1) % N];
      const double fm = f[(j + N - 1) % N];
      out[j] = -(fp - 2.0 * f[j] + fm) / (h * h);
    }
    return out;
  }
  for (int j = 1; j + 1 < N; ++j) {
    const double d2 = (f[j + 1] - 2.0 * f[j] + f[j - 1]) / (h * h);
    const double d1 = (f[j + 1] - f[j - 1]) / (2.0 * h);
    out[j] = -d2 - m.coef[j] * d1;
  }
  {  // even reflection below the first cell (pole / center)
    const double d2 = (f[1] - f[0]) / (h * h);
    const double d1 = (f[1] - f[0]) / (2.0 * h);
    out[0] = -d2 - m.coef[0] * d1;
  }
  if (m.kind == model_kind::sphere_radial) {
    // even reflection beyond the last cell (second pole)
    const double d2 = (f[N - 2] - f[N - 1]) / (h * h);
    const double d1 = (f[N - 1] - f[N - 2]) / (2.0 * h);
    out[N - 1] = -d2 - m.coef[N - 1] * d1;
  } else {
    // one-sided second-order closure at r = R
    const double d2 =
        (2.0 * f[N - 1] - 5.0 * f[N - 2] + 4.0 * f[N - 3] - f[N - 4]) / (h * h);
    const double d1 = (3.0 * f[N - 1] - 4.0 * f[N - 2] + f[N - 3]) / (2.0 * h);
    out[N - 1] = -d2 - m.coef[N - 1] * d1;
  }
  return out;
}

double integrate(const manifold_model& m, const field& f) {
  check_field(m, f);
  double s = 0.0;
  for (int j = 0; j < m.N; ++j) s += m.w[j] * f[j];
  return s;
}

double total_volume(const manifold_model& m) {
  double s = 0.0;
  for (double wj : m.w) s += wj;
  return s;
}

double coord_distance(const manifold_model& m, double a, double b) {
  double d = std::abs(a - b);
  if (m.periodic) d = std::min(d, m.extent - d);
  return d;
}

}  // namespace critsys
