#pragma once

#include <stdexcept>
#include <string>
#include <vector>

// Symmetry-reduced 1-D model manifolds: radial sphere, circle x sphere
// product, radial euclidean ball. Cell-centered uniform grids keep the
// reduced operators away from the coordinate singularities.

namespace critsys {

using field = std::vector<double>;

// thrown on malformed run configuration (bad model parameters, bad
// coupling constraints, unknown config keys); maps to CLI exit code 2
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

enum class model_kind { sphere_radial, product_circle, ball_radial };

struct manifold_model {
  model_kind kind;
  int n = 0;         // ambient dimension, n >= 3
  int N = 0;         // grid cells
  double T = 0.0;    // circle radius (product_circle only)
  double R = 0.0;    // ball radius (ball_radial only)
  double h = 0.0;    // uniform spacing
  double extent = 0.0;    // coordinate range: pi | 2*pi*T | R
  double diameter = 0.0;  // geodesic diameter: pi | pi*T | R
  bool periodic = false;
  field x;      // nodes at (j + 1/2) h
  field w;      // quadrature weights, metric volume factor included
  field coef;   // first-derivative coefficient of the reduced laplacian
  field sface;  // metric factor at cell faces, drives the dirichlet form
};

double sphere_volume(int n);      // omega_n, volume of the unit n-sphere
double critical_exp(int n);       // 2n/(n-2)
double sharp_sobolev(int n);      // K_n
double sharp_sobolev_sq_inv(int n);  // K_n^{-2}
double yamabe_potential(int n);   // n(n-2)/4

manifold_model sphere_model(int n, int N);
manifold_model circle_model(int n, double T, int N);
manifold_model ball_model(int n, double R, int N);
manifold_model build_model(model_kind kind, int n, double param, int N);

// reduced laplacian, nonnegative sign convention (-f'' - coef f'),
// second-order central stencil; even reflection at poles / r=0,
// periodic wrap on the circle, one-sided closure at r=R
field laplacian(const manifold_model& m, const field& f);

double integrate(const manifold_model& m, const field& f);
double total_volume(const manifold_model& m);

// geodesic distance between two coordinate values of the model
double coord_distance(const manifold_model& m, double a, double b);

}  // namespace critsys
