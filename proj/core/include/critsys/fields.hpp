#pragma once

#include <string>

#include "critsys/geometry.hpp"

// Field / p-map algebra: weighted norms, dirichlet energies, the
// pointwise power sums |U|^q, and the CSV dump format.

namespace critsys {

struct pmap {
  std::vector<field> comp;
  int p() const { return static_cast<int>(comp.size()); }
};

pmap zero_map(int p, int N);
pmap constant_map(const std::vector<double>& values, int N);

double dot_w(const manifold_model& m, const field& f, const field& g);
double dot_w(const manifold_model& m, const pmap& u, const pmap& v);

// (sum_j w_j |f_j|^q)^{1/q}
double lq_norm(const manifold_model& m, const field& f, double q);

// int |grad f|^2 dv: squared slopes at cell-face midpoints weighted by
// the face metric factor (pole faces vanish; the outer ball face reuses
// the last interior slope)
double grad_energy(const manifold_model& m, const field& f);

// Q f with <Q f, f> = grad_energy(f); the euclidean (unweighted) pairing
field stiffness_apply(const manifold_model& m, const field& f);

// nodal gradient: centered differences, one-sided at closures
field gradient(const manifold_model& m, const field& f);

// pointwise sum_i |u_i|^q
field pmap_abs_q(const pmap& u, double q);

// two columns `coordinate,value`, header line, 17 significant digits
std::string field_csv(const manifold_model& m, const field& f);

}  // namespace critsys
