#pragma once

#include <array>

#include "critsys/fields.hpp"

// Closed-form solution families, sharp constants, and every explicit
// coupling-matrix construction the library ships. Families are addressed
// from the CLI by the registry names: remark11, remark13, scalar_pair,
// prop91_pair, remark91, remark92, corollary91, remark12.

namespace critsys {

// symmetric p x p matrix per node; constant couplings stored once
struct coupling {
  int p = 0;
  int nodes = 1;  // 1 means constant-in-space
  std::vector<double> a;  // row-major p*p blocks, one per stored node

  bool constant() const { return nodes == 1; }
  double at(int i, int j, int k) const {
    return a[static_cast<size_t>(constant() ? 0 : k) * p * p + i * p + j];
  }
  double& entry(int i, int j, int k) {
    return a[static_cast<size_t>(constant() ? 0 : k) * p * p + i * p + j];
  }
};

coupling constant_coupling(int p, const std::vector<double>& entries);
coupling diagonal_coupling(int p, double c);
coupling yamabe_coupling(int n, int p);  // (n(n-2)/4) Id_p
coupling varying_coupling(int p, int N);  // zero-initialized per-node storage

struct coupling_flags {
  bool cooperative;      // off-diagonal entries >= 0 everywhere
  bool neg_cooperative;  // off-diagonal entries <= 0 everywhere
  bool fully_coupled;    // nonzero pattern connected as a graph on {1..p}
};
coupling_flags structure_tests(const coupling& A);
pmap coupling_apply(const coupling& A, const pmap& u);

// standard euclidean profile (lam/(lam^2 + r^2/(n(n-2))))^{(n-2)/2}
double euclid_bubble(double r, double lam, int n);
field euclid_bubble_field(const manifold_model& ball, double lam);

// sphere blow-up family u_lam(theta), lam > 1
double sphere_bubble(double theta, double lam, int n);
double sphere_bubble_max(double lam, int n);   // value at theta = 0
double sphere_bubble_min(double lam, int n);   // value at theta = pi
field sphere_bubble_field(const manifold_model& sph, double lam);

double constant_yamabe(int n);  // (n(n-2)/4)^{(n-2)/4}

struct bubble_params {
  double center = 0.0;
  double mu = 0.0;
  int n = 0;
};
field manifold_bubble(const manifold_model& m, const bubble_params& bp);

// 2-system carried by (u_lam - m_lam, u_lam); the off-diagonal and the
// corner entry are solved pointwise from the two defining linear
// identities with the (1,1) entry pinned at n(n-2)/4
struct pair_system {
  pmap u;
  coupling A;
};
pair_system remark11_system(const manifold_model& sph, double lam);

// constant 2-system with three distinct strongly positive solutions
// (n=6, p=2, source term -1)
struct triple_solutions {
  std::array<pmap, 3> maps;
  std::array<std::array<double, 2>, 3> values;
  coupling A;
};
triple_solutions remark13_family(const manifold_model& m, double lam);

// couple two positive scalar solutions with potentials h, k through an
// off-diagonal beta: alpha = h - beta v/u, gamma = k - beta u/v
coupling coupling_from_scalars(const field& u, const field& v, const field& h,
                               const field& k, const field& beta);

// signed pair coupling (h - s*eps, s*beta; s*beta, ht - s*epst) with
// eps = beta ut/u, epst = beta u/ut
coupling blowup_pair_coupling(const field& u, const field& ut,
                              const field& beta, int s, const field& h,
                              const field& ht);

// constant named matrices; constraint violations raise config_error
coupling remark91_matrix(int n, double a, double b, double c);  // a+b = b+c = n(n-2)/4
coupling matrix936(int n, double a, double b, double c, double d, double e);
coupling remark12_matrix(double h, double alpha, double beta);  // p = 3 block form
coupling corollary91_path(const coupling& A, double t, int n);  // n(n-2)/4 Id + tA

}  // namespace critsys
