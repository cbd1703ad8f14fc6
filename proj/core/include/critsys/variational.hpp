#pragma once

#include <array>

#include "critsys/analytic.hpp"

// Constrained energy functionals and solvers: the quadratic form I_A,
// the volume-type constraint Phi, projected gradient descent for the
// invariant mu^p, damped Newton for the strong system, the coercivity
// eigenvalue, and the quotient-lift multiplicity table.

namespace critsys {

struct solve_report {
  pmap solution;
  double value = 0.0;         // mu estimate or free energy
  double residual_sup = 0.0;  // relative strong-form sup residual
  int iterations = 0;
  bool converged = false;
  std::vector<std::array<double, 3>> history;  // iteration, value, gradient norm
};

double functional_ia(const manifold_model& m, const pmap& u, const coupling& A);
double constraint_phi(const manifold_model& m, const pmap& u);
double free_energy(const manifold_model& m, const pmap& u, const coupling& A);

// componentwise lap(u_i) + (A u)_i - Lambda |u_i|^{2*-2} u_i
pmap gradient_residual(const manifold_model& m, const pmap& u, const coupling& A,
                       double lambda);
// sup of the above divided by max(1, max_i ||u_i||_inf^{2*-1})
double residual_sup_relative(const manifold_model& m, const pmap& u,
                             const coupling& A, double lambda);

// derivative of I_A in the weighted pairing: 2 W^{-1} Q u_i + 2 (A u)_i
pmap functional_gradient(const manifold_model& m, const pmap& u, const coupling& A);

pmap normalize_phi(const manifold_model& m, const pmap& u);

struct minimize_options {
  pmap seed;          // empty: graded constant map, component i at 1/(i+1)
  int p = 1;          // used only when seed is empty
  double step0 = 0.1;
  double tol = 1e-9;  // projected-gradient norm, relative to |value|
  int max_iter = 20000;
  bool abs_projection = false;  // requires -A cooperative
  bool record_history = true;
};
solve_report minimize_mu(const manifold_model& m, const coupling& A,
                         minimize_options opts = {});

// scale a Phi-normalized minimizer into a solution of the unit system
pmap rescale_to_solution(const pmap& u, double mu, int n);

struct newton_options {
  double tol = 1e-10;        // relative sup residual
  int max_iter = 50;
  int max_halvings = 30;
  double lambda_rhs = 1.0;
};
solve_report newton_solve(const manifold_model& m, const coupling& A,
                          const pmap& seed, newton_options opts = {});

// smallest eigenvalue of the system operator under the weighted L^2
// normalization; positive return means the quadratic form is coercive
double coercivity_lambda(const manifold_model& m, const coupling& A);

struct multiplicity_row {
  int alpha = 0;
  double mu = 0.0;
  double energy = 0.0;         // 2*-power mass of the lifted solution
  double lift_residual = 0.0;  // relative sup residual of the lifted map
  double identity_gap = 0.0;   // |energy^{2/n} - alpha^{2/n} mu|
  bool converged = false;
};
// minimize on the 1/alpha quotient circle, lift by periodic extension,
// rescale to a solution; N must be divisible by every alpha <= k
std::vector<multiplicity_row> multiplicity_energies(const coupling& A_base, int n,
                                                    double T, int k, int N,
                                                    minimize_options base = {});

struct hv_report {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
// sharp product-inequality check on the circle model of radius T:
// K_n^{-2} ||u||_{2*}^2 <= ||grad u||^2 + ((n-2)^2/4 + 1/(4T^2)) ||u||^2
hv_report hv_inequality_check(const manifold_model& circle, const field& u);

}  // namespace critsys
