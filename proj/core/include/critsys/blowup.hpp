#pragma once

#include <string>

#include "critsys/variational.hpp"

// Concentration diagnostics for one-parameter solution families: bubble
// extraction, energy splitting against a declared weak limit, exterior
// L^2 mass, pointwise envelopes, local balance ratios, chart rescaling,
// far-field fits, and the radial Pohozaev identity.

namespace critsys {

struct center_weight {
  double center = 0.0;  // coordinate of the grid maximum
  double mu = 0.0;      // (max value)^{-2/(n-2)}
  int component = 0;
  int index = 0;  // grid index of the maximum
};
// grid argmax of max_i u_i; ties resolved toward the smaller coordinate,
// then the smaller component index
center_weight extract_center_weight(const manifold_model& m, const pmap& u);

struct blowup_sequence {
  manifold_model model;
  std::vector<double> params;  // strictly monotone family parameter
  std::vector<pmap> maps;
  std::vector<coupling> couplings;  // one per family member
  pmap limit;                       // declared weak limit
  coupling limit_coupling;          // coupling of the limit system
  bool has_limit = false;
  std::vector<int> bubbles;  // declared bubble count per component

  int size() const { return static_cast<int>(maps.size()); }
  int total_bubbles() const;
};

// per member: |free_energy(U, A_member) - free_energy(limit, A_limit) - (k/n) K_n^{-n}|
std::vector<double> energy_splitting_residual(const blowup_sequence& seq,
                                              const coupling& A_limit);

// fraction of the squared L^2 mass outside the delta-balls around the centers
double l2_concentration_ratio(const manifold_model& m, const pmap& u,
                              const std::vector<double>& centers, double delta);

// sup over the grid of (min distance to a center)^{(n-2)/2} * |U - U0|
double pointwise_envelope(const manifold_model& m, const pmap& u, const pmap& u0,
                          const std::vector<double>& centers);

// same sup restricted to the complement of the balls B(center_j, R sqrt(mu_j))
double exterior_envelope(const manifold_model& m, const pmap& u, const pmap& u0,
                         const std::vector<double>& centers,
                         const std::vector<double>& mus, double R);

struct balance_report {
  double sup_lhs = 0.0;  // max of max_i |u_i| on B(x, delta)
  double sup_rhs = 0.0;  // L^s mass of U on B(x, 2 delta)
  double sup_ratio = 0.0;
  double mass_lhs = 0.0;  // global L^1 mass
  double mass_rhs = 0.0;  // global L^{2*-1} mass
  double mass_ratio = 0.0;
  double grad_lhs = 0.0;  // dirichlet energy on B(x, delta)
  double grad_rhs = 0.0;  // (1 + |U|^{2*-2}) |U|^2 mass on B(x, 2 delta)
  double grad_ratio = 0.0;
};
balance_report local_balance_checks(const manifold_model& m, const pmap& u,
                                    const coupling& A, double center, double delta,
                                    double s);

enum class rescale_power { half, one };

// flat radial window around a concentration point; `local` is a ball
// model on [0, rho_max] so downstream radial ops apply unchanged
struct rescaled_profile {
  manifold_model local;
  pmap u;
  double rho_max = 0.0;
  double scale = 0.0;  // mu^{1/2} or mu
};
// samples U at center + scale * rho by linear interpolation; amplitude
// factor 1 for power=half, mu^{(n-2)/2} for power=one
rescaled_profile standard_rescale(const manifold_model& m, const pmap& u,
                                  double center, double mu, rescale_power power,
                                  double rho_max = 0.0, int n_local = 512);

struct radial_fit {
  double amplitude = 0.0;  // coefficient of r^{2-n}
  double offset = 0.0;     // constant term
  double residual = 0.0;   // relative l2 misfit over the annulus
};
radial_fit sharp_asymptotics_fit(const manifold_model& local, const field& u,
                                 double r1, double r2);

struct pohozaev_pair {
  double lhs = 0.0;
  double rhs = 0.0;
};
// radial Pohozaev identity on a flat ball: interior integrals of
// (x . grad u + (n-2)/2 u) * laplacian u against boundary flux terms at r
pohozaev_pair pohozaev_residual(const manifold_model& ball, const field& u, double r);

// per member: sum_i of the u_i^2 mass on B(center, delta sqrt(mu)), divided by mu^2
std::vector<double> corollary81_ratio(const blowup_sequence& seq, double delta);

struct family_options {
  int s = 1;                 // coupling sign for the pair family
  std::vector<double> beta;  // per-member schedule; empty = mu^{n-2}
};
// registry names: sphere_yamabe, remark11, prop91_pair, remark91_triple
blowup_sequence build_family(const std::string& name, const manifold_model& m,
                             const std::vector<double>& grid,
                             const family_options& opts = {});

struct blowup_row {
  int index = 0;
  double lambda = 0.0;
  double mu = 0.0;
  double R_delta = 0.0;
  double envelope = 0.0;
  double splitting_residual = 0.0;
  double A_fit = 0.0;
  double c_fit = 0.0;
  double pohozaev_gap = 0.0;
};
std::vector<blowup_row> family_diagnostics(const blowup_sequence& seq, double delta);

// header: index,lambda,mu,R_delta,envelope,splitting_residual,A_fit,c_fit,pohozaev_gap
std::string blowup_csv(const std::vector<blowup_row>& rows);

}  // namespace critsys
