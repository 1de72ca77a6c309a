#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "twophase/assembly.hpp"
#include "twophase/linalg.hpp"

namespace twophase {

/// Guaranteed upper bound of J(v) - J(u) split into its three parts:
///   m1 = 1/2 (1+beta)   |grad v - eta|^2
///   m2 = 1/2 (1+1/beta) C^2 |div eta - mu|^2
///   m3 = integral of alpha+ v^+ + alpha- v^- - mu v
/// together with per-triangle contributions of each part.
struct MajorantBreakdown {
  double m1 = 0.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double total = 0.0;
  double beta = 0.0;
  P0Field density1, density2, density3;
  RT0Field eta;
  P0Field mu;
  int iterations = 0;                // optimization sweeps performed
  std::vector<double> sweep_totals;  // total after each sweep
};

namespace detail {

// Quantities of the fixed approximation v that every majorant evaluation
// reuses: elementwise gradient, mean, and the exact pos/neg integrals.
struct MajorantVData {
  std::vector<Eigen::Vector2d> grad;
  std::vector<double> mean;
  std::vector<double> pos_integral;
  std::vector<double> neg_integral;
};

inline MajorantVData majorant_v_data(const TriMesh& mesh, const P1Field& v) {
  if (v.size() != mesh.num_nodes())
    throw std::invalid_argument("majorant: field size mismatch");
  MajorantVData data;
  const int nt = mesh.num_triangles();
  data.grad.resize(nt);
  data.mean.resize(nt);
  data.pos_integral.resize(nt);
  data.neg_integral.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const TriGeometry g = triangle_geometry(mesh, t);
    const auto& tri = mesh.triangles[t];
    const std::array<double, 3> vals{v.values[tri[0]], v.values[tri[1]],
                                     v.values[tri[2]]};
    Eigen::Vector2d grad = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) grad += vals[k] * g.grad[k];
    data.grad[t] = grad;
    data.mean[t] = (vals[0] + vals[1] + vals[2]) / 3.0;
    const PosNegIntegrals pn = pos_neg_part_integrals(vals, g.area);
    data.pos_integral[t] = pn.pos;
    data.neg_integral[t] = pn.neg;
  }
  return data;
}

// |grad v - eta|^2 over one triangle by the 3-point edge-midpoint rule
// (exact: the integrand is quadratic).
inline double grad_mismatch_sq(const TriMesh& mesh, int t,
                               const Eigen::Vector2d& grad_v,
                               const RT0Field& eta) {
  const TriGeometry g = triangle_geometry(mesh, t);
  double acc = 0.0;
  for (int m = 0; m < 3; ++m) {
    const Eigen::Vector2d mid = 0.5 * (g.p[(m + 1) % 3] + g.p[(m + 2) % 3]);
    Eigen::Vector2d eta_val = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) {
      const int e = mesh.triangle_edges[t][k];
      const double s = mesh.triangle_edge_signs[t][k];
      eta_val += eta.coefficients[e] * s * mesh.edge_length(e) / (2.0 * g.area) *
                 (mid - g.p[k]);
    }
    acc += (grad_v - eta_val).squaredNorm();
  }
  return g.area / 3.0 * acc;
}

// Solver for the flux step: minimizes m1 + m2 over RT0 fields whose
// coefficients vanish on Neumann-boundary edges. The matrix pattern is
// analyzed once; each solve refactorizes (1+beta) M + C^2 (1+1/beta) K.
class EtaSolver {
 public:
  EtaSolver(const TriMesh& mesh, double friedrichs_c)
      : mesh_(mesh), c_sq_(friedrichs_c * friedrichs_c) {
    edge_to_free_.assign(mesh.num_edges(), -1);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      if (mesh.edge_tag[e] == EdgeTag::NeumannBoundary) continue;
      edge_to_free_[e] = static_cast<int>(free_edges_.size());
      free_edges_.push_back(e);
    }
    mass_ = reduce(rt0_mass(mesh));
    divdiv_ = reduce(rt0_divdiv(mesh));
    analyzed_ = false;
  }

  void set_field(const P1Field& v) {
    const Eigen::VectorXd c_full = rt0_flux_load(mesh_, v);
    flux_load_.resize(free_edges_.size());
    for (std::size_t f = 0; f < free_edges_.size(); ++f)
      flux_load_[f] = c_full[free_edges_[f]];
  }

  RT0Field solve(double beta, const P0Field& mu) {
    if (!(beta > 0.0)) throw std::invalid_argument("step_eta: beta must be positive");
    const double w_mass = 1.0 + beta;
    const double w_div = c_sq_ * (1.0 + 1.0 / beta);

    const SparseMatrix A = (w_mass * mass_ + w_div * divdiv_).eval();
    if (!analyzed_) {
      ldlt_.analyzePattern(A);
      analyzed_ = true;
    }
    ldlt_.factorize(A);
    if (ldlt_.info() != Eigen::Success)
      throw std::runtime_error("step_eta: flux system factorization failed");

    const Eigen::VectorXd d_full = rt0_div_load(mesh_, mu);
    Eigen::VectorXd rhs(free_edges_.size());
    for (std::size_t f = 0; f < free_edges_.size(); ++f)
      rhs[f] = w_mass * flux_load_[f] + w_div * d_full[free_edges_[f]];

    const Eigen::VectorXd x = ldlt_.solve(rhs);
    Eigen::VectorXd eta = Eigen::VectorXd::Zero(mesh_.num_edges());
    for (std::size_t f = 0; f < free_edges_.size(); ++f)
      eta[free_edges_[f]] = x[f];
    return RT0Field(std::move(eta));
  }

 private:
  SparseMatrix reduce(const SparseMatrix& full) const {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(full.nonZeros());
    for (int col = 0; col < full.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(full, col); it; ++it) {
        const int r = edge_to_free_[it.row()];
        const int c = edge_to_free_[it.col()];
        if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
      }
    SparseMatrix out(free_edges_.size(), free_edges_.size());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
  }

  const TriMesh& mesh_;
  double c_sq_;
  std::vector<int> free_edges_;
  std::vector<int> edge_to_free_;
  SparseMatrix mass_, divdiv_;
  Eigen::VectorXd flux_load_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  bool analyzed_ = false;
};

inline MajorantBreakdown evaluate_parts(const TriMesh& mesh,
                                        const MajorantVData& vd, double beta,
                                        const RT0Field& eta, const P0Field& mu,
                                        double friedrichs_c, double alpha_plus,
                                        double alpha_minus) {
  const int nt = mesh.num_triangles();
  MajorantBreakdown out;
  out.beta = beta;
  out.density1 = P0Field::zeros(nt);
  out.density2 = P0Field::zeros(nt);
  out.density3 = P0Field::zeros(nt);

  const P0Field div_eta = rt0_divergence(mesh, eta);
  const double w1 = 0.5 * (1.0 + beta);
  const double w2 = 0.5 * (1.0 + 1.0 / beta) * friedrichs_c * friedrichs_c;
  for (int t = 0; t < nt; ++t) {
    const double area = mesh.triangle_area(t);
    const double d1 = w1 * grad_mismatch_sq(mesh, t, vd.grad[t], eta);
    const double residual = div_eta.values[t] - mu.values[t];
    const double d2 = w2 * area * residual * residual;
    const double d3 = alpha_plus * vd.pos_integral[t] +
                      alpha_minus * vd.neg_integral[t] -
                      mu.values[t] * area * vd.mean[t];
    out.density1.values[t] = d1;
    out.density2.values[t] = d2;
    out.density3.values[t] = d3;
    out.m1 += d1;
    out.m2 += d2;
    out.m3 += d3;
  }
  out.total = out.m1 + out.m2 + out.m3;
  out.eta = eta;
  out.mu = mu;
  return out;
}

inline void require_feasible(const P0Field& mu, double alpha_plus,
                             double alpha_minus) {
  for (int t = 0; t < mu.size(); ++t)
    if (mu.values[t] < -alpha_minus - 1e-12 || mu.values[t] > alpha_plus + 1e-12)
      throw std::invalid_argument(
          "majorant: multiplier outside [-alpha-, alpha+], bound would be infinite");
}

}  // namespace detail

/// Evaluates the majorant at a given triple (beta, eta, mu). The multiplier
/// must be feasible; otherwise the bound is infinite and an error is raised.
inline MajorantBreakdown majorant_parts(const TriMesh& mesh, const P1Field& v,
                                        double beta, const RT0Field& eta,
                                        const P0Field& mu, double friedrichs_c,
                                        double alpha_plus, double alpha_minus) {
  if (!(beta > 0.0))
    throw std::invalid_argument("majorant_parts: beta must be positive");
  if (eta.size() != mesh.num_edges() || mu.size() != mesh.num_triangles())
    throw std::invalid_argument("majorant_parts: field size mismatch");
  detail::require_feasible(mu, alpha_plus, alpha_minus);
  return detail::evaluate_parts(mesh, detail::majorant_v_data(mesh, v), beta, eta,
                                mu, friedrichs_c, alpha_plus, alpha_minus);
}

/// Flux step (i): exact minimizer of m1 + m2 at fixed (beta, mu) over RT0
/// fields with zero coefficients on Neumann edges.
inline RT0Field step_eta(const TriMesh& mesh, const P1Field& v, double beta,
                         const P0Field& mu, double friedrichs_c) {
  detail::EtaSolver solver(mesh, friedrichs_c);
  solver.set_field(v);
  return solver.solve(beta, mu);
}

/// Multiplier step (ii): elementwise projection
/// mu_T = P_[-alpha-,alpha+]( div(eta)|_T + mean(v)|_T / (C^2 (1+1/beta)) ).
inline P0Field step_mu(const TriMesh& mesh, const P1Field& v, double beta,
                       const RT0Field& eta, double friedrichs_c,
                       double alpha_plus, double alpha_minus) {
  if (!(beta > 0.0)) throw std::invalid_argument("step_mu: beta must be positive");
  const P0Field div_eta = rt0_divergence(mesh, eta);
  const double denom = friedrichs_c * friedrichs_c * (1.0 + 1.0 / beta);
  Eigen::VectorXd mu(mesh.num_triangles());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double mean_v =
        (v.values[tri[0]] + v.values[tri[1]] + v.values[tri[2]]) / 3.0;
    mu[t] = std::clamp(div_eta.values[t] + mean_v / denom, -alpha_minus,
                       alpha_plus);
  }
  return P0Field(std::move(mu));
}

/// Split-parameter step (iii): the exact minimizer of
/// (1+beta) A + (1+1/beta) B is beta = sqrt(B/A), i.e.
/// beta = C |div eta - mu| / |grad v - eta|. Degenerate cases: a vanishing
/// divergence residual gives beta_min; a vanishing gradient residual keeps
/// the previous beta (m1 vanishes and beta is immaterial).
inline double step_beta(const TriMesh& mesh, const P1Field& v, const RT0Field& eta,
                        const P0Field& mu, double friedrichs_c,
                        double fallback_beta) {
  constexpr double beta_min = 1e-12;
  const detail::MajorantVData vd = detail::majorant_v_data(mesh, v);
  const P0Field div_eta = rt0_divergence(mesh, eta);
  double grad_sq = 0.0, div_sq = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    grad_sq += detail::grad_mismatch_sq(mesh, t, vd.grad[t], eta);
    const double r = div_eta.values[t] - mu.values[t];
    div_sq += mesh.triangle_area(t) * r * r;
  }
  if (!(grad_sq > 0.0)) return fallback_beta;
  const double beta = friedrichs_c * std::sqrt(div_sq / grad_sq);
  return std::max(beta, beta_min);
}

/// Successive minimization of the majorant: sweeps of flux step, multiplier
/// projection and beta update, starting from beta = 1 and the given mu0
/// (normally the computed discrete multiplier). Stops after `iters` sweeps
/// or when the relative decrease of the total falls below 1e-12. With
/// iters = 0, a single flux step is taken and the majorant is evaluated at
/// (beta0, eta, mu0), which is already a valid upper bound.
inline MajorantBreakdown optimize_majorant(const TriMesh& mesh, const P1Field& v,
                                           const P0Field& mu0, double friedrichs_c,
                                           double alpha_plus, double alpha_minus,
                                           int iters) {
  if (mu0.size() != mesh.num_triangles())
    throw std::invalid_argument("optimize_majorant: mu0 size mismatch");

  const detail::MajorantVData vd = detail::majorant_v_data(mesh, v);
  detail::EtaSolver solver(mesh, friedrichs_c);
  solver.set_field(v);

  double beta = 1.0;
  P0Field mu(mu0.values.cwiseMax(-alpha_minus).cwiseMin(alpha_plus));

  if (iters <= 0) {
    const RT0Field eta = solver.solve(beta, mu);
    MajorantBreakdown out = detail::evaluate_parts(
        mesh, vd, beta, eta, mu, friedrichs_c, alpha_plus, alpha_minus);
    out.iterations = 0;
    out.sweep_totals.push_back(out.total);
    return out;
  }

  MajorantBreakdown out;
  std::vector<double> totals;
  totals.reserve(std::min(iters, 1 << 20));
  double prev_total = std::numeric_limits<double>::infinity();
  for (int sweep = 0; sweep < iters; ++sweep) {
    const RT0Field eta = solver.solve(beta, mu);
    const P0Field mu_next =
        step_mu(mesh, v, beta, eta, friedrichs_c, alpha_plus, alpha_minus);
    const double beta_next =
        step_beta(mesh, v, eta, mu_next, friedrichs_c, beta);
    MajorantBreakdown next = detail::evaluate_parts(
        mesh, vd, beta_next, eta, mu_next, friedrichs_c, alpha_plus, alpha_minus);
    // Exact partial minimizations cannot increase the total; once the flux
    // system becomes too ill-conditioned (beta near zero) to honor that in
    // floating point, the previous state is the numerical floor.
    if (sweep > 0 && next.total > prev_total) break;
    mu = mu_next;
    beta = beta_next;
    out = std::move(next);
    totals.push_back(out.total);
    out.iterations = sweep + 1;
    if (prev_total - out.total < 1e-12 * std::abs(prev_total)) break;
    prev_total = out.total;
  }
  out.sweep_totals = std::move(totals);
  return out;
}

struct EnergyBounds {
  double gap_lower = 0.0;     // J(v) - J_ref, or 0 without a reference
  double gap_upper = 0.0;     // majorant total
  double energy_lower = 0.0;  // J(v) - majorant total <= J(u)
  double energy_upper = 0.0;  // J_ref (or J(v)) >= J(u)
};

/// Two-sided bounds of the energy gap and of the exact energy from one
/// approximation, its majorant value, and an optional reference energy.
inline EnergyBounds energy_bounds(double j_v, double majorant_total,
                                  std::optional<double> j_ref = std::nullopt) {
  if (j_ref && *j_ref > j_v)
    throw std::invalid_argument("energy_bounds: reference energy exceeds J(v)");
  EnergyBounds out;
  out.gap_lower = j_ref ? j_v - *j_ref : 0.0;
  out.gap_upper = majorant_total;
  out.energy_lower = j_v - majorant_total;
  out.energy_upper = j_ref ? *j_ref : j_v;
  return out;
}

}  // namespace twophase
