#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "twophase/assembly.hpp"
#include "twophase/linalg.hpp"
#include "twophase/problems.hpp"

namespace twophase {

/// Discrete dual energy I*(mu) in factored form. The node partition places
/// Neumann-tagged nodes with the internal ones; only Dirichlet nodes carry
/// prescribed values.
struct DualObjective {
  std::vector<int> interior_nodes;   // ascending global indices
  std::vector<int> dirichlet_nodes;  // ascending global indices
  Eigen::VectorXd v_dirichlet;
  SparseMatrix K_id;  // rows = interior, cols = dirichlet
  SparseMatrix K_dd;
  SparseMatrix M_i;  // rows = interior, all triangle columns
  SparseMatrix M_d;
  std::optional<SpdFactor> K_ii;  // empty when there are no interior nodes
  Eigen::VectorXd k_id_vd;        // K_id * v_dirichlet
  double dirichlet_energy = 0.0;  // 1/2 v_D^T K_dd v_D
  int n_triangles = 0;

  int n_interior() const { return static_cast<int>(interior_nodes.size()); }
  int n_dirichlet() const { return static_cast<int>(dirichlet_nodes.size()); }
};

inline DualObjective build_dual_objective(const TriMesh& mesh,
                                          const ProblemSpec& problem) {
  DualObjective obj;
  obj.n_triangles = mesh.num_triangles();

  std::vector<int> side(mesh.num_nodes());  // local index on its side
  for (int n = 0; n < mesh.num_nodes(); ++n) {
    if (mesh.node_tag[n] == NodeTag::Dirichlet) {
      side[n] = obj.n_dirichlet();
      obj.dirichlet_nodes.push_back(n);
    } else {
      side[n] = obj.n_interior();
      obj.interior_nodes.push_back(n);
    }
  }
  if (obj.dirichlet_nodes.empty())
    throw std::runtime_error(
        "build_dual_objective: no Dirichlet nodes, problem is singular");

  obj.v_dirichlet.resize(obj.n_dirichlet());
  for (int d = 0; d < obj.n_dirichlet(); ++d) {
    const Eigen::Vector2d& p = mesh.vertices[obj.dirichlet_nodes[d]];
    obj.v_dirichlet[d] = problem.dirichlet_value(p.x(), p.y());
  }

  const SparseMatrix K = p1_stiffness(mesh);
  const SparseMatrix M = p1_p0_mass(mesh);
  const auto is_dirichlet = [&mesh](int n) {
    return mesh.node_tag[n] == NodeTag::Dirichlet;
  };

  std::vector<Eigen::Triplet<double>> t_ii, t_id, t_dd;
  for (int col = 0; col < K.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(K, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      if (!is_dirichlet(r) && !is_dirichlet(c))
        t_ii.emplace_back(side[r], side[c], it.value());
      else if (!is_dirichlet(r) && is_dirichlet(c))
        t_id.emplace_back(side[r], side[c], it.value());
      else if (is_dirichlet(r) && is_dirichlet(c))
        t_dd.emplace_back(side[r], side[c], it.value());
    }
  SparseMatrix K_ii(obj.n_interior(), obj.n_interior());
  K_ii.setFromTriplets(t_ii.begin(), t_ii.end());
  obj.K_id.resize(obj.n_interior(), obj.n_dirichlet());
  obj.K_id.setFromTriplets(t_id.begin(), t_id.end());
  obj.K_dd.resize(obj.n_dirichlet(), obj.n_dirichlet());
  obj.K_dd.setFromTriplets(t_dd.begin(), t_dd.end());

  std::vector<Eigen::Triplet<double>> t_mi, t_md;
  for (int col = 0; col < M.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(M, col); it; ++it) {
      const int r = static_cast<int>(it.row());
      if (is_dirichlet(r))
        t_md.emplace_back(side[r], static_cast<int>(it.col()), it.value());
      else
        t_mi.emplace_back(side[r], static_cast<int>(it.col()), it.value());
    }
  obj.M_i.resize(obj.n_interior(), obj.n_triangles);
  obj.M_i.setFromTriplets(t_mi.begin(), t_mi.end());
  obj.M_d.resize(obj.n_dirichlet(), obj.n_triangles);
  obj.M_d.setFromTriplets(t_md.begin(), t_md.end());

  if (obj.n_interior() > 0) obj.K_ii.emplace(K_ii);
  obj.k_id_vd = obj.K_id * obj.v_dirichlet;
  obj.dirichlet_energy = 0.5 * obj.v_dirichlet.dot(obj.K_dd * obj.v_dirichlet);
  return obj;
}

namespace detail {

struct DualEval {
  double value = 0.0;
  Eigen::VectorXd gradient;
};

// One factored solve yields both I*(mu) and its gradient M^T v(mu); the
// gradient component for triangle T equals the integral of u_mu over T.
inline DualEval eval_dual(const DualObjective& obj, const Eigen::VectorXd& mu) {
  if (mu.size() != obj.n_triangles)
    throw std::invalid_argument("dual objective: multiplier size mismatch");
  DualEval out;
  out.value = obj.dirichlet_energy + obj.v_dirichlet.dot(obj.M_d * mu);
  out.gradient = obj.M_d.transpose() * obj.v_dirichlet;
  if (obj.K_ii) {
    const Eigen::VectorXd r = obj.k_id_vd + obj.M_i * mu;
    const Eigen::VectorXd x = obj.K_ii->solve(r);
    out.value -= 0.5 * r.dot(x);
    out.gradient -= obj.M_i.transpose() * x;
  }
  return out;
}

}  // namespace detail

inline double eval_dual_energy(const DualObjective& obj, const P0Field& mu) {
  return detail::eval_dual(obj, mu.values).value;
}

inline Eigen::VectorXd eval_dual_gradient(const DualObjective& obj,
                                          const P0Field& mu) {
  return detail::eval_dual(obj, mu.values).gradient;
}

/// Interior values solve K_ii v_I = -(K_id v_D + M_i mu); the result merges
/// (v_I, v_D) back into global node order.
inline P1Field reconstruct_primal(const DualObjective& obj, const P0Field& mu) {
  if (mu.size() != obj.n_triangles)
    throw std::invalid_argument("reconstruct_primal: multiplier size mismatch");
  Eigen::VectorXd values(obj.n_interior() + obj.n_dirichlet());
  if (obj.K_ii) {
    const Eigen::VectorXd v_i = -obj.K_ii->solve(obj.k_id_vd + obj.M_i * mu.values);
    for (int i = 0; i < obj.n_interior(); ++i) values[obj.interior_nodes[i]] = v_i[i];
  }
  for (int d = 0; d < obj.n_dirichlet(); ++d)
    values[obj.dirichlet_nodes[d]] = obj.v_dirichlet[d];
  return P1Field(std::move(values));
}

struct QpResult {
  P0Field mu;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;  // accepted iterates, nondecreasing
};

/// Maximizes the concave dual energy over the box [lower, upper]^|T| by
/// projected gradient ascent with Barzilai-Borwein steps; a halving line
/// search keeps accepted objective values monotone. Terminates when the
/// projected-gradient residual |mu - P(mu + grad)|_inf drops below tol.
inline QpResult solve_box_qp(const DualObjective& obj, double lower, double upper,
                             const P0Field& mu0, double tol, int maxit) {
  if (lower > upper)
    throw std::invalid_argument("solve_box_qp: empty box");
  if (mu0.size() != obj.n_triangles)
    throw std::invalid_argument("solve_box_qp: start size mismatch");

  const auto clip = [lower, upper](const Eigen::VectorXd& x) {
    return x.cwiseMax(lower).cwiseMin(upper).eval();
  };

  QpResult res;
  Eigen::VectorXd mu = clip(mu0.values);
  if (lower == upper) {
    res.mu = P0Field(std::move(mu));
    res.converged = true;
    return res;
  }

  detail::DualEval cur = detail::eval_dual(obj, mu);
  res.objective_history.push_back(cur.value);

  // With no interior nodes the objective is linear: each component jumps to
  // its bound (or stays put where the gradient vanishes).
  if (!obj.K_ii) {
    for (int j = 0; j < mu.size(); ++j) {
      if (cur.gradient[j] > 0.0) mu[j] = upper;
      else if (cur.gradient[j] < 0.0) mu[j] = lower;
    }
    cur = detail::eval_dual(obj, mu);
    res.objective_history.push_back(cur.value);
    res.mu = P0Field(std::move(mu));
    res.iterations = 1;
    res.converged = true;
    return res;
  }

  constexpr double step_min = 1e-13;
  constexpr double step_max = 1e14;
  double step = (upper - lower) /
                std::max(cur.gradient.cwiseAbs().maxCoeff(), 1e-300);
  step = std::clamp(step, step_min, step_max);

  for (int it = 0; it < maxit; ++it) {
    res.kkt_residual = (mu - clip(mu + cur.gradient)).cwiseAbs().maxCoeff();
    if (res.kkt_residual <= tol) {
      res.converged = true;
      break;
    }

    double trial_step = step;
    Eigen::VectorXd cand;
    detail::DualEval cand_eval;
    bool accepted = false;
    for (int half = 0; half < 60; ++half) {
      cand = clip(mu + trial_step * cur.gradient);
      if ((cand - mu).cwiseAbs().maxCoeff() == 0.0) break;
      cand_eval = detail::eval_dual(obj, cand);
      if (cand_eval.value >= cur.value) {
        accepted = true;
        break;
      }
      trial_step *= 0.5;
    }
    if (!accepted) break;  // no ascent possible at this scale

    const Eigen::VectorXd s = cand - mu;
    const Eigen::VectorXd y = cand_eval.gradient - cur.gradient;
    const double sy = -s.dot(y);  // nonnegative for a concave objective
    step = (sy > 0.0) ? std::clamp(s.squaredNorm() / sy, step_min, step_max)
                      : step_max;

    mu = std::move(cand);
    cur = std::move(cand_eval);
    res.objective_history.push_back(cur.value);
    res.iterations = it + 1;
  }

  if (!res.converged)
    res.kkt_residual = (mu - clip(mu + cur.gradient)).cwiseAbs().maxCoeff();
  if (res.kkt_residual <= tol) res.converged = true;
  res.mu = P0Field(std::move(mu));
  return res;
}

struct SolveOptions {
  double qp_tol = 1e-9;
  int qp_maxit = 20000;
};

struct DualSolveResult {
  P0Field lambda;
  P1Field u_lambda;
  double dual_energy = 0.0;    // I*(lambda)
  double primal_energy = 0.0;  // J(u_lambda)
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_history;
};

/// Runs the full dual pipeline: block assembly, box QP for the multiplier,
/// primal reconstruction, and both energy evaluations.
inline DualSolveResult solve_two_phase(const TriMesh& mesh,
                                       const ProblemSpec& problem,
                                       const SolveOptions& opts = {}) {
  const DualObjective obj = build_dual_objective(mesh, problem);
  const P0Field mu0 = P0Field::zeros(mesh.num_triangles());
  QpResult qp = solve_box_qp(obj, -problem.alpha_minus, problem.alpha_plus, mu0,
                             opts.qp_tol, opts.qp_maxit);

  DualSolveResult result;
  result.u_lambda = reconstruct_primal(obj, qp.mu);
  result.dual_energy = eval_dual_energy(obj, qp.mu);
  result.primal_energy =
      primal_energy(mesh, result.u_lambda, problem.alpha_plus, problem.alpha_minus);
  result.lambda = std::move(qp.mu);
  result.kkt_residual = qp.kkt_residual;
  result.iterations = qp.iterations;
  result.converged = qp.converged;
  result.objective_history = std::move(qp.objective_history);
  return result;
}

}  // namespace twophase
