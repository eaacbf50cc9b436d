#pragma once

// Lowest eigenpairs of the grid Hamiltonian.
//
// The solver builds a block Krylov space of the shift-inverted operator
// (H - sigma)^-1, projects H onto it (Rayleigh-Ritz) and restarts from the
// best Ritz vectors until every requested pair has a residual below tol.
// sigma starts below the potential minimum and is moved up to the wanted
// cluster as the Ritz values settle. Blocks are wider than k so that both
// members of a doublet, or of an exactly degenerate pair, are captured.
// Completeness is certified afterwards by counting negative pivots of an
// LDL^T factorization of H - sigma_c just above the highest returned level.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "zeropi/circuit.hpp"
#include "zeropi/grid.hpp"

namespace zeropi {

struct SolverOptions {
  double tol = 1e-10;             // residual bound, hbar*omega_p
  std::uint64_t seed = 20130520;  // start-block seed
  std::size_t extra_vectors = 0;  // block width beyond k; 0 picks max(4, k/2)
  std::size_t krylov_steps = 3;   // block applications of (H - sigma)^-1 per cycle
  std::size_t max_cycles = 80;
  bool verify_count = true;       // inertia check of completeness
};

struct EigenSolution {
  std::vector<double> energies;
  /// Column i is level i, normalized so that sum |psi|^2 dphi dtheta = 1.
  Eigen::MatrixXd wavefunctions;
  /// ||H x - E x|| for the Euclidean-normalized vector x.
  std::vector<double> residual_norms;
  /// |E(refined grid) - E(base grid)| per level; empty for a single-grid solve.
  std::vector<double> disc_error;
  /// Levels whose disc_error exceeds the caller's bound.
  std::vector<bool> disc_flagged;
  /// Energies on the base grid of a two-grid solve.
  std::vector<double> base_energies;
  Grid2D grid;
  std::optional<Grid2D> base_grid;
  std::size_t cycles = 0;
  std::size_t solves = 0;

  [[nodiscard]] std::size_t size() const { return energies.size(); }
  [[nodiscard]] bool has_disc_error() const { return !disc_error.empty(); }
};

/// Approximate eigenvectors on the target grid, e.g. a neighbouring sweep
/// point interpolated with resample().
struct StartGuess {
  Eigen::MatrixXd vectors;
};

/// Non-convergence or a failed completeness check. Carries the best
/// estimates reached so that callers can report them.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::vector<double> energies, std::vector<double> residuals)
      : std::runtime_error(what), energies_(std::move(energies)), residuals_(std::move(residuals)) {}
  [[nodiscard]] const std::vector<double>& energies() const { return energies_; }
  [[nodiscard]] const std::vector<double>& residuals() const { return residuals_; }

 private:
  std::vector<double> energies_;
  std::vector<double> residuals_;
};

namespace detail {

inline SparseMatrix shifted(const SparseMatrix& h, double sigma) {
  SparseMatrix a = h;
  for (int i = 0; i < a.outerSize(); ++i) a.coeffRef(i, i) -= sigma;
  return a;
}

/// Orthonormalizes the columns of w against basis.leftCols(used) and among
/// themselves. Survivors are packed to the front; returns their count.
inline Eigen::Index orthonormalize_against(const Eigen::MatrixXd& basis, Eigen::Index used,
                                           Eigen::MatrixXd& w) {
  const Eigen::VectorXd norms0 = w.colwise().norm();
  for (int pass = 0; pass < 2 && used > 0; ++pass) {
    const auto v = basis.leftCols(used);
    w.noalias() -= v * (v.transpose() * w);
  }
  Eigen::Index kept = 0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    Eigen::VectorXd col = w.col(j);
    for (int pass = 0; pass < 2; ++pass) {
      if (kept > 0) col.noalias() -= w.leftCols(kept) * (w.leftCols(kept).transpose() * col);
      if (used > 0 && pass == 1) {
        const auto v = basis.leftCols(used);
        col.noalias() -= v * (v.transpose() * col);
      }
    }
    const double nrm = col.norm();
    if (nrm == 0.0 || !(nrm > 1e-13 * norms0[j])) continue;
    w.col(kept++) = col / nrm;
  }
  return kept;
}

/// Largest-magnitude entry positive; ties go to the lowest index.
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index best = 0;
  double amp = -1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > amp) {
      amp = std::abs(v[i]);
      best = i;
    }
  }
  if (v[best] < 0.0) v = -v;
}

/// Number of eigenvalues of h strictly below sigma (Sylvester inertia of
/// the LDL^T factors). Empty if the factorization broke down.
inline std::optional<std::size_t> count_below(const SparseMatrix& h, double sigma) {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt(shifted(h, sigma));
  if (ldlt.info() != Eigen::Success) return std::nullopt;
  const Eigen::VectorXd d = ldlt.vectorD();
  if (!d.allFinite()) return std::nullopt;
  return static_cast<std::size_t>((d.array() < 0.0).count());
}

struct KrylovResult {
  Eigen::VectorXd values;   // all Ritz values of the final projection, ascending
  Eigen::MatrixXd vectors;  // first `width` Ritz vectors, Euclidean-normalized
  Eigen::VectorXd residuals;
  std::size_t cycles = 0;
  std::size_t solves = 0;
  bool converged = false;
};

class ShiftInvert {
 public:
  ShiftInvert(const SparseMatrix& h, double sigma) : h_(h) { reset(sigma); }

  void reset(double sigma) {
    sigma_ = sigma;
    ldlt_.compute(shifted(h_, sigma));
    if (ldlt_.info() != Eigen::Success)
      throw SolverError("eigensolver: factorization of H - sigma failed", {}, {});
  }
  [[nodiscard]] double sigma() const { return sigma_; }
  template <class Rhs>
  Eigen::MatrixXd apply(const Rhs& b) const {
    return ldlt_.solve(b);
  }

 private:
  const SparseMatrix& h_;
  double sigma_ = 0.0;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
};

inline KrylovResult block_krylov(const SparseMatrix& h, double floor_shift, std::size_t k,
                                 std::size_t width, const SolverOptions& opt,
                                 const StartGuess* guess) {
  const Eigen::Index n = h.rows();
  const auto p = static_cast<Eigen::Index>(width);
  const auto kk = static_cast<Eigen::Index>(k);

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  Eigen::Index from_guess = 0;
  if (guess && guess->vectors.rows() == n)
    from_guess = std::min<Eigen::Index>(guess->vectors.cols(), p);
  if (from_guess > 0) x.leftCols(from_guess) = guess->vectors.leftCols(from_guess);
  for (Eigen::Index j = from_guess; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) x(i, j) = normal(rng);

  double sigma = floor_shift;
  double previous_lo = 0.0;
  bool have_previous = false;
  if (from_guess > 0) {
    // Ritz values of the guess place the first shift next to the cluster.
    Eigen::MatrixXd q = x.leftCols(from_guess);
    Eigen::MatrixXd empty;
    const Eigen::Index m = orthonormalize_against(empty, 0, q);
    if (m > 0) {
      const auto qm = q.leftCols(m);
      Eigen::MatrixXd g = qm.transpose() * (h * qm);
      g = 0.5 * (g + g.transpose()).eval();
      const Eigen::VectorXd theta = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues();
      const double lo = theta[0];
      const double spread = theta[std::min<Eigen::Index>(kk, m) - 1] - lo;
      sigma = std::max(floor_shift, lo - std::max(0.5 * spread, 1e-3 * (1.0 + std::abs(lo))));
    }
  }
  ShiftInvert op(h, sigma);
  int reshifts = 0;

  const Eigen::Index max_basis =
      std::min<Eigen::Index>(n, p * static_cast<Eigen::Index>(opt.krylov_steps + 1));
  Eigen::MatrixXd basis(n, max_basis);

  KrylovResult out;
  for (std::size_t cycle = 0; cycle < opt.max_cycles; ++cycle) {
    Eigen::Index used = 0;
    Eigen::Index fresh = 0;
    {
      // Converged wanted vectors stay in the basis but are not expanded.
      Eigen::MatrixXd locked(n, p);
      Eigen::MatrixXd active(n, p);
      Eigen::Index n_locked = 0;
      Eigen::Index n_active = 0;
      for (Eigen::Index j = 0; j < p; ++j) {
        const bool is_locked = cycle > 0 && j < kk && out.residuals[j] <= opt.tol;
        (is_locked ? locked.col(n_locked++) : active.col(n_active++)) = x.col(j);
      }
      locked.conservativeResize(n, n_locked);
      active.conservativeResize(n, n_active);
      used = orthonormalize_against(basis, 0, locked);
      basis.leftCols(used) = locked.leftCols(used);
      fresh = orthonormalize_against(basis, used, active);
      basis.middleCols(used, fresh) = active.leftCols(fresh);
      used += fresh;
    }

    for (std::size_t step = 0; step < opt.krylov_steps && fresh > 0 && used < max_basis; ++step) {
      Eigen::MatrixXd w = op.apply(basis.middleCols(used - fresh, fresh));
      out.solves += static_cast<std::size_t>(fresh);
      Eigen::Index got = orthonormalize_against(basis, used, w);
      got = std::min(got, max_basis - used);
      basis.middleCols(used, got) = w.leftCols(got);
      used += got;
      fresh = got;
    }

    const auto v = basis.leftCols(used);
    const Eigen::MatrixXd hv = h * v;
    Eigen::MatrixXd g = v.transpose() * hv;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(g);

    const Eigen::Index keep = std::min(p, used);
    const auto y = small.eigenvectors().leftCols(keep);
    out.values = small.eigenvalues();
    x = v * y;
    const Eigen::MatrixXd r = hv * y - x * out.values.head(keep).asDiagonal();
    out.residuals = r.colwise().norm().transpose();
    out.cycles = cycle + 1;

    const bool done = keep >= kk && (out.residuals.head(kk).array() <= opt.tol).all();
    if (done || keep < p) {
      // keep < p: the basis spans the whole space
      out.converged = done;
      break;
    }

    // Keep the shift a margin below the lowest Ritz value. Ritz values
    // converge much faster than residuals, so the margin tracks how far the
    // lowest one still moves between cycles. Refactor only when the
    // distance is off by more than a factor of two.
    if (reshifts < 8 && keep > kk) {
      const double lo = out.values[0];
      const double spread = out.values[kk - 1] - lo;
      const double next_gap = out.values[kk] - lo;
      const double moved = have_previous ? std::abs(previous_lo - lo) : lo - floor_shift;
      const double delta = std::max({0.5 * spread, 0.1 * next_gap, 4.0 * moved});
      const double dist = lo - op.sigma();
      const double target = std::max(floor_shift, lo - delta);
      if ((dist > 2.0 * delta || dist < 0.0) && target != op.sigma()) {
        op.reset(target);
        ++reshifts;
      }
    }
    previous_lo = out.values[0];
    have_previous = true;
  }
  out.vectors = std::move(x);
  return out;
}

}  // namespace detail

/// k smallest eigenpairs of h with residuals below opt.tol.
inline EigenSolution lowest_eigenpairs(const SparseHamiltonian& h, std::size_t k,
                                       const SolverOptions& opt = {},
                                       const StartGuess* guess = nullptr) {
  const std::size_t n = h.dimension();
  if (k < 1) throw std::invalid_argument("eigensolver: k must be at least 1");
  if (k > n) throw std::invalid_argument("eigensolver: k exceeds the matrix dimension");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("eigensolver: tol must be positive");
  if (opt.krylov_steps < 1) throw std::invalid_argument("eigensolver: krylov_steps must be >= 1");

  // The kinetic part is positive definite, so the spectrum lies above the
  // potential minimum; H - floor is safely positive definite.
  const double floor_shift = h.potential_min - 1e-6 * std::max(1.0, std::abs(h.potential_min));

  std::size_t extra = opt.extra_vectors > 0 ? opt.extra_vectors : std::max<std::size_t>(4, k / 2);
  std::size_t attempts = 0;
  std::size_t total_solves = 0;
  std::size_t total_cycles = 0;

  for (;;) {
    const std::size_t width = std::min(n, k + extra);
    detail::KrylovResult kr = detail::block_krylov(h.matrix, floor_shift, k, width, opt, guess);
    total_solves += kr.solves;
    total_cycles += kr.cycles;

    const auto kk = static_cast<Eigen::Index>(k);
    std::vector<double> energies(kr.values.data(), kr.values.data() + kk);
    std::vector<double> residuals(kr.residuals.data(),
                                  kr.residuals.data() + std::min(kk, kr.residuals.size()));
    if (!kr.converged) {
      std::ostringstream msg;
      msg << "eigensolver: no convergence after " << kr.cycles << " cycles (max residual "
          << *std::max_element(residuals.begin(), residuals.end()) << ", tol " << opt.tol << ")";
      throw SolverError(msg.str(), energies, residuals);
    }

    bool complete = true;
    if (opt.verify_count && k < n) {
      const double top = energies.back();
      const double next = kr.values.size() > kk ? kr.values[kk] : top + 1.0;
      const double cut = top + std::max(0.5 * (next - top), 1e3 * opt.tol);
      // Ritz values are upper bounds, so the true count can only exceed
      // this when an eigenvalue below `cut` has no Ritz representative.
      const auto represented = static_cast<std::size_t>((kr.values.array() < cut).count());
      if (auto below = detail::count_below(h.matrix, cut); below && *below > represented)
        complete = false;
    }
    if (!complete) {
      if (++attempts > 3)
        throw SolverError("eigensolver: completeness check failed, a level was missed", energies,
                          residuals);
      extra += k + 4;
      continue;
    }

    EigenSolution sol{.energies = std::move(energies),
                      .wavefunctions = kr.vectors.leftCols(kk),
                      .residual_norms = std::move(residuals),
                      .disc_error = {},
                      .disc_flagged = {},
                      .base_energies = {},
                      .grid = h.grid,
                      .base_grid = std::nullopt,
                      .cycles = total_cycles,
                      .solves = total_solves};
    const double inv_sqrt_cell = 1.0 / std::sqrt(h.grid.cell_area());
    for (Eigen::Index j = 0; j < kk; ++j) {
      detail::fix_sign(sol.wavefunctions.col(j));
      sol.wavefunctions.col(j) *= inv_sqrt_cell;
    }
    return sol;
  }
}

/// Start guess for a solve on `target` from a solution on another grid.
inline StartGuess resample(const EigenSolution& from, const Grid2D& target) {
  return StartGuess{resample(from.wavefunctions, from.grid, target)};
}

/// Solves on `base` and on `refined`, reporting refined-grid values and
/// |E(refined) - E(base)| per level. Levels above disc_bound are flagged.
inline EigenSolution solve_on_grids(const CircuitParams& p, const DisorderParams& d,
                                    const Grid2D& base, const Grid2D& refined, std::size_t k,
                                    const SolverOptions& opt = {},
                                    std::optional<double> disc_bound = std::nullopt,
                                    const StartGuess* guess = nullptr) {
  const EigenSolution coarse = lowest_eigenpairs(assemble(p, d, base), k, opt, guess);
  EigenSolution fine = coarse;
  if (!(base == refined)) {
    const StartGuess up = resample(coarse, refined);
    fine = lowest_eigenpairs(assemble(p, d, refined), k, opt, &up);
    fine.solves += coarse.solves;
    fine.cycles += coarse.cycles;
  }
  fine.base_grid = base;
  fine.base_energies = coarse.energies;
  fine.disc_error.resize(k);
  fine.disc_flagged.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    fine.disc_error[i] = std::abs(fine.energies[i] - coarse.energies[i]);
    fine.disc_flagged[i] = disc_bound && fine.disc_error[i] > *disc_bound;
  }
  return fine;
}

/// Two-grid solve: the quality grid and its refinement (spacings halved,
/// phi_max +25%).
inline EigenSolution solve_refined(const CircuitParams& p, const DisorderParams& d, std::size_t k,
                                   GridQuality quality = GridQuality::standard,
                                   const SolverOptions& opt = {},
                                   std::optional<double> disc_bound = std::nullopt,
                                   const StartGuess* guess = nullptr) {
  const Grid2D base = default_grid(p, quality);
  return solve_on_grids(p, d, base, base.refined(), k, opt, disc_bound, guess);
}

/// Single-grid solve on default_grid(p, quality).
inline EigenSolution solve(const CircuitParams& p, const DisorderParams& d, std::size_t k,
                           GridQuality quality = GridQuality::standard,
                           const SolverOptions& opt = {}, const StartGuess* guess = nullptr) {
  return lowest_eigenpairs(assemble(p, d, default_grid(p, quality)), k, opt, guess);
}

}  // namespace zeropi
