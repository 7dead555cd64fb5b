#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "jtphase/core/error.hpp"

namespace jtphase::ed {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr std::size_t kDenseFallbackLimit = 5000;

struct EigenConfig {
  std::size_t block = 2;           // block size of the Krylov expansion
  std::size_t max_basis = 96;      // subspace size before a restart
  std::size_t keep = 12;           // Ritz vectors kept across a restart
  std::size_t max_restarts = 400;  // iteration cap
  double tol = 1e-10;              // residual norm relative to the matrix scale
  std::uint64_t seed = 0x5eed'1a7e'0b0c'0001ULL;
  bool allow_dense_fallback = true;
};

struct EigenResult {
  std::vector<double> values;  // ascending
  Eigen::MatrixXd vectors;     // columns match values
  double max_residual = 0.0;   // max ||A y - theta y||
  std::size_t restarts = 0;
  std::size_t matvecs = 0;
  bool converged = false;
  std::string method;          // "block_krylov" or "dense"
};

inline double row_abs_sum_max(const SparseMatrix& a) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) s += std::abs(it.value());
    best = std::max(best, s);
  }
  return best;
}

inline EigenResult dense_lowest(const SparseMatrix& a, std::size_t count) {
  const Eigen::MatrixXd d(a);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d);
  if (es.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
  EigenResult r;
  r.method = "dense";
  r.converged = true;
  r.vectors = es.eigenvectors().leftCols(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) r.values.push_back(es.eigenvalues()(static_cast<Eigen::Index>(i)));
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    const double res = (a * r.vectors.col(c) - r.values[i] * r.vectors.col(c)).norm();
    r.max_residual = std::max(r.max_residual, res);
  }
  return r;
}

namespace detail {

// Orthogonalize v against columns [0, ncols) of basis twice (CGS2) and
// normalize. Returns false when v lies in the span to rounding.
inline bool orthonormalize_against(const Eigen::MatrixXd& basis, Eigen::Index ncols, Eigen::VectorXd& v) {
  const double start = v.norm();
  if (!(start > 0.0)) return false;
  for (int pass = 0; pass < 2; ++pass) {
    if (ncols > 0) {
      const Eigen::VectorXd h = basis.leftCols(ncols).transpose() * v;
      v.noalias() -= basis.leftCols(ncols) * h;
    }
  }
  const double n = v.norm();
  if (!(n > 1e-10 * start)) return false;
  v /= n;
  return true;
}

}  // namespace detail

// Lowest `count` eigenpairs of a real symmetric sparse matrix.
//
// Restarted block Krylov with full reorthogonalization: the subspace holds
// the kept Ritz vectors followed by blocks A^j R, where R are the residuals of
// the wanted Ritz pairs. Rayleigh-Ritz is done on the whole subspace, so the
// method does not rely on the three-term recurrence. Starting block is drawn
// from a fixed-seed generator; results are deterministic.
inline EigenResult lowest_eigenpairs(const SparseMatrix& a, std::size_t count = 2, const EigenConfig& cfg = {}) {
  const auto n = static_cast<std::size_t>(a.rows());
  require(a.rows() == a.cols(), "lowest_eigenpairs: matrix must be square");
  require(count >= 1 && count <= n, "lowest_eigenpairs: count out of range");
  // the block must cover every wanted residual
  const std::size_t block = std::max(cfg.block, count);
  require(cfg.keep >= block && cfg.max_basis >= cfg.keep + 2 * block,
          "lowest_eigenpairs: inconsistent Krylov sizes");
  if (n <= cfg.max_basis) return dense_lowest(a, count);

  const double scale = std::max(1.0, row_abs_sum_max(a));
  const auto m = static_cast<Eigen::Index>(cfg.max_basis);
  Eigen::MatrixXd V(static_cast<Eigen::Index>(n), m);
  Eigen::MatrixXd AV(static_cast<Eigen::Index>(n), m);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vector = [&] {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = gauss(rng);
    return v;
  };

  EigenResult out;
  out.method = "block_krylov";
  Eigen::Index filled = 0;
  std::vector<Eigen::VectorXd> next;  // candidates for the next block
  for (std::size_t b = 0; b < block; ++b) next.push_back(random_vector());

  for (std::size_t restart = 0; restart <= cfg.max_restarts; ++restart) {
    // expand the subspace block by block
    while (filled < m) {
      const Eigen::Index begin = filled;
      for (auto& v : next) {
        if (filled >= m) break;
        if (!detail::orthonormalize_against(V, filled, v)) continue;
        V.col(filled) = v;
        AV.col(filled) = a * v;
        ++out.matvecs;
        ++filled;
      }
      if (filled == begin) {
        // invariant subspace or total deflation: continue with fresh directions
        next.clear();
        for (std::size_t b = 0; b < block; ++b) next.push_back(random_vector());
        continue;
      }
      next.clear();
      for (Eigen::Index c = begin; c < filled; ++c) next.push_back(AV.col(c));
    }

    // Rayleigh-Ritz on the full subspace
    Eigen::MatrixXd T = V.transpose() * AV;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success) throw NumericalError("block Krylov: projected eigenproblem failed");
    const auto keep = static_cast<Eigen::Index>(cfg.keep);
    const Eigen::MatrixXd Y = es.eigenvectors().leftCols(keep);
    const Eigen::MatrixXd X = V * Y;
    const Eigen::MatrixXd AX = AV * Y;

    double worst = 0.0;
    std::vector<Eigen::VectorXd> residuals;
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(block); ++j) {
      Eigen::VectorXd r = AX.col(j) - es.eigenvalues()(j) * X.col(j);
      if (j < static_cast<Eigen::Index>(count)) worst = std::max(worst, r.norm());
      residuals.push_back(std::move(r));
    }
    out.restarts = restart;
    out.max_residual = worst;
    if (worst <= cfg.tol * scale) {
      out.converged = true;
      out.vectors = X.leftCols(static_cast<Eigen::Index>(count));
      out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
      return out;
    }
    out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + count);
    // thick restart: kept Ritz vectors are orthonormal and AX is exact
    V.leftCols(keep) = X;
    AV.leftCols(keep) = AX;
    filled = keep;
    next = std::move(residuals);
  }

  if (cfg.allow_dense_fallback && n <= kDenseFallbackLimit) return dense_lowest(a, count);
  // the last Ritz pairs are returned with converged = false
  out.vectors = V.leftCols(static_cast<Eigen::Index>(count));
  return out;
}

}  // namespace jtphase::ed
