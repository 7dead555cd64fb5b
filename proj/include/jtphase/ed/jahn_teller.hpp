#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "jtphase/core/error.hpp"
#include "jtphase/core/grid.hpp"
#include "jtphase/core/special.hpp"
#include "jtphase/ed/eigensolver.hpp"
#include "jtphase/jt/model.hpp"

// H = (w/2){a+a + b+b - (k/sqrt2)[(a+ + a) sz - (b+ + b) sx]} on the truncated
// two-mode Fock space. Coordinates map to bosons as q = (a + a+)/sqrt2.

namespace jtphase::ed {

inline constexpr std::size_t kMaxDimension = 1'000'000;

// Occupations 0..N per mode times two electronic states.
class FockBasis {
 public:
  explicit FockBasis(std::size_t cutoff) : cutoff_(cutoff) {
    require(cutoff >= 1, "FockBasis: cutoff must be >= 1");
    const double dim = 2.0 * static_cast<double>(cutoff + 1) * static_cast<double>(cutoff + 1);
    if (dim > static_cast<double>(kMaxDimension))
      throw InvalidArgument("FockBasis: dimension " + std::to_string(static_cast<long long>(dim)) +
                            " exceeds the 1e6 memory budget");
  }

  [[nodiscard]] std::size_t cutoff() const noexcept { return cutoff_; }
  [[nodiscard]] std::size_t dimension() const noexcept { return 2 * (cutoff_ + 1) * (cutoff_ + 1); }

  // electronic: 0 for the first component, 1 for the second
  [[nodiscard]] std::size_t index(std::size_t na, std::size_t nb, std::size_t electronic) const {
    return ((na * (cutoff_ + 1) + nb) * 2) + electronic;
  }

  struct State {
    std::size_t na;
    std::size_t nb;
    std::size_t electronic;
  };

  [[nodiscard]] State state(std::size_t i) const {
    const std::size_t e = i % 2;
    const std::size_t mode = i / 2;
    return {mode / (cutoff_ + 1), mode % (cutoff_ + 1), e};
  }

 private:
  std::size_t cutoff_;
};

struct HamiltonianMatrix {
  FockBasis basis;
  double k;
  double omega;
  SparseMatrix matrix;

  [[nodiscard]] std::size_t dimension() const noexcept { return basis.dimension(); }
};

inline HamiltonianMatrix build_hamiltonian(double k, double omega, std::size_t cutoff) {
  require(std::isfinite(k) && k >= 0.0, "build_hamiltonian: k must be >= 0");
  require(std::isfinite(omega) && omega > 0.0, "build_hamiltonian: omega must be > 0");
  FockBasis basis(cutoff);
  const std::size_t dim = basis.dimension();
  const double half_w = 0.5 * omega;
  const double g = half_w * k / std::sqrt(2.0);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * dim);
  for (std::size_t na = 0; na <= cutoff; ++na) {
    for (std::size_t nb = 0; nb <= cutoff; ++nb) {
      for (std::size_t e = 0; e < 2; ++e) {
        const auto i = static_cast<int>(basis.index(na, nb, e));
        trip.emplace_back(i, i, half_w * static_cast<double>(na + nb));
        // -(g)(a+ + a) sz : <na+1| a+ |na> = sqrt(na+1)
        if (na < cutoff) {
          const double sz = e == 0 ? 1.0 : -1.0;
          const double v = -g * std::sqrt(static_cast<double>(na + 1)) * sz;
          const auto j = static_cast<int>(basis.index(na + 1, nb, e));
          trip.emplace_back(i, j, v);
          trip.emplace_back(j, i, v);
        }
        // +(g)(b+ + b) sx : flips the electronic state
        if (nb < cutoff) {
          const double v = g * std::sqrt(static_cast<double>(nb + 1));
          const auto j = static_cast<int>(basis.index(na, nb + 1, 1 - e));
          trip.emplace_back(i, j, v);
          trip.emplace_back(j, i, v);
        }
      }
    }
  }
  HamiltonianMatrix h{basis, k, omega, SparseMatrix(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
  h.matrix.setFromTriplets(trip.begin(), trip.end());
  h.matrix.makeCompressed();
  return h;
}

struct GroundDoublet {
  double e0 = 0.0;
  double e1 = 0.0;
  Eigen::MatrixXd vectors;  // two columns
  EigenResult solver;
};

inline GroundDoublet ground_doublet(double k, double omega, std::size_t cutoff, const EigenConfig& cfg = {}) {
  const HamiltonianMatrix h = build_hamiltonian(k, omega, cutoff);
  EigenResult r = lowest_eigenpairs(h.matrix, 2, cfg);
  if (!r.converged) throw NumericalError("ground_doublet: eigensolver did not converge");
  GroundDoublet out;
  out.e0 = r.values[0];
  out.e1 = r.values[1];
  out.vectors = r.vectors;
  out.solver = std::move(r);
  return out;
}

// Normalized oscillator eigenfunctions phi_0..phi_N at x by the stable
// three-term recurrence.
inline void hermite_functions(double x, std::size_t n_max, std::vector<double>& out) {
  out.resize(n_max + 1);
  out[0] = std::pow(kPi, -0.25) * std::exp(-0.5 * x * x);
  if (n_max == 0) return;
  out[1] = std::sqrt(2.0) * x * out[0];
  for (std::size_t n = 1; n < n_max; ++n) {
    const double nn = static_cast<double>(n);
    out[n + 1] = std::sqrt(2.0 / (nn + 1.0)) * x * out[n] - std::sqrt(nn / (nn + 1.0)) * out[n - 1];
  }
}

inline constexpr double kMinCapturedNorm = 0.999;

struct GuessedExpansion {
  Eigen::VectorXcd coefficients;  // indexed by FockBasis::index
  double captured_norm = 0.0;     // sum |c|^2 of the normalized state
  std::string warning;            // set when captured_norm < 0.999
};

// Coefficients of the normalized Psi_- in the two-mode oscillator basis,
//   Psi_-(q, phi) = [C(q) (1, -i) + s S(q) e^{i phi} (1, i)] / sqrt2,
// from a radial rule times an angular trapezoid that is exact for the
// trigonometric degree of the integrand.
inline GuessedExpansion fock_expand_guessed(double k, std::size_t cutoff, const RadialGrid& grid) {
  require(std::isfinite(k) && k >= 0.0, "fock_expand_guessed: k must be >= 0");
  if (grid.q_max() < k + jt::kMinSafeMargin)
    throw InvalidArgument("fock_expand_guessed: radial truncation unsafe: q_max < k + 6");
  const FockBasis basis(cutoff);
  const std::size_t n1 = cutoff + 1;
  const std::size_t n_ang = 2 * cutoff + 4;
  const int sign = jt::guessed_operator_sign();
  const double r2 = 1.0 / std::sqrt(2.0);
  const double dphi = 2.0 * kPi / static_cast<double>(n_ang);

  // component e accumulates sum_w c_e(q, phi) phi_na(qa) phi_nb(qb)
  Eigen::MatrixXcd acc0 = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n1), static_cast<Eigen::Index>(n1));
  Eigen::MatrixXcd acc1 = acc0;
  std::vector<double> ha;
  std::vector<double> hb;
  Eigen::VectorXd va(static_cast<Eigen::Index>(n1));
  Eigen::VectorXd vb(static_cast<Eigen::Index>(n1));
  CompensatedSum norm2d;
  for (std::size_t iq = 0; iq < grid.size(); ++iq) {
    const double q = grid.node(iq);
    const double wq = grid.weight(iq) * q * dphi;
    const auto p = jt::detail::radial_profiles(q, k);
    norm2d.add(2.0 * kPi * grid.weight(iq) * q * (p.c * p.c + p.s * p.s));
    for (std::size_t ia = 0; ia < n_ang; ++ia) {
      const double phi = dphi * static_cast<double>(ia);
      const cplx e = std::polar(1.0, phi);
      const cplx up = r2 * (p.c + static_cast<double>(sign) * p.s * e);
      const cplx down = r2 * (cplx(0.0, -1.0) * p.c + static_cast<double>(sign) * p.s * e * cplx(0.0, 1.0));
      hermite_functions(q * std::cos(phi), cutoff, ha);
      hermite_functions(q * std::sin(phi), cutoff, hb);
      for (std::size_t j = 0; j < n1; ++j) {
        va(static_cast<Eigen::Index>(j)) = ha[j];
        vb(static_cast<Eigen::Index>(j)) = hb[j];
      }
      const Eigen::MatrixXd outer = wq * (va * vb.transpose());
      acc0 += up * outer.cast<cplx>();
      acc1 += down * outer.cast<cplx>();
    }
  }
  const double inv = 1.0 / std::sqrt(norm2d.value());
  GuessedExpansion out;
  out.coefficients = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t na = 0; na < n1; ++na) {
    for (std::size_t nb = 0; nb < n1; ++nb) {
      const auto a = static_cast<Eigen::Index>(na);
      const auto b = static_cast<Eigen::Index>(nb);
      out.coefficients(static_cast<Eigen::Index>(basis.index(na, nb, 0))) = inv * acc0(a, b);
      out.coefficients(static_cast<Eigen::Index>(basis.index(na, nb, 1))) = inv * acc1(a, b);
    }
  }
  out.captured_norm = out.coefficients.squaredNorm();
  if (out.captured_norm < kMinCapturedNorm)
    out.warning = "cutoff too small for this k (captured norm " + std::to_string(out.captured_norm) + ")";
  return out;
}

// Default radial rule for the expansion: Gauss-Legendre to k + 8.
inline RadialGrid expansion_grid(double k, std::size_t nodes = 400) {
  return RadialGrid::gauss_legendre(k + 8.0, nodes);
}

// Rayleigh quotient of a complex vector in a real symmetric matrix.
inline double rayleigh_quotient(const SparseMatrix& h, const Eigen::VectorXcd& c) {
  const Eigen::VectorXd x = c.real();
  const Eigen::VectorXd y = c.imag();
  const double num = x.dot(h * x) + y.dot(h * y);
  return num / c.squaredNorm();
}

struct GuessedEnergy {
  double energy = 0.0;
  double captured_norm = 0.0;
};

inline GuessedEnergy guessed_energy(double k, double omega, std::size_t cutoff) {
  const GuessedExpansion ex = fock_expand_guessed(k, cutoff, expansion_grid(k));
  if (ex.captured_norm < kMinCapturedNorm) throw NumericalError("guessed_energy: " + ex.warning);
  const HamiltonianMatrix h = build_hamiltonian(k, omega, cutoff);
  return {rayleigh_quotient(h.matrix, ex.coefficients), ex.captured_norm};
}

}  // namespace jtphase::ed
