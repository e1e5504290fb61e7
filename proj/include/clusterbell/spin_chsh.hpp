#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

// Exact finite-dimensional spin algebra: Pauli observables, the singlet
// state, CHSH correlators and local-hidden-variable models.
//
// Basis convention: |0>, |1> are the sigma_z eigenstates; two-qubit basis
// |ij> = |i> (x) |j> with flat index 2*i + j. Matrices are dense row-major.

namespace clusterbell::spin_chsh {

using Complex = std::complex<double>;
using Mat2 = std::array<Complex, 4>;   ///< 2x2 complex, row-major
using Mat4 = std::array<Complex, 16>;  ///< 4x4 complex, row-major

/// Unit vector in R^3 selecting a spin observable a.sigma.
///
/// The constructor accepts vectors whose Euclidean norm deviates from 1 by
/// at most 1e-6 (they are renormalized exactly); larger deviations are
/// rejected. Use `normalized()` to build a direction from an arbitrary
/// nonzero vector.
class SpinDirection {
  public:
    SpinDirection(double x, double y, double z);

    /// Normalizes any nonzero vector, rejecting only near-zero input.
    static SpinDirection normalized(double x, double y, double z);

    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    double dot(const SpinDirection& other) const {
        return x_ * other.x_ + y_ * other.y_ + z_ * other.z_;
    }

  private:
    SpinDirection() = default;
    double x_ = 0.0, y_ = 0.0, z_ = 1.0;
};

/// 4x4 density matrix of a two-qubit spin state.
///
/// Construction validates Hermiticity (1e-12), unit trace (1e-12) and
/// positivity (eigenvalue floor -1e-10, absorbing diagonalization noise).
class TwoQubitState {
  public:
    explicit TwoQubitState(const Mat4& rho);

    const Mat4& matrix() const { return rho_; }

  private:
    Mat4 rho_;
};

/// The four measurement directions of one CHSH experiment.
struct ChshSetting {
    SpinDirection a1, a2, b1, b2;
};

/// Directions attaining the maximal quantum CHSH value 2*sqrt(2):
/// a1 = z, a2 = x, b1 = -(x + z)/sqrt(2), b2 = (x - z)/sqrt(2).
ChshSetting max_violation_setting();

/// Local hidden variable model on a finite space of hidden states.
///
/// Each hidden state lambda carries a probability weight and a deterministic
/// +/-1 outcome for every one of the four local observables. Continuous
/// models are represented by finite mixtures; the CHSH bound is convex, so
/// nothing is lost.
class LhvModel {
  public:
    struct Assignment {
        int a1, a2, b1, b2;  // each exactly +1 or -1
    };

    LhvModel(std::vector<double> weights, std::vector<Assignment> assignments);

    const std::vector<double>& weights() const { return weights_; }
    const std::vector<Assignment>& assignments() const { return assignments_; }
    std::size_t size() const { return weights_.size(); }

  private:
    std::vector<double> weights_;
    std::vector<Assignment> assignments_;
};

/// a.sigma = a_x sigma_x + a_y sigma_y + a_z sigma_z. Hermitian, traceless,
/// eigenvalues +/-1.
Mat2 pauli_observable(const SpinDirection& a);

/// Projector onto the singlet |01> - |10> (normalized), built from the
/// Pauli expansion (I(x)I - sum_k sigma_k(x)sigma_k)/4.
TwoQubitState singlet_state();

/// Tr(rho (a.sigma)(x)(b.sigma)). For the singlet this equals -a.b.
double spin_correlator(const TwoQubitState& state, const SpinDirection& a,
                       const SpinDirection& b);

/// CHSH combination E(a1,b1) + E(a1,b2) + E(a2,b1) - E(a2,b2).
///
/// The pairing (b1+b2 with a1, b1-b2 with a2) is fixed; other sign/pairing
/// variants are equivalent under relabeling of the settings.
double chsh_value(const TwoQubitState& state, const ChshSetting& setting);

/// sum_lambda p(lambda) [a1(b1+b2) + a2(b1-b2)](lambda). Bounded by 2 in
/// absolute value for every valid model.
double lhv_chsh_value(const LhvModel& model);

struct LhvExtremal {
    LhvModel::Assignment assignment;
    double value;
};

/// All 16 deterministic single-lambda strategies with their CHSH values.
/// Every value is exactly +2 or -2.
std::vector<LhvExtremal> lhv_extremal_scan();

/// Kronecker product in the |ij> = |i>(x)|j> convention.
Mat4 kron(const Mat2& a, const Mat2& b);

/// Eigenvalues of a 4x4 Hermitian matrix, ascending. Computed by a Jacobi
/// sweep on the 8x8 real-symmetric embedding.
std::array<double, 4> hermitian_eigenvalues(const Mat4& h);

}  // namespace clusterbell::spin_chsh
