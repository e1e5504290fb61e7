#include "clusterbell/spin_chsh.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>

namespace clusterbell::spin_chsh {

namespace {

constexpr double kNormTolerance = 1e-6;
constexpr double kHermitianTolerance = 1e-12;
constexpr double kTraceTolerance = 1e-12;
constexpr double kEigenvalueFloor = -1e-10;

Mat2 identity2() {
    return {Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(1, 0)};
}

Mat2 sigma_x() {
    return {Complex(0, 0), Complex(1, 0), Complex(1, 0), Complex(0, 0)};
}

Mat2 sigma_y() {
    return {Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0)};
}

Mat2 sigma_z() {
    return {Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(-1, 0)};
}

}  // namespace

SpinDirection::SpinDirection(double x, double y, double z) {
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (std::abs(norm - 1.0) > kNormTolerance) {
        throw std::invalid_argument(
            "SpinDirection: vector norm deviates from 1 by more than 1e-6");
    }
    x_ = x / norm;
    y_ = y / norm;
    z_ = z / norm;
}

SpinDirection SpinDirection::normalized(double x, double y, double z) {
    const double norm = std::sqrt(x * x + y * y + z * z);
    if (!(norm > 1e-12)) {
        throw std::invalid_argument("SpinDirection: vector is (near) zero");
    }
    SpinDirection d;
    d.x_ = x / norm;
    d.y_ = y / norm;
    d.z_ = z / norm;
    return d;
}

TwoQubitState::TwoQubitState(const Mat4& rho) : rho_(rho) {
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const Complex diff = rho_[4 * i + j] - std::conj(rho_[4 * j + i]);
            if (std::abs(diff) > kHermitianTolerance) {
                throw std::invalid_argument("TwoQubitState: not Hermitian");
            }
        }
    }
    Complex trace(0, 0);
    for (std::size_t i = 0; i < 4; ++i) trace += rho_[4 * i + i];
    if (std::abs(trace - Complex(1, 0)) > kTraceTolerance) {
        throw std::invalid_argument("TwoQubitState: trace differs from 1");
    }
    const std::array<double, 4> eig = hermitian_eigenvalues(rho_);
    if (eig[0] < kEigenvalueFloor) {
        throw std::invalid_argument("TwoQubitState: negative eigenvalue");
    }
}

ChshSetting max_violation_setting() {
    return ChshSetting{SpinDirection(0, 0, 1), SpinDirection(1, 0, 0),
                       SpinDirection::normalized(-1, 0, -1),
                       SpinDirection::normalized(1, 0, -1)};
}

LhvModel::LhvModel(std::vector<double> weights,
                   std::vector<Assignment> assignments)
    : weights_(std::move(weights)), assignments_(std::move(assignments)) {
    if (weights_.size() != assignments_.size() || weights_.empty()) {
        throw std::invalid_argument("LhvModel: size mismatch or empty");
    }
    double sum = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) {
            throw std::invalid_argument("LhvModel: negative weight");
        }
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("LhvModel: weights do not sum to 1");
    }
    for (const Assignment& s : assignments_) {
        for (int v : {s.a1, s.a2, s.b1, s.b2}) {
            if (v != 1 && v != -1) {
                throw std::invalid_argument("LhvModel: outcome not +/-1");
            }
        }
    }
}

Mat2 pauli_observable(const SpinDirection& a) {
    return {Complex(a.z(), 0), Complex(a.x(), -a.y()), Complex(a.x(), a.y()),
            Complex(-a.z(), 0)};
}

Mat4 kron(const Mat2& a, const Mat2& b) {
    Mat4 out{};
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            for (std::size_t k = 0; k < 2; ++k) {
                for (std::size_t l = 0; l < 2; ++l) {
                    out[4 * (2 * i + j) + (2 * k + l)] =
                        a[2 * i + k] * b[2 * j + l];
                }
            }
        }
    }
    return out;
}

TwoQubitState singlet_state() {
    const Mat4 ii = kron(identity2(), identity2());
    const Mat4 xx = kron(sigma_x(), sigma_x());
    const Mat4 yy = kron(sigma_y(), sigma_y());
    const Mat4 zz = kron(sigma_z(), sigma_z());
    Mat4 rho{};
    for (std::size_t i = 0; i < 16; ++i) {
        rho[i] = (ii[i] - xx[i] - yy[i] - zz[i]) * 0.25;
    }
    return TwoQubitState(rho);
}

double spin_correlator(const TwoQubitState& state, const SpinDirection& a,
                       const SpinDirection& b) {
    const Mat4 obs = kron(pauli_observable(a), pauli_observable(b));
    Complex trace(0, 0);
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            trace += state.matrix()[4 * r + c] * obs[4 * c + r];
        }
    }
    return trace.real();
}

double chsh_value(const TwoQubitState& state, const ChshSetting& s) {
    return spin_correlator(state, s.a1, s.b1) +
           spin_correlator(state, s.a1, s.b2) +
           spin_correlator(state, s.a2, s.b1) -
           spin_correlator(state, s.a2, s.b2);
}

double lhv_chsh_value(const LhvModel& model) {
    double value = 0.0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        const LhvModel::Assignment& s = model.assignments()[i];
        value += model.weights()[i] *
                 static_cast<double>(s.a1 * (s.b1 + s.b2) + s.a2 * (s.b1 - s.b2));
    }
    return value;
}

std::vector<LhvExtremal> lhv_extremal_scan() {
    std::vector<LhvExtremal> out;
    out.reserve(16);
    for (int mask = 0; mask < 16; ++mask) {
        const LhvModel::Assignment s{(mask & 1) ? 1 : -1, (mask & 2) ? 1 : -1,
                                     (mask & 4) ? 1 : -1, (mask & 8) ? 1 : -1};
        const int value = s.a1 * (s.b1 + s.b2) + s.a2 * (s.b1 - s.b2);
        out.push_back(LhvExtremal{s, static_cast<double>(value)});
    }
    return out;
}

std::array<double, 4> hermitian_eigenvalues(const Mat4& h) {
    // Real-symmetric embedding: H = A + iB maps to [[A, -B], [B, A]], whose
    // spectrum is that of H with every eigenvalue doubled.
    double m[8][8];
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            const Complex z = h[4 * i + j];
            m[i][j] = z.real();
            m[i][j + 4] = -z.imag();
            m[i + 4][j] = z.imag();
            m[i + 4][j + 4] = z.real();
        }
    }

    double frob2 = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 8; ++j) frob2 += m[i][j] * m[i][j];
    }

    // Cyclic Jacobi sweeps; quadratic convergence makes the sweep cap loose.
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off2 = 0.0;
        for (std::size_t p = 0; p < 8; ++p) {
            for (std::size_t q = p + 1; q < 8; ++q) off2 += m[p][q] * m[p][q];
        }
        if (off2 <= 1e-30 * (frob2 + 1e-300)) break;
        for (std::size_t p = 0; p < 8; ++p) {
            for (std::size_t q = p + 1; q < 8; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                const double t =
                    (theta >= 0 ? 1.0 : -1.0) /
                    (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < 8; ++k) {
                    const double mkp = m[k][p];
                    const double mkq = m[k][q];
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for (std::size_t k = 0; k < 8; ++k) {
                    const double mpk = m[p][k];
                    const double mqk = m[q][k];
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }

    std::array<double, 8> diag;
    for (std::size_t i = 0; i < 8; ++i) diag[i] = m[i][i];
    std::sort(diag.begin(), diag.end());
    return {diag[0], diag[2], diag[4], diag[6]};
}

}  // namespace clusterbell::spin_chsh
