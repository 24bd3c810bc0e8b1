#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <complex>
#include <vector>

#include "cra/params.hpp"
#include "cra/spin_sector.hpp"

// LAPACKE drags in <complex.h>, whose I macro breaks any later template
// using I as a parameter name (boost does).
#ifdef I
#undef I
#endif

namespace cra {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using SparseMatrix = Eigen::SparseMatrix<double>;

namespace detail {

/// z-projection of a spin-(n/2) ladder, m = j..-j descending.
inline Vector ladder_mz(int n) {
    const double j = 0.5 * n;
    Vector m(n + 1);
    for (int k = 0; k <= n; ++k) m[k] = j - k;
    return m;
}

/// S_x of a spin-(n/2) ladder in the descending-m basis:
/// <m+1|S_x|m> = <m|S_x|m+1> = sqrt(j(j+1) - m(m+1)) / 2.
inline Matrix ladder_sx(int n) {
    const double j = 0.5 * n;
    Matrix sx = Matrix::Zero(n + 1, n + 1);
    for (int k = 0; k + 1 <= n; ++k) {
        const double m_low = j - (k + 1);
        const double v = 0.5 * std::sqrt(j * (j + 1) - m_low * (m_low + 1));
        sx(k, k + 1) = v;
        sx(k + 1, k) = v;
    }
    return sx;
}

inline double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

struct CollectiveOps {
    Matrix szu, szd, sxu, sxd;
};

/// Collective spin operators of the two sublattices in the product basis.
/// S_z ladders are diagonal; S_x is tridiagonal within each ladder; each
/// sublattice operator acts as identity on the other factor.
inline CollectiveOps collective_ops(const SpinSector& sec) {
    const int du = sec.n_up + 1, dd = sec.n_dn + 1;
    const Vector mu = detail::ladder_mz(sec.n_up);
    const Vector md = detail::ladder_mz(sec.n_dn);
    const Matrix sxu1 = detail::ladder_sx(sec.n_up);
    const Matrix sxd1 = detail::ladder_sx(sec.n_dn);

    CollectiveOps ops;
    ops.szu = Matrix::Zero(sec.dim, sec.dim);
    ops.szd = Matrix::Zero(sec.dim, sec.dim);
    ops.sxu = Matrix::Zero(sec.dim, sec.dim);
    ops.sxd = Matrix::Zero(sec.dim, sec.dim);
    for (int ku = 0; ku < du; ++ku) {
        for (int kd = 0; kd < dd; ++kd) {
            const int i = sec.index(ku, kd);
            ops.szu(i, i) = mu[ku];
            ops.szd(i, i) = md[kd];
            for (int ku2 = 0; ku2 < du; ++ku2) {
                if (sxu1(ku, ku2) != 0.0) ops.sxu(i, sec.index(ku2, kd)) = sxu1(ku, ku2);
            }
            for (int kd2 = 0; kd2 < dd; ++kd2) {
                if (sxd1(kd, kd2) != 0.0) ops.sxd(i, sec.index(ku, kd2)) = sxd1(kd, kd2);
            }
        }
    }
    return ops;
}

/// Diagonal of the p-spin Hamiltonian: -N e0 (2(m_u + m_d)/N)^p.
inline Vector hp_diagonal(const SpinSector& sec, int p, double e0) {
    const Vector mu = detail::ladder_mz(sec.n_up);
    const Vector md = detail::ladder_mz(sec.n_dn);
    Vector diag(sec.dim);
    for (int ku = 0; ku <= sec.n_up; ++ku) {
        for (int kd = 0; kd <= sec.n_dn; ++kd) {
            const double m = 2.0 * (mu[ku] + md[kd]) / sec.n_total;
            diag[sec.index(ku, kd)] = -sec.n_total * e0 * std::pow(m, p);
        }
    }
    return diag;
}

/// Diagonal of the bias Hamiltonian H0 = -sum_{up set} sigma^z + sum_{down
/// set} sigma^z = -2 S_z^u + 2 S_z^d, in units of e0.
inline Vector h0_diagonal(const SpinSector& sec, double e0 = 1.0) {
    const Vector mu = detail::ladder_mz(sec.n_up);
    const Vector md = detail::ladder_mz(sec.n_dn);
    Vector diag(sec.dim);
    for (int ku = 0; ku <= sec.n_up; ++ku)
        for (int kd = 0; kd <= sec.n_dn; ++kd)
            diag[sec.index(ku, kd)] = e0 * (-2.0 * mu[ku] + 2.0 * md[kd]);
    return diag;
}

/// Transverse-field driver V_TF = -gamma (2 S_x^u + 2 S_x^d) as a sparse
/// matrix (two tridiagonal bands in the flattened index).
inline SparseMatrix vtf_sparse(const SpinSector& sec, double gamma) {
    const Matrix sxu1 = detail::ladder_sx(sec.n_up);
    const Matrix sxd1 = detail::ladder_sx(sec.n_dn);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(4 * sec.dim);
    for (int ku = 0; ku <= sec.n_up; ++ku) {
        for (int kd = 0; kd <= sec.n_dn; ++kd) {
            const int i = sec.index(ku, kd);
            if (ku + 1 <= sec.n_up) {
                const double v = -gamma * 2.0 * sxu1(ku, ku + 1);
                trips.emplace_back(i, sec.index(ku + 1, kd), v);
                trips.emplace_back(sec.index(ku + 1, kd), i, v);
            }
            if (kd + 1 <= sec.n_dn) {
                const double v = -gamma * 2.0 * sxd1(kd, kd + 1);
                trips.emplace_back(i, sec.index(ku, kd + 1), v);
                trips.emplace_back(sec.index(ku, kd + 1), i, v);
            }
        }
    }
    SparseMatrix m(sec.dim, sec.dim);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

inline Matrix build_hp(const SpinSector& sec, int p, double e0 = 1.0) {
    return Matrix(hp_diagonal(sec, p, e0).asDiagonal());
}

inline Matrix build_h0(const SpinSector& sec, double e0 = 1.0) {
    return Matrix(h0_diagonal(sec, e0).asDiagonal());
}

inline Matrix build_vtf(const SpinSector& sec, double gamma) {
    return Matrix(vtf_sparse(sec, gamma));
}

/// H_ARA(lambda, s) = (1-s) lambda V_TF + (1-s)(1-lambda) H0 + s H_P.
inline Matrix ara_hamiltonian(const SpinSector& sec, double lambda, double s, int p,
                              double gamma, double e0 = 1.0) {
    Matrix h = (1.0 - s) * lambda * build_vtf(sec, gamma);
    h += Matrix(((1.0 - s) * (1.0 - lambda) * h0_diagonal(sec, e0) +
                 s * hp_diagonal(sec, p, e0))
                    .asDiagonal());
    return h;
}

/// Forward-annealing Hamiltonian (1-s) V_TF + s H_P in the single maximal
/// ladder j = N/2 (dimension N+1).
inline Matrix qa_hamiltonian(int n, double s, int p, double gamma, double e0 = 1.0) {
    const SpinSector ladder = build_sector(n, 1.0);
    Matrix h = (1.0 - s) * build_vtf(ladder, gamma);
    h += Matrix((s * hp_diagonal(ladder, p, e0)).asDiagonal());
    return h;
}

/// Classical reverse-annealing start: the basis state (m_u = j_u, m_d = -j_d),
/// i.e. the ground state of H0.
inline ComplexVector initial_state(const SpinSector& sec) {
    ComplexVector psi = ComplexVector::Zero(sec.dim);
    psi[sec.initial_index()] = 1.0;
    return psi;
}

/// The ferromagnetic target: basis state (m_u = j_u, m_d = j_d).
inline ComplexVector target_state(const SpinSector& sec) {
    ComplexVector psi = ComplexVector::Zero(sec.dim);
    psi[sec.target_index()] = 1.0;
    return psi;
}

/// Ground state of V_TF in the Dicke ladder: amplitude sqrt(binom(N, k)) /
/// 2^(N/2) at m = j - k (the uniform superposition of all classical states).
inline ComplexVector qa_initial_state(int n) {
    if (n < 1) throw Error("qa_initial_state: N must be >= 1");
    ComplexVector psi(n + 1);
    for (int k = 0; k <= n; ++k) {
        psi[k] = std::exp(0.5 * detail::log_binomial(n, k) - 0.5 * n * std::log(2.0));
    }
    return psi;
}

/// The three operator ingredients every protocol Hamiltonian is assembled
/// from: H(theta) = a_v V_TF + a_0 diag(h0) + a_p diag(hp). V_TF carries the
/// gamma factor, the diagonals carry e0. V_TF is also described as a set of
/// symmetric bands, vtf(i, i + offset) = coeff[i], which the commutator
/// kernels exploit.
struct OperatorBasis {
    struct Band {
        int offset = 0;
        Vector coeff; // length dim - offset; zero entries where no coupling
    };

    int dim = 0;
    SparseMatrix vtf;
    std::vector<Band> vtf_bands;
    Vector h0;
    Vector hp;
};

inline OperatorBasis sector_basis(const SpinSector& sec, const AnnealParams& params) {
    OperatorBasis basis;
    basis.dim = sec.dim;
    basis.vtf = vtf_sparse(sec, params.gamma);
    basis.h0 = h0_diagonal(sec, params.e0);
    basis.hp = hp_diagonal(sec, params.p, params.e0);

    const Matrix sxu1 = detail::ladder_sx(sec.n_up);
    const Matrix sxd1 = detail::ladder_sx(sec.n_dn);
    // up-ladder coupling: (ku, kd) <-> (ku + 1, kd), flattened offset n_dn + 1
    if (sec.n_up > 0) {
        OperatorBasis::Band band;
        band.offset = sec.n_dn + 1;
        band.coeff = Vector::Zero(sec.dim - band.offset);
        for (int ku = 0; ku + 1 <= sec.n_up; ++ku)
            for (int kd = 0; kd <= sec.n_dn; ++kd)
                band.coeff[sec.index(ku, kd)] = -params.gamma * 2.0 * sxu1(ku, ku + 1);
        basis.vtf_bands.push_back(std::move(band));
    }
    // down-ladder coupling: (ku, kd) <-> (ku, kd + 1), flattened offset 1
    if (sec.n_dn > 0) {
        OperatorBasis::Band band;
        band.offset = 1;
        band.coeff = Vector::Zero(sec.dim - 1);
        for (int ku = 0; ku <= sec.n_up; ++ku)
            for (int kd = 0; kd + 1 <= sec.n_dn; ++kd)
                band.coeff[sec.index(ku, kd)] = -params.gamma * 2.0 * sxd1(kd, kd + 1);
        basis.vtf_bands.push_back(std::move(band));
    }
    return basis;
}

struct TermCoeffs {
    double v = 0.0, h0 = 0.0, hp = 0.0;
};

/// Coefficients of H(lambda, s) over {V_TF, H0, H_P}.
inline TermCoeffs h_coeffs(Protocol protocol, double lambda, double s) {
    if (protocol == Protocol::QA) return {1.0 - s, 0.0, s};
    return {(1.0 - s) * lambda, (1.0 - s) * (1.0 - lambda), s};
}

/// Coefficients of dH/dtheta over {V_TF, H0, H_P} along the path.
inline TermCoeffs dh_coeffs(Protocol protocol, double lambda, double s, double lambda_dot,
                            double s_dot) {
    if (protocol == Protocol::QA) return {-s_dot, 0.0, s_dot};
    return {lambda_dot * (1.0 - s) - s_dot * lambda,
            -lambda_dot * (1.0 - s) - s_dot * (1.0 - lambda), s_dot};
}

inline Matrix assemble_dense(const OperatorBasis& basis, const TermCoeffs& c) {
    Matrix h = c.v * Matrix(basis.vtf);
    h += Matrix((c.h0 * basis.h0 + c.hp * basis.hp).asDiagonal());
    return h;
}

}  // namespace cra
