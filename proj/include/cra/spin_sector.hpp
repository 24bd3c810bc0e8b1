#pragma once

#include <cmath>
#include <string>

#include "cra/errors.hpp"

namespace cra {

/// Two-sublattice symmetry sector: the tensor product of the maximal-spin
/// ladders of the N_up up-biased and N_dn down-biased spins.
///
/// Basis ordering convention: index pair (ku, kd) with ku, kd counting down
/// from the top of each ladder, i.e. m_u = j_u - ku (descending), m_d = j_d
/// - kd (descending), flattened row-major with the up-ladder outer:
/// index = ku * (N_dn + 1) + kd.
struct SpinSector {
    int n_total = 0; // N
    int n_up = 0;    // number of up-biased spins, = c*N
    int n_dn = 0;    // N - n_up
    int dim = 0;     // (n_up + 1) * (n_dn + 1)

    double j_up() const { return 0.5 * n_up; }
    double j_dn() const { return 0.5 * n_dn; }

    int index(int ku, int kd) const { return ku * (n_dn + 1) + kd; }
    double m_up(int ku) const { return j_up() - ku; }
    double m_dn(int kd) const { return j_dn() - kd; }

    /// Index of the basis state (m_u = j_u, m_d = -j_d): the ground state of
    /// H0 and the reverse-annealing starting state.
    int initial_index() const { return index(0, n_dn); }
    /// Index of the all-up ferromagnetic state (m_u = j_u, m_d = j_d).
    int target_index() const { return index(0, 0); }

    double fraction_c() const { return static_cast<double>(n_up) / n_total; }
};

/// Builds the sector for N spins with an up-aligned fraction c in (0, 1].
/// c*N must be an integer; throws NonIntegerFraction otherwise.
inline SpinSector build_sector(int n, double c) {
    if (n < 1) throw Error("build_sector: N must be >= 1");
    if (!(c > 0.0) || c > 1.0) throw Error("build_sector: c must be in (0, 1]");
    const double cn = c * n;
    const double rounded = std::round(cn);
    if (std::abs(cn - rounded) > 1e-9) {
        throw NonIntegerFraction("build_sector: c*N = " + std::to_string(cn) +
                                 " is not an integer");
    }
    SpinSector sec;
    sec.n_total = n;
    sec.n_up = static_cast<int>(rounded);
    sec.n_dn = n - sec.n_up;
    sec.dim = (sec.n_up + 1) * (sec.n_dn + 1);
    return sec;
}

}  // namespace cra
