#pragma once

#include <cmath>
#include <vector>

#include "cra/operators.hpp"

namespace cra {

/// The full 2^N computational space built from explicit Pauli products.
/// Bit i of a basis index set means spin i points down (sigma^z_i = -1 on
/// it); index 0 is the all-up ferromagnetic state. The first n_up spin
/// indices form the up-biased set of H0.
struct FullSpace {
    OperatorBasis basis;
    int initial_index = 0; // up set up, down set down
    int target_index = 0;  // all up
};

inline FullSpace full_space(int n, int n_up, const AnnealParams& params) {
    if (n < 1 || n > 20) throw Error("full_space: N out of range");
    const int dim = 1 << n;
    FullSpace fs;
    fs.basis.dim = dim;
    fs.basis.h0.resize(dim);
    fs.basis.hp.resize(dim);
    for (int z = 0; z < dim; ++z) {
        double mz_total = 0.0, h0 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double zi = (z >> i) & 1 ? -1.0 : 1.0;
            mz_total += zi;
            h0 += (i < n_up ? -zi : zi);
        }
        fs.basis.h0[z] = params.e0 * h0;
        fs.basis.hp[z] = -n * params.e0 * std::pow(mz_total / n, params.p);
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(dim) * n);
    for (int z = 0; z < dim; ++z)
        for (int i = 0; i < n; ++i) trips.emplace_back(z, z ^ (1 << i), -params.gamma);
    fs.basis.vtf.resize(dim, dim);
    fs.basis.vtf.setFromTriplets(trips.begin(), trips.end());
    // each sigma^x_i is a band at offset 2^i, coupling only indices whose
    // i-th bit is clear
    for (int i = 0; i < n; ++i) {
        OperatorBasis::Band band;
        band.offset = 1 << i;
        band.coeff = Vector::Zero(dim - band.offset);
        for (int z = 0; z + band.offset < dim; ++z)
            if (((z >> i) & 1) == 0) band.coeff[z] = -params.gamma;
        fs.basis.vtf_bands.push_back(std::move(band));
    }

    fs.target_index = 0;
    fs.initial_index = 0;
    for (int i = n_up; i < n; ++i) fs.initial_index |= 1 << i;
    return fs;
}

/// Isometry from the two-ladder sector onto the full space: column
/// (ku, kd) is the product of the symmetrised Dicke states of the two spin
/// sets, so a bitstring with ku down-spins in the up set and kd in the down
/// set enters with amplitude 1/sqrt(binom(n_up, ku) binom(n_dn, kd)).
inline Matrix sector_embedding(const SpinSector& sec) {
    const int n = sec.n_total;
    const int dim = 1 << n;
    Matrix p = Matrix::Zero(dim, sec.dim);
    for (int z = 0; z < dim; ++z) {
        int ku = 0, kd = 0;
        for (int i = 0; i < n; ++i) {
            if ((z >> i) & 1) (i < sec.n_up ? ku : kd)++;
        }
        const double amp = std::exp(-0.5 * (detail::log_binomial(sec.n_up, ku) +
                                            detail::log_binomial(sec.n_dn, kd)));
        p(z, sec.index(ku, kd)) = amp;
    }
    return p;
}

}  // namespace cra
