#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "cra/operators.hpp"
#include "cra/schedule.hpp"
#include "cra/spectra.hpp"

namespace cra {

inline Matrix commutator(const Matrix& a, const Matrix& b) {
    Matrix r = a * b;
    r.noalias() -= b * a;
    return r;
}

/// m-fold nested commutator L^m(X) with L(Y) = [H, Y].
inline Matrix nested_commutator(const Matrix& h, const Matrix& x, int m) {
    if (m < 1) throw Error("nested_commutator: m must be >= 1");
    Matrix cur = x;
    for (int i = 0; i < m; ++i) cur = commutator(h, cur);
    return cur;
}

/// Exact analytic dH/dtheta of the protocol Hamiltonian along the path:
/// lambda_dot (1-s)(V_TF - H0) + s_dot (H_P - lambda V_TF - (1-lambda) H0)
/// for ARA, s_dot (H_P - V_TF) for QA.
inline Matrix dh_dtheta(const SpinSector& sec, double theta, const AnnealParams& params) {
    const ScheduleSample smp = schedule_sample(theta, params.q);
    const OperatorBasis basis = sector_basis(sec, params);
    return assemble_dense(
        basis, dh_coeffs(params.protocol, smp.lambda, smp.s, smp.lambda_dot, smp.s_dot));
}

struct VariationalResult {
    Eigen::VectorXd alphas; // physical coefficients, alpha_k in units e0^(-2k)
    bool degenerate = false;
};

namespace detail {

/// Solves the K x K normal equations M a = -b by spectral pseudo-inverse,
/// truncating eigenvalues below 1e-12 of the largest. gram_scale is the
/// natural size of M's entries; a wholly negligible M (dH commutes with H)
/// yields a = 0 with the degenerate flag set.
inline VariationalResult solve_normal_equations(const Matrix& gram, const Vector& rhs,
                                                double gram_scale) {
    VariationalResult res;
    const int k = static_cast<int>(rhs.size());
    res.alphas = Vector::Zero(k);
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
    const double ev_max = es.eigenvalues().maxCoeff();
    if (!(ev_max > 1e-24 * gram_scale)) {
        res.degenerate = true;
        return res;
    }
    Vector inv = Vector::Zero(k);
    for (int i = 0; i < k; ++i) {
        const double ev = es.eigenvalues()[i];
        if (ev > 1e-12 * ev_max) inv[i] = 1.0 / ev;
    }
    res.alphas = -(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * rhs);
    return res;
}

inline double frobenius_dot(const Matrix& a, const Matrix& b) {
    return a.cwiseProduct(b).sum();
}

}  // namespace detail

/// Variational coefficients of the nested-commutator expansion A* =
/// i sum_k alpha_k L^(2k-1)(dH): minimises ||dH + sum_k alpha_k L^(2k)(dH)||_F
/// over alpha by the normal equations M_kl = <L^(2k) dH, L^(2l) dH>,
/// b_k = <L^(2k) dH, dH>. Dense reference implementation.
inline VariationalResult variational_coefficients(const Matrix& h, const Matrix& dh, int k) {
    if (k < 1 || k > 3) throw Error("variational_coefficients: K must be in 1..3");
    const double dh_scale = dh.norm();
    if (dh_scale == 0.0) {
        VariationalResult res;
        res.alphas = Vector::Zero(k);
        return res;
    }
    // Scale the ladder by an operator-norm bound of H so the Gram matrix stays
    // well conditioned; alphas are unscaled at the end.
    const double omega = std::max(h.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
    std::vector<Matrix> ladder(2 * k);
    Matrix cur = dh;
    for (int m = 0; m < 2 * k; ++m) {
        cur = commutator(h, cur) / omega;
        ladder[m] = cur;
    }
    Matrix gram(k, k);
    Vector rhs(k);
    for (int a = 1; a <= k; ++a) {
        rhs[a - 1] = detail::frobenius_dot(ladder[2 * a - 1], dh);
        for (int b = a; b <= k; ++b) {
            gram(a - 1, b - 1) = gram(b - 1, a - 1) =
                detail::frobenius_dot(ladder[2 * a - 1], ladder[2 * b - 1]);
        }
    }
    VariationalResult res = detail::solve_normal_equations(gram, rhs, dh_scale * dh_scale);
    for (int a = 1; a <= k; ++a) res.alphas[a - 1] /= std::pow(omega, 2.0 * a);
    return res;
}

/// Exact adiabatic gauge potential as its real antisymmetric generator W
/// (the physical operator is A = i W): in the eigenbasis of H,
/// W_mn = <m|dH|n> / (E_n - E_m) for m != n, zero on the diagonal.
/// Requires a nondegenerate spectrum (min level spacing > 1e-10).
inline Matrix exact_gauge_potential(const Matrix& h, const Matrix& dh) {
    const EigResult eig = eig_symmetric(h);
    const int d = static_cast<int>(h.rows());
    for (int i = 0; i + 1 < d; ++i) {
        if (eig.values[i + 1] - eig.values[i] <= 1e-10)
            throw DegenerateSpectrum("exact_gauge_potential: level spacing below 1e-10");
    }
    Matrix d_eig = eig.vectors.transpose() * dh * eig.vectors;
    Matrix w_eig = Matrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (m == n) continue;
            w_eig(m, n) = d_eig(m, n) / (eig.values[n] - eig.values[m]);
        }
    }
    return eig.vectors * w_eig * eig.vectors.transpose();
}

/// Structured evaluator of the approximate counterdiabatic generator along
/// the annealing path. Exploits H = a_v V_TF + diag(...) with sparse V_TF so
/// one commutator costs O(d^2). Stateful scratch buffers: one instance per
/// thread.
class CDEvaluator {
  public:
    CDEvaluator(OperatorBasis basis, const AnnealParams& params)
        : basis_(std::move(basis)), params_(params) {
        params_.validate();
        const int d = basis_.dim;
        const int k = params_.cd_order;
        w_ = Matrix::Zero(d, d);
        dh_ = Matrix::Zero(d, d);
        tmp_ = Matrix::Zero(d, d);
        vtf_dense_ = Matrix(basis_.vtf);
        ladder_.assign(2 * k, Matrix::Zero(d, d));
        if (params_.variational == VariationalMode::Components) {
            comp_ladder_.assign(2, std::vector<Matrix>(2 * k, Matrix::Zero(d, d)));
            comp_dh_.assign(2, Matrix::Zero(d, d));
        }
        Vector row_sums = Vector::Zero(d);
        for (int col = 0; col < basis_.vtf.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(basis_.vtf, col); it; ++it)
                row_sums[it.row()] += std::abs(it.value());
        vtf_row_norm_ = row_sums.size() > 0 ? row_sums.maxCoeff() : 0.0;
    }

    const AnnealParams& params() const { return params_; }
    const OperatorBasis& basis() const { return basis_; }

    /// W(theta) = sum_k alpha_k L^(2k-1)(dH/dtheta), with alphas from the
    /// variational minimisation. A*(theta) = i W(theta).
    const Matrix& generator(double theta) {
        const Vector alphas = this->alphas(theta);
        return generator_with(theta, alphas);
    }

    /// W(theta) assembled from externally supplied physical alphas (used by
    /// the full-space oracle, which propagates with the sector's alphas).
    const Matrix& generator_with(double theta, const Vector& alphas) {
        prepare_path_ladder(theta);
        const int k = params_.cd_order;
        w_.setZero();
        if (!path_zero_) {
            for (int a = 1; a <= k; ++a)
                w_ += alphas[a - 1] * std::pow(omega_, 2.0 * a - 1.0) * ladder_[2 * a - 2];
        }
        return w_;
    }

    /// Physical variational coefficients at theta.
    Vector alphas(double theta) {
        const int k = params_.cd_order;
        if (k == 0) return Vector::Zero(0);
        if (params_.variational == VariationalMode::Components) return alphas_components(theta);
        prepare_path_ladder(theta);
        degenerate_ = false;
        if (path_zero_) return Vector::Zero(k);
        Matrix gram(k, k);
        Vector rhs(k);
        for (int a = 1; a <= k; ++a) {
            rhs[a - 1] = detail::frobenius_dot(ladder_[2 * a - 1], dh_);
            for (int b = a; b <= k; ++b)
                gram(a - 1, b - 1) = gram(b - 1, a - 1) =
                    detail::frobenius_dot(ladder_[2 * a - 1], ladder_[2 * b - 1]);
        }
        const double dh_sq = dh_.squaredNorm();
        VariationalResult res = detail::solve_normal_equations(gram, rhs, dh_sq);
        degenerate_ = res.degenerate;
        for (int a = 1; a <= k; ++a) res.alphas[a - 1] /= std::pow(omega_, 2.0 * a);
        return res.alphas;
    }

    /// ||G(A*)||_F = ||dH + sum_k alpha_k L^(2k)(dH)||_F at theta for the
    /// given physical alphas.
    double g_residual(double theta, const Vector& alphas) {
        prepare_path_ladder(theta);
        if (path_zero_) return 0.0;
        tmp_ = dh_;
        for (int a = 1; a <= params_.cd_order; ++a)
            tmp_ += alphas[a - 1] * std::pow(omega_, 2.0 * a) * ladder_[2 * a - 1];
        return tmp_.norm();
    }

    bool last_degenerate() const { return degenerate_; }

    /// Infinity-norm bound of H(theta) over the operator basis (the scale
    /// used to precondition the commutator ladder).
    double h_norm_bound(double theta) const {
        const TermCoeffs hc = h_at(theta);
        return std::abs(hc.v) * vtf_row_norm_ +
               (hc.h0 * basis_.h0 + hc.hp * basis_.hp).cwiseAbs().maxCoeff();
    }

    /// H(theta) coefficients over the operator basis.
    TermCoeffs h_at(double theta) const {
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        return h_coeffs(params_.protocol, smp.lambda, smp.s);
    }

    TermCoeffs dh_at(double theta) const {
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        return dh_coeffs(params_.protocol, smp.lambda, smp.s, smp.lambda_dot, smp.s_dot);
    }

  private:
    // scale * [H, Y] with H = hv*V_TF + diag(hd), into out. Single fused
    // column pass over the bands of V_TF; the generic sparse route is the
    // fallback for bases without a band description.
    void commutator_with_h(double hv, const Vector& hd, const Matrix& y, double scale,
                           Matrix& out) {
        if (basis_.vtf_bands.empty()) {
            out.noalias() = (scale * hv) * (basis_.vtf * y);
            out.noalias() -= (scale * hv) * (y * basis_.vtf);
            out += (scale * hd).asDiagonal() * y;
            out -= y * (scale * hd).asDiagonal();
            return;
        }
        const int d = basis_.dim;
        const double sv = scale * hv;
        for (int j = 0; j < d; ++j) {
            auto out_col = out.col(j);
            const auto y_col = y.col(j);
            out_col.array() = (scale * (hd.array() - hd[j])) * y_col.array();
            for (const OperatorBasis::Band& band : basis_.vtf_bands) {
                const int o = band.offset;
                const int len = d - o;
                // X * Y: rows shifted within the column
                out_col.head(len).array() += sv * band.coeff.array() * y_col.tail(len).array();
                out_col.tail(len).array() += sv * band.coeff.array() * y_col.head(len).array();
                // -Y * X: scaled neighbour columns
                if (j + o < d) out_col -= (sv * band.coeff[j]) * y.col(j + o);
                if (j - o >= 0) out_col -= (sv * band.coeff[j - o]) * y.col(j - o);
            }
        }
    }

    // Builds dH(theta) and the scaled commutator ladder U_m = L^m(dH)/omega^m.
    void prepare_path_ladder(double theta) {
        if (have_ladder_ && theta == ladder_theta_) return;
        have_ladder_ = true;
        ladder_theta_ = theta;
        const TermCoeffs hc = h_at(theta);
        const TermCoeffs dc = dh_at(theta);
        hd_ = hc.h0 * basis_.h0 + hc.hp * basis_.hp;
        hv_ = hc.v;
        omega_ = std::max(std::abs(hv_) * vtf_row_norm_ + hd_.cwiseAbs().maxCoeff(), 1e-300);
        path_zero_ = dc.v == 0.0 && dc.h0 == 0.0 && dc.hp == 0.0;
        if (path_zero_) return;
        dh_.noalias() = dc.v * vtf_dense_;
        dh_.diagonal() += dc.h0 * basis_.h0 + dc.hp * basis_.hp;
        const Matrix* prev = &dh_;
        for (size_t m = 0; m < ladder_.size(); ++m) {
            commutator_with_h(hv_, hd_, *prev, 1.0 / omega_, ladder_[m]);
            prev = &ladder_[m];
        }
    }

    // Shared-alpha variant fitted against the parameter components of the
    // gradient (QA has a single component, so both variants coincide there).
    Vector alphas_components(double theta) {
        prepare_path_ladder(theta); // for omega_ and H pieces
        degenerate_ = false;
        const int k = params_.cd_order;
        if (path_zero_) return Vector::Zero(k);
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        std::vector<TermCoeffs> comps;
        if (params_.protocol == Protocol::QA) {
            comps.push_back({-1.0, 0.0, 1.0});
        } else {
            comps.push_back({1.0 - smp.s, -(1.0 - smp.s), 0.0});             // dH/dlambda
            comps.push_back({-smp.lambda, -(1.0 - smp.lambda), 1.0});        // dH/ds
        }
        Matrix gram = Matrix::Zero(k, k);
        Vector rhs = Vector::Zero(k);
        double scale = 0.0;
        for (size_t ci = 0; ci < comps.size(); ++ci) {
            comp_dh_[ci].noalias() = comps[ci].v * vtf_dense_;
            comp_dh_[ci].diagonal() += comps[ci].h0 * basis_.h0 + comps[ci].hp * basis_.hp;
            scale += comp_dh_[ci].squaredNorm();
            const Matrix* prev = &comp_dh_[ci];
            for (int m = 0; m < 2 * k; ++m) {
                commutator_with_h(hv_, hd_, *prev, 1.0 / omega_, comp_ladder_[ci][m]);
                prev = &comp_ladder_[ci][m];
            }
            for (int a = 1; a <= k; ++a) {
                rhs[a - 1] += detail::frobenius_dot(comp_ladder_[ci][2 * a - 1], comp_dh_[ci]);
                for (int b = a; b <= k; ++b)
                    gram(a - 1, b - 1) +=
                        detail::frobenius_dot(comp_ladder_[ci][2 * a - 1], comp_ladder_[ci][2 * b - 1]);
            }
        }
        for (int a = 1; a <= k; ++a)
            for (int b = 0; b < a; ++b) gram(a - 1, b) = gram(b, a - 1);
        VariationalResult res = detail::solve_normal_equations(gram, rhs, scale);
        degenerate_ = res.degenerate;
        for (int a = 1; a <= k; ++a) res.alphas[a - 1] /= std::pow(omega_, 2.0 * a);
        return res.alphas;
    }

    OperatorBasis basis_;
    AnnealParams params_;
    Matrix vtf_dense_;
    double vtf_row_norm_ = 0.0;

    bool have_ladder_ = false;
    double ladder_theta_ = -1.0;
    bool path_zero_ = true;
    double hv_ = 0.0;
    double omega_ = 1.0;
    Vector hd_;
    Matrix dh_, w_, tmp_;
    std::vector<Matrix> ladder_;
    std::vector<std::vector<Matrix>> comp_ladder_;
    std::vector<Matrix> comp_dh_;
    bool degenerate_ = false;
};

/// The counterdiabatic term of the evolution generator, as its real
/// antisymmetric generator: cd_term = (1/tau) W(theta), with the physical
/// Hermitian operator (1/tau) i W(theta) = vdot . A. Zero at theta in {0, 1}.
inline Matrix cd_term(const SpinSector& sec, double theta, const AnnealParams& params) {
    if (params.cd_order < 1) throw Error("cd_term: K must be >= 1");
    CDEvaluator eval(sector_basis(sec, params), params);
    return eval.generator(theta) / params.tau;
}

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

/// Trace norm (sum of singular values) via the spectrum of M^T M.
inline double trace_norm(const Matrix& m) {
    const Vector ev = eigenvalues_only(Matrix(m.transpose() * m));
    double sum = 0.0;
    for (int i = 0; i < ev.size(); ++i) sum += std::sqrt(std::max(ev[i], 0.0));
    return sum;
}

struct NormTracePoint {
    double theta = 0.0;
    double frob = 0.0;  // ||vdot . A||_F in units of e0
    double trace = 0.0; // trace norm in units of e0
};

/// Frobenius and trace norms of the CD term on a uniform theta grid
/// (endpoints included; both vanish there).
inline std::vector<NormTracePoint> norm_trace(const SpinSector& sec, const AnnealParams& params,
                                              int grid_points = 401) {
    if (grid_points < 3) throw Error("norm_trace: need at least 3 grid points");
    std::vector<NormTracePoint> out(grid_points);
    if (params.cd_order == 0) {
        for (int i = 0; i < grid_points; ++i)
            out[i].theta = static_cast<double>(i) / (grid_points - 1);
        return out;
    }
    CDEvaluator eval(sector_basis(sec, params), params);
    for (int i = 0; i < grid_points; ++i) {
        const double theta = static_cast<double>(i) / (grid_points - 1);
        const Matrix& w = eval.generator(theta);
        out[i].theta = theta;
        out[i].frob = frobenius_norm(w) / params.tau;
        out[i].trace = trace_norm(w) / params.tau;
    }
    return out;
}

/// Energetic cost of CD driving: the time average of ||vdot . A|| =
/// int_0^1 ||W(theta)/tau|| dtheta, by composite Simpson on the grid.
inline double cd_cost(const SpinSector& sec, const AnnealParams& params,
                      NormKind kind = NormKind::Frobenius, int grid_points = 401) {
    if (params.cd_order == 0) return 0.0;
    if (grid_points < 201) grid_points = 201;
    if (grid_points % 2 == 0) ++grid_points;
    CDEvaluator eval(sector_basis(sec, params), params);
    const double h = 1.0 / (grid_points - 1);
    double sum = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const Matrix& w = eval.generator(i * h);
        const double f =
            (kind == NormKind::Frobenius ? frobenius_norm(w) : trace_norm(w)) / params.tau;
        const double weight = (i == 0 || i == grid_points - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        sum += weight * f;
    }
    return sum * h / 3.0;
}

}  // namespace cra
