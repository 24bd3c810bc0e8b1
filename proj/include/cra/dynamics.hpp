#pragma once

#include <chrono>
#include <cmath>
#include <memory>
#include <optional>

#include "cra/cd_driving.hpp"
#include "cra/full_space.hpp"
#include "cra/operators.hpp"

namespace cra {

/// P_GS below this is reported as computed but flagged: double precision
/// cannot be trusted further down, and scaling fits must exclude such points.
constexpr double kTrustFloor = 1e-25;

/// Frobenius norms of the CD generator W(theta) on a fixed theta grid,
/// reusable across runs of the same sector and K (W does not depend on tau).
/// Feeds the step-density estimate of the integrator.
struct StiffnessProfile {
    std::vector<double> thetas;
    std::vector<double> w_frob;
};

struct EvolveOptions {
    int initial_steps = 0;      // 0 = choose from the generator magnitude
    long max_steps = 1L << 22;  // step budget; NonConverged beyond
    double p_abs_tol = 1e-9;    // |P(2n) - P(n)| acceptance
    double amp_abs_tol = 1e-11; // overlap-magnitude acceptance (floor)
    double amp_rel_tol = 1e-6;  // overlap-magnitude acceptance (relative)
    double drift_tol = 1e-8;    // max |norm - 1| along the accepted run
    const StiffnessProfile* stiffness = nullptr; // precomputed CD-norm profile
};

struct RunResult {
    AnnealParams params;
    int n = 0;
    double c = 1.0;
    double p_gs = 0.0;
    double norm_drift = 0.0;
    long steps = 0;
    ComplexVector final_state;
    bool below_trust_floor = false;
    bool degenerate_cd = false;
    double wall_seconds = 0.0;
};

namespace detail {

/// Evolution generator along the path: dpsi/dtheta = (-i tau H(theta) +
/// W(theta)) psi, evaluated on the real and imaginary parts separately
/// (H and W are real, H symmetric, W antisymmetric):
///   dx = tau H y + W x,   dy = -tau H x + W y.
class PathGenerator {
  public:
    PathGenerator(const OperatorBasis& basis, const AnnealParams& params,
                  CDEvaluator* own_cd, CDEvaluator* alpha_source)
        : basis_(basis), params_(params), cd_(own_cd), alpha_source_(alpha_source) {
        Vector row_sums = Vector::Zero(basis_.dim);
        for (int col = 0; col < basis_.vtf.outerSize(); ++col)
            for (SparseMatrix::InnerIterator it(basis_.vtf, col); it; ++it)
                row_sums[it.row()] += std::abs(it.value());
        vtf_row_norm_ = basis_.dim > 0 ? row_sums.maxCoeff() : 0.0;
    }

    void prepare(double theta) {
        if (have_theta_ && theta == theta_) return;
        have_theta_ = true;
        theta_ = theta;
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        const TermCoeffs hc = h_coeffs(params_.protocol, smp.lambda, smp.s);
        hv_ = hc.v;
        hd_ = hc.h0 * basis_.h0 + hc.hp * basis_.hp;
        if (cd_ != nullptr) {
            if (alpha_source_ != nullptr) {
                w_ = &cd_->generator_with(theta, alpha_source_->alphas(theta));
                degenerate_ |= alpha_source_->last_degenerate();
            } else {
                w_ = &cd_->generator(theta);
                degenerate_ |= cd_->last_degenerate();
            }
        }
    }

    void apply(const Vector& x, const Vector& y, Vector& dx, Vector& dy) const {
        const double tau = params_.tau;
        dx.noalias() = tau * hv_ * (basis_.vtf * y);
        dx += tau * hd_.cwiseProduct(y);
        dy.noalias() = -tau * hv_ * (basis_.vtf * x);
        dy -= tau * hd_.cwiseProduct(x);
        if (w_ != nullptr) {
            dx.noalias() += (*w_) * x;
            dy.noalias() += (*w_) * y;
        }
    }

    double h_magnitude(double theta) const {
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        const TermCoeffs hc = h_coeffs(params_.protocol, smp.lambda, smp.s);
        return std::abs(hc.v) * vtf_row_norm_ +
               (hc.h0 * basis_.h0 + hc.hp * basis_.hp).cwiseAbs().maxCoeff();
    }

    double cd_magnitude(double theta) {
        if (cd_ == nullptr) return 0.0;
        prepare(theta);
        return w_->norm();
    }

    bool any_degenerate() const { return degenerate_; }
    void reset_flags() { degenerate_ = false; }

  private:
    const OperatorBasis& basis_;
    const AnnealParams& params_;
    CDEvaluator* cd_;
    CDEvaluator* alpha_source_;
    double vtf_row_norm_ = 0.0;
    bool have_theta_ = false;
    double theta_ = -1.0;
    double hv_ = 0.0;
    Vector hd_;
    const Matrix* w_ = nullptr;
    bool degenerate_ = false;
};

struct PassResult {
    Vector x, y;
    double max_drift = 0.0;
};

/// One RK4 pass over the given theta knots (nonuniform steps). The generator
/// is evaluated twice per step: at the midpoint (shared by the two middle
/// stages) and at the right endpoint (memoised into the next step's start).
template <class Generator>
PassResult rk4_pass(Generator& gen, const Vector& x0, const Vector& y0,
                    const std::vector<double>& thetas) {
    const auto d = x0.size();
    PassResult out{x0, y0, 0.0};
    Vector k1x(d), k1y(d), k2x(d), k2y(d), k3x(d), k3y(d), k4x(d), k4y(d);
    Vector tx(d), ty(d);
    const size_t steps = thetas.size() - 1;
    for (size_t i = 0; i < steps; ++i) {
        const double t0 = thetas[i];
        const double t1 = thetas[i + 1];
        const double h = t1 - t0;
        const double tm = 0.5 * (t0 + t1);
        gen.prepare(t0);
        gen.apply(out.x, out.y, k1x, k1y);
        tx = out.x + 0.5 * h * k1x;
        ty = out.y + 0.5 * h * k1y;
        gen.prepare(tm);
        gen.apply(tx, ty, k2x, k2y);
        tx = out.x + 0.5 * h * k2x;
        ty = out.y + 0.5 * h * k2y;
        gen.apply(tx, ty, k3x, k3y);
        tx = out.x + h * k3x;
        ty = out.y + h * k3y;
        gen.prepare(t1);
        gen.apply(tx, ty, k4x, k4y);
        out.x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        out.y += (h / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        const double norm = std::sqrt(out.x.squaredNorm() + out.y.squaredNorm());
        out.max_drift = std::max(out.max_drift, std::abs(norm - 1.0));
    }
    return out;
}

/// Step-density profile: steps are spent where the evolution generator is
/// large (tau ||H|| plus the CD-generator norm, which peaks sharply near the
/// minimum gap), so stiff runs do not force a fine step everywhere.
class StepDensity {
  public:
    template <class Generator>
    StepDensity(Generator& gen, double tau, const StiffnessProfile* profile, int knots) {
        if (profile != nullptr && profile->thetas.size() >= 2) {
            thetas_ = profile->thetas;
            density_.resize(thetas_.size());
            for (size_t k = 0; k < thetas_.size(); ++k)
                density_[k] = tau * gen.h_magnitude(thetas_[k]) + profile->w_frob[k];
        } else {
            thetas_.resize(knots);
            density_.resize(knots);
            for (int k = 0; k < knots; ++k) {
                const double theta = static_cast<double>(k) / (knots - 1);
                thetas_[k] = theta;
                density_[k] = tau * gen.h_magnitude(theta) + gen.cd_magnitude(theta);
            }
        }
        cum_.resize(thetas_.size());
        cum_[0] = 0.0;
        for (size_t k = 1; k < thetas_.size(); ++k) {
            const double m = 0.5 * (density_[k - 1] + density_[k]) + 1e-12;
            cum_[k] = cum_[k - 1] + m * (thetas_[k] - thetas_[k - 1]);
        }
    }

    double total() const { return cum_.back(); }

    /// Knots of an n-step grid, equidistributed in the cumulative density.
    std::vector<double> grid(long n) const {
        std::vector<double> out(n + 1);
        out[0] = 0.0;
        out[n] = 1.0;
        size_t seg = 0;
        for (long i = 1; i < n; ++i) {
            const double target = total() * static_cast<double>(i) / static_cast<double>(n);
            while (seg + 2 < cum_.size() && cum_[seg + 1] < target) ++seg;
            const double span = cum_[seg + 1] - cum_[seg];
            const double frac = span > 0.0 ? (target - cum_[seg]) / span : 0.0;
            out[i] = thetas_[seg] + frac * (thetas_[seg + 1] - thetas_[seg]);
        }
        return out;
    }

  private:
    std::vector<double> thetas_;
    std::vector<double> density_;
    std::vector<double> cum_;
};

inline long pow2_at_least(double x) {
    long n = 64;
    while (n < x && n < (1L << 20)) n *= 2;
    return n;
}

/// Step doubling until the ground-state fidelity stabilises: |P(2n) - P(n)|
/// within p_abs_tol and the overlap magnitude within its own tolerances,
/// with the norm drift bounded. Throws NonConverged past the step budget.
template <class Generator>
RunResult run_with_step_doubling(Generator& gen, const Vector& x0, const Vector& y0,
                                 int target_index, const AnnealParams& params, int n_spins,
                                 double c, const EvolveOptions& opts) {
    const auto t_start = std::chrono::steady_clock::now();
    const StepDensity density(gen, params.tau, opts.stiffness, 257);
    long n = opts.initial_steps > 0 ? opts.initial_steps
                                    : pow2_at_least(8.0 * density.total());
    std::optional<double> prev_amp;
    std::optional<double> prev_p;
    for (;; n *= 2) {
        if (n > opts.max_steps)
            throw NonConverged("evolve: fidelity did not stabilise within the step budget");
        gen.reset_flags();
        PassResult pass = rk4_pass(gen, x0, y0, density.grid(n));
        const double norm = std::sqrt(pass.x.squaredNorm() + pass.y.squaredNorm());
        const double amp = std::hypot(pass.x[target_index], pass.y[target_index]) / norm;
        const double p = std::min(amp * amp, 1.0);
        if (prev_amp && std::abs(p - *prev_p) <= opts.p_abs_tol &&
            std::abs(amp - *prev_amp) <= opts.amp_abs_tol + opts.amp_rel_tol * amp &&
            pass.max_drift <= opts.drift_tol) {
            RunResult res;
            res.params = params;
            res.n = n_spins;
            res.c = c;
            res.p_gs = p;
            res.norm_drift = pass.max_drift;
            res.steps = n;
            res.final_state.resize(pass.x.size());
            res.final_state.real() = pass.x;
            res.final_state.imag() = pass.y;
            res.below_trust_floor = p < kTrustFloor;
            res.degenerate_cd = gen.any_degenerate();
            res.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
            return res;
        }
        prev_amp = amp;
        prev_p = p;
    }
}

}  // namespace detail

/// Propagates i dpsi/dtheta = tau [H(theta) + cd_term(theta)] psi from theta
/// = 0 to 1 in the symmetry-reduced sector and returns P_GS = |<psi_P|psi(1)>|^2.
/// The sector must be the single maximal ladder (c = 1) for QA runs.
inline RunResult evolve(const SpinSector& sec, const AnnealParams& params,
                        const EvolveOptions& opts = {}) {
    params.validate();
    if (params.protocol == Protocol::QA && sec.n_dn != 0)
        throw Error("evolve: QA runs use the single maximal ladder (c = 1)");
    const OperatorBasis basis = sector_basis(sec, params);
    std::unique_ptr<CDEvaluator> cd;
    if (params.cd_order > 0) cd = std::make_unique<CDEvaluator>(basis, params);
    detail::PathGenerator gen(basis, params, cd.get(), nullptr);

    Vector x0 = Vector::Zero(sec.dim), y0 = Vector::Zero(sec.dim);
    if (params.protocol == Protocol::QA) {
        const ComplexVector psi = qa_initial_state(sec.n_total);
        x0 = psi.real();
    } else {
        x0[sec.initial_index()] = 1.0;
    }
    return detail::run_with_step_doubling(gen, x0, y0, sec.target_index(), params, sec.n_total,
                                          sec.fraction_c(), opts);
}

/// Brute-force oracle: identical propagation in the full 2^N space built
/// from explicit Pauli products. CD coefficients are taken from the reduced
/// sector (where the protocol defines them); the full-space nested
/// commutators are built independently. N <= 8.
inline RunResult evolve_full_space(int n, double c, const AnnealParams& params,
                                   const EvolveOptions& opts = {}) {
    params.validate();
    if (n > 8) throw DimensionTooLarge("evolve_full_space: N must be <= 8");
    const SpinSector sec = build_sector(n, c);
    const FullSpace full = full_space(n, sec.n_up, params);

    std::unique_ptr<CDEvaluator> cd, alpha_source;
    if (params.cd_order > 0) {
        cd = std::make_unique<CDEvaluator>(full.basis, params);
        alpha_source = std::make_unique<CDEvaluator>(sector_basis(sec, params), params);
    }
    detail::PathGenerator gen(full.basis, params, cd.get(), alpha_source.get());

    Vector x0 = Vector::Zero(full.basis.dim), y0 = Vector::Zero(full.basis.dim);
    if (params.protocol == Protocol::QA) {
        x0.setConstant(std::pow(2.0, -0.5 * n));
    } else {
        x0[full.initial_index] = 1.0;
    }
    return detail::run_with_step_doubling(gen, x0, y0, full.target_index, params, n, c, opts);
}

/// Long-time regression anchor: a K = 0 run whose fidelity must approach 1
/// when tau satisfies the adiabatic condition for the sector's minimum gap.
inline RunResult adiabatic_check(const SpinSector& sec, AnnealParams params,
                                 const EvolveOptions& opts = {}) {
    params.cd_order = 0;
    return evolve(sec, params, opts);
}

namespace detail {

/// Generator with the exact spectral gauge potential instead of the
/// nested-commutator expansion (validation oracle; costs one dense
/// eigendecomposition per evaluation point).
class ExactGaugeGenerator {
  public:
    ExactGaugeGenerator(const OperatorBasis& basis, const AnnealParams& params)
        : basis_(basis), params_(params) {}

    void prepare(double theta) {
        if (have_theta_ && theta == theta_) return;
        have_theta_ = true;
        theta_ = theta;
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        const TermCoeffs hc = h_coeffs(params_.protocol, smp.lambda, smp.s);
        const TermCoeffs dc =
            dh_coeffs(params_.protocol, smp.lambda, smp.s, smp.lambda_dot, smp.s_dot);
        hv_ = hc.v;
        hd_ = hc.h0 * basis_.h0 + hc.hp * basis_.hp;
        if (dc.v == 0.0 && dc.h0 == 0.0 && dc.hp == 0.0) {
            w_.setZero(basis_.dim, basis_.dim);
            return;
        }
        Matrix h = assemble_dense(basis_, hc);
        Matrix dh = assemble_dense(basis_, dc);
        w_ = guarded_gauge(h, dh);
    }

    void apply(const Vector& x, const Vector& y, Vector& dx, Vector& dy) const {
        const double tau = params_.tau;
        dx.noalias() = tau * hv_ * (basis_.vtf * y);
        dx += tau * hd_.cwiseProduct(y);
        dy.noalias() = -tau * hv_ * (basis_.vtf * x);
        dy -= tau * hd_.cwiseProduct(x);
        dx.noalias() += w_ * x;
        dy.noalias() += w_ * y;
    }

    double h_magnitude(double theta) const {
        const ScheduleSample smp = schedule_sample(theta, params_.q);
        const TermCoeffs hc = h_coeffs(params_.protocol, smp.lambda, smp.s);
        double row = 0.0;
        for (int col = 0; col < basis_.vtf.outerSize(); ++col) {
            double sum = 0.0;
            for (SparseMatrix::InnerIterator it(basis_.vtf, col); it; ++it)
                sum += std::abs(it.value());
            row = std::max(row, sum);
        }
        return std::abs(hc.v) * row +
               (hc.h0 * basis_.h0 + hc.hp * basis_.hp).cwiseAbs().maxCoeff();
    }

    double cd_magnitude(double theta) {
        prepare(theta);
        return w_.norm();
    }

    bool any_degenerate() const { return false; }
    void reset_flags() {}

  private:
    // Near the endpoints the bias and p-spin spectra carry exact excited-state
    // degeneracies that split only slowly along the path. Pairs closer than
    // the cutoff are dropped from the gauge: they live inside excited
    // clusters (the ground level stays isolated on these sectors), so they do
    // not affect ground-state transport, while dividing by a near-zero
    // spacing would only amplify eigensolver noise.
    Matrix guarded_gauge(const Matrix& h, const Matrix& dh) const {
        const EigResult eig = eig_symmetric(h);
        const int d = static_cast<int>(h.rows());
        const Matrix d_eig = eig.vectors.transpose() * dh * eig.vectors;
        Matrix w_eig = Matrix::Zero(d, d);
        for (int m = 0; m < d; ++m) {
            for (int n = 0; n < d; ++n) {
                if (m == n) continue;
                const double de = eig.values[n] - eig.values[m];
                if (std::abs(de) <= 1e-8) continue;
                w_eig(m, n) = d_eig(m, n) / de;
            }
        }
        return eig.vectors * w_eig * eig.vectors.transpose();
    }

    const OperatorBasis& basis_;
    const AnnealParams& params_;
    bool have_theta_ = false;
    double theta_ = -1.0;
    double hv_ = 0.0;
    Vector hd_;
    Matrix w_;
};

}  // namespace detail

/// Oracle run driven by the exact adiabatic gauge potential: reproduces
/// adiabatic transport at any tau, so P_GS must reach 1 up to integrator
/// error.
inline RunResult evolve_with_exact_gauge(const SpinSector& sec, const AnnealParams& params,
                                         const EvolveOptions& opts = {}) {
    params.validate();
    if (params.protocol == Protocol::QA && sec.n_dn != 0)
        throw Error("evolve_with_exact_gauge: QA runs use the single maximal ladder");
    const OperatorBasis basis = sector_basis(sec, params);
    detail::ExactGaugeGenerator gen(basis, params);
    Vector x0 = Vector::Zero(sec.dim), y0 = Vector::Zero(sec.dim);
    if (params.protocol == Protocol::QA) {
        x0 = qa_initial_state(sec.n_total).real();
    } else {
        x0[sec.initial_index()] = 1.0;
    }
    return detail::run_with_step_doubling(gen, x0, y0, sec.target_index(), params, sec.n_total,
                                          sec.fraction_c(), opts);
}

}  // namespace cra
