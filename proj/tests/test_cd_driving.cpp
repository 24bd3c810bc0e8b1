#include <catch2/catch_amalgamated.hpp>

#include "cra/cd_driving.hpp"

using namespace cra;

namespace {

Matrix g_operator(const Matrix& h, const Matrix& dh, const Vector& alphas) {
    Matrix g = dh;
    for (int k = 1; k <= alphas.size(); ++k)
        g += alphas[k - 1] * nested_commutator(h, dh, 2 * k);
    return g;
}

AnnealParams params_with(int k, double tau = 1.0) {
    AnnealParams params;
    params.cd_order = k;
    params.tau = tau;
    return params;
}

}  // namespace

TEST_CASE("dh_dtheta vanishes at the boundaries and matches finite differences") {
    const SpinSector sec = build_sector(8, 0.75);
    const AnnealParams params = params_with(0);
    CHECK(dh_dtheta(sec, 0.0, params).norm() == 0.0);
    CHECK(dh_dtheta(sec, 1.0, params).norm() == 0.0);

    const double theta = 0.5, h = 1e-5;
    auto h_at = [&](double t) {
        const ScheduleSample smp = schedule_sample(t, params.q);
        return ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma, params.e0);
    };
    const Matrix fd = (h_at(theta + h) - h_at(theta - h)) / (2.0 * h);
    CHECK((fd - dh_dtheta(sec, theta, params)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("nested commutators") {
    const SpinSector sec = build_sector(4, 0.75);
    const Matrix h = ara_hamiltonian(sec, 0.4, 0.3, 3, 1.0);
    CHECK(nested_commutator(h, h, 1).norm() == 0.0);

    Matrix d1 = Matrix::Zero(3, 3), d2 = Matrix::Zero(3, 3);
    d1.diagonal() << 1, 2, 3;
    d2.diagonal() << 4, 5, 6;
    CHECK(nested_commutator(d1, d2, 1).norm() == 0.0);

    // H = sigma_z, X = sigma_x: L(X) = 2i sigma_y (= [[0,2],[-2,0]] as a real
    // antisymmetric matrix), L^2(X) = 4 sigma_x.
    Matrix sz(2, 2), sx(2, 2);
    sz << 1, 0, 0, -1;
    sx << 0, 1, 1, 0;
    Matrix expected1(2, 2);
    expected1 << 0, 2, -2, 0;
    CHECK((nested_commutator(sz, sx, 1) - expected1).norm() < 1e-14);
    CHECK((nested_commutator(sz, sx, 2) - 4.0 * sx).norm() < 1e-14);
    CHECK_THROWS_AS(nested_commutator(sz, sx, 0), Error);
}

TEST_CASE("variational coefficients: trivial and two-level cases") {
    const SpinSector sec = build_sector(6, 0.5);
    const Matrix h = ara_hamiltonian(sec, 0.5, 0.5, 3, 1.0);
    const VariationalResult zero = variational_coefficients(h, Matrix::Zero(sec.dim, sec.dim), 2);
    CHECK(zero.alphas.norm() == 0.0);

    // d = 2: the K = 1 ansatz spans the full antisymmetric space, so the
    // variational residual equals the exact-gauge residual.
    const SpinSector tiny = build_sector(1, 1.0);
    const AnnealParams params = params_with(1);
    const Matrix h2 = ara_hamiltonian(tiny, 0.6, 0.4, 3, 1.0);
    const Matrix dh2 = dh_dtheta(tiny, 0.4, params);
    const VariationalResult var = variational_coefficients(h2, dh2, 1);
    CHECK_FALSE(var.degenerate);
    const double g_var = g_operator(h2, dh2, var.alphas).norm();
    const Matrix w_exact = exact_gauge_potential(h2, dh2);
    const double g_exact = (dh2 - commutator(w_exact, h2)).norm();
    CHECK(std::abs(g_var - g_exact) < 1e-10);
}

TEST_CASE("variational residual is nonincreasing in K and above the exact bound") {
    const SpinSector sec = build_sector(6, 0.5);
    const double theta = 0.43;
    const AnnealParams params = params_with(0);
    const ScheduleSample smp = schedule_sample(theta, params.q);
    const Matrix h = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
    const Matrix dh = dh_dtheta(sec, theta, params);

    const Matrix w_exact = exact_gauge_potential(h, dh);
    const double g_exact = (dh - commutator(w_exact, h)).norm();
    double prev = dh.norm(); // K = 0: no correction at all
    for (int k = 1; k <= 3; ++k) {
        const VariationalResult var = variational_coefficients(h, dh, k);
        const double g = g_operator(h, dh, var.alphas).norm();
        CHECK(g <= prev * (1.0 + 1e-12));
        CHECK(g >= g_exact * (1.0 - 1e-12));
        prev = g;
    }
}

TEST_CASE("normal-equation orthogonality at the optimum") {
    const SpinSector sec = build_sector(8, 0.75);
    const double theta = 0.37;
    const AnnealParams params = params_with(3);
    const ScheduleSample smp = schedule_sample(theta, params.q);
    const Matrix h = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
    const Matrix dh = dh_dtheta(sec, theta, params);
    const VariationalResult var = variational_coefficients(h, dh, 3);
    const Matrix g = g_operator(h, dh, var.alphas);
    for (int k = 1; k <= 3; ++k) {
        const Matrix basis_k = nested_commutator(h, dh, 2 * k);
        const double dot = g.cwiseProduct(basis_k).sum();
        CHECK(std::abs(dot) < 1e-8 * g.norm() * basis_k.norm());
    }
}

TEST_CASE("gram matrix is symmetric positive semidefinite") {
    const SpinSector sec = build_sector(6, 0.5);
    const AnnealParams params = params_with(3);
    const ScheduleSample smp = schedule_sample(0.61, params.q);
    const Matrix h = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
    const Matrix dh = dh_dtheta(sec, 0.61, params);
    const double omega = h.cwiseAbs().rowwise().sum().maxCoeff();
    Matrix gram(3, 3);
    for (int k = 1; k <= 3; ++k)
        for (int l = 1; l <= 3; ++l)
            gram(k - 1, l - 1) = nested_commutator(h, dh, 2 * k)
                                     .cwiseProduct(nested_commutator(h, dh, 2 * l))
                                     .sum() /
                                 std::pow(omega, 2.0 * (k + l));
    CHECK((gram - gram.transpose()).norm() < 1e-12 * gram.norm());
    const Vector ev = eigenvalues_only(gram);
    CHECK(ev.minCoeff() >= -1e-10 * gram.norm());
}

TEST_CASE("odd nested commutators are antisymmetric") {
    const SpinSector sec = build_sector(6, 0.5);
    const AnnealParams params = params_with(0);
    const ScheduleSample smp = schedule_sample(0.3, params.q);
    const Matrix h = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
    const Matrix dh = dh_dtheta(sec, 0.3, params);
    for (const int m : {1, 3, 5}) {
        const Matrix l = nested_commutator(h, dh, m);
        CHECK((l + l.transpose()).norm() < 1e-12 * l.norm());
    }
    for (const int m : {2, 4, 6}) {
        const Matrix l = nested_commutator(h, dh, m);
        CHECK((l - l.transpose()).norm() < 1e-12 * l.norm());
    }
}

TEST_CASE("exact gauge potential") {
    // commuting dH: A = 0
    Matrix h = Matrix::Zero(3, 3), dh = Matrix::Zero(3, 3);
    h.diagonal() << 1, 2, 4;
    dh.diagonal() << 5, 6, 7;
    CHECK(exact_gauge_potential(h, dh).norm() == 0.0);

    // defining equation [dH + i[A, H], H] = 0 on a sector Hamiltonian
    const SpinSector sec = build_sector(6, 0.5);
    const AnnealParams params = params_with(0);
    const ScheduleSample smp = schedule_sample(0.52, params.q);
    const Matrix hs = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
    const Matrix dhs = dh_dtheta(sec, 0.52, params);
    const Matrix w = exact_gauge_potential(hs, dhs);
    const Matrix g = dhs - commutator(w, hs);
    CHECK(commutator(g, hs).norm() < 1e-8);
    CHECK((w + w.transpose()).norm() < 1e-10 * w.norm());

    // degenerate spectrum is rejected
    Matrix h_deg = Matrix::Identity(3, 3);
    Matrix couple = Matrix::Zero(3, 3);
    couple(0, 1) = couple(1, 0) = 1.0;
    CHECK_THROWS_AS(exact_gauge_potential(h_deg, couple), DegenerateSpectrum);
}

TEST_CASE("cd_term boundary zeros, scaling, antisymmetry") {
    const SpinSector sec = build_sector(6, 0.5);
    const AnnealParams params = params_with(2);
    CHECK(cd_term(sec, 0.0, params).norm() == 0.0);
    CHECK(cd_term(sec, 1.0, params).norm() == 0.0);

    const Matrix w1 = cd_term(sec, 0.44, params);
    AnnealParams doubled = params;
    doubled.tau = 2.0;
    const Matrix w2 = cd_term(sec, 0.44, doubled);
    CHECK((w1 - 2.0 * w2).cwiseAbs().maxCoeff() < 1e-12 * w1.cwiseAbs().maxCoeff());

    // the generator is exactly antisymmetric, i.e. i W is Hermitian
    CHECK((w1 + w1.transpose()).cwiseAbs().maxCoeff() < 1e-12 * w1.cwiseAbs().maxCoeff());

    // uniform 1/tau suppression
    AnnealParams huge = params;
    huge.tau = 1e6;
    const Matrix w3 = cd_term(sec, 0.44, huge);
    CHECK(w3.cwiseAbs().maxCoeff() <= 1.0000001e-6 * w1.cwiseAbs().maxCoeff());
}

TEST_CASE("structured evaluator agrees with the dense route") {
    const SpinSector sec = build_sector(5, 0.6);
    for (const int k : {1, 2, 3}) {
        AnnealParams params = params_with(k);
        params.gamma = 1.3;
        const double theta = 0.37;
        CDEvaluator eval(sector_basis(sec, params), params);
        const Vector alphas = eval.alphas(theta);
        const Matrix w_fast = eval.generator(theta);

        const ScheduleSample smp = schedule_sample(theta, params.q);
        const Matrix h = ara_hamiltonian(sec, smp.lambda, smp.s, params.p, params.gamma);
        const Matrix dh = dh_dtheta(sec, theta, params);
        const VariationalResult var = variational_coefficients(h, dh, k);
        CHECK((alphas - var.alphas).norm() < 1e-9 * (1.0 + var.alphas.norm()));

        Matrix w_dense = Matrix::Zero(sec.dim, sec.dim);
        for (int a = 1; a <= k; ++a)
            w_dense += var.alphas[a - 1] * nested_commutator(h, dh, 2 * a - 1);
        CHECK((w_fast - w_dense).norm() < 1e-9 * (1.0 + w_dense.norm()));

        // g_residual matches the dense G operator norm
        const double g_fast = eval.g_residual(theta, alphas);
        const double g_dense = g_operator(h, dh, var.alphas).norm();
        CHECK(g_fast == Catch::Approx(g_dense).epsilon(1e-9));
    }
}

TEST_CASE("component-fitted coefficients") {
    const SpinSector sec = build_sector(6, 0.5);
    AnnealParams params = params_with(2);
    params.variational = VariationalMode::Components;
    CDEvaluator eval(sector_basis(sec, params), params);
    const Vector alphas = eval.alphas(0.5);
    CHECK(alphas.size() == 2);
    CHECK(std::isfinite(alphas[0]));
    CHECK(std::isfinite(alphas[1]));
    CHECK(eval.generator(0.5).norm() > 0.0);

    // For QA the gradient has a single component, so both fits coincide.
    const SpinSector ladder = build_sector(6, 1.0);
    AnnealParams qa_path = params_with(2);
    qa_path.protocol = Protocol::QA;
    AnnealParams qa_comp = qa_path;
    qa_comp.variational = VariationalMode::Components;
    CDEvaluator ev_path(sector_basis(ladder, qa_path), qa_path);
    CDEvaluator ev_comp(sector_basis(ladder, qa_comp), qa_comp);
    const Vector a_path = ev_path.alphas(0.31);
    const Vector a_comp = ev_comp.alphas(0.31);
    CHECK((a_path - a_comp).norm() < 1e-9 * (1.0 + a_path.norm()));
}

TEST_CASE("norm trace endpoints and cost") {
    const SpinSector sec = build_sector(6, 0.5);
    const AnnealParams params = params_with(1);
    const auto trace = norm_trace(sec, params, 51);
    CHECK(trace.front().frob == 0.0);
    CHECK(trace.front().trace == 0.0);
    CHECK(trace.back().frob == 0.0);
    CHECK(trace.back().trace == 0.0);
    for (const auto& pt : trace) {
        CHECK(pt.frob >= 0.0);
        CHECK(pt.trace >= pt.frob - 1e-12); // trace norm dominates Frobenius
    }

    CHECK(cd_cost(sec, params_with(0)) == 0.0);
    const double cost1 = cd_cost(sec, params, NormKind::Frobenius, 201);
    CHECK(cost1 > 0.0);
    AnnealParams doubled = params;
    doubled.tau = 2.0;
    CHECK(cd_cost(sec, doubled, NormKind::Frobenius, 201) == Catch::Approx(0.5 * cost1));
    const double cost_tr = cd_cost(sec, params, NormKind::Trace, 201);
    CHECK(cost_tr >= cost1);
}
