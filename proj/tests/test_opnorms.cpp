#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "kgr/opnorms.hpp"
#include "test_helpers.hpp"

using namespace kgr;

TEST_CASE("sdecay norm closed forms") {
    Mat I = Mat::Identity(8, 8);
    for (double s : {0.0, 1.0, 2.5}) CHECK(sdecay_norm(I, s) == doctest::Approx(1.0).epsilon(1e-15));

    Mat single = Mat::Zero(8, 8);
    single(1, 0) = 1.0;  // |m-n| = 1
    CHECK(sdecay_norm(single, 2.0) == doctest::Approx(2.0).epsilon(1e-14));

    // triangle inequality on a randomized suite
    std::mt19937_64 eng(11);
    for (int t = 0; t < 20; ++t) {
        Mat A = kgrt::random_decay_matrix(10, 0.6, eng);
        Mat B = kgrt::random_decay_matrix(10, 0.6, eng);
        double s = 2.0 * kgrt::urand(eng);
        CHECK(sdecay_norm(A + B, s) <= sdecay_norm(A, s) + sdecay_norm(B, s) + 1e-12);
    }
}

TEST_CASE("sdecay algebra constant is finite and stable under J-refinement") {
    const double s = 1.0;
    auto measure = [&](int J) {
        std::mt19937_64 eng(123);
        double worst = 0;
        for (int t = 0; t < 30; ++t) {
            Mat A = kgrt::random_decay_matrix(J, 0.55, eng);
            Mat B = kgrt::random_decay_matrix(J, 0.55, eng);
            worst = std::max(worst, sdecay_norm(A * B, s) / (sdecay_norm(A, s) * sdecay_norm(B, s)));
        }
        return worst;
    };
    double c8 = measure(8), c16 = measure(16), c32 = measure(32);
    CHECK(std::isfinite(c32));
    // stability: no blow-up when the truncation is refined
    CHECK(c16 <= 2.0 * c8 + 0.5);
    CHECK(c32 <= 2.0 * c16 + 0.5);
    MESSAGE("measured C_s at J=8/16/32: ", c8, " ", c16, " ", c32);
}

TEST_CASE("operator norm on H^r is dominated by the s-decay norm") {
    const double s = 1.5;
    auto measure = [&](int J) {
        std::mt19937_64 eng(77);
        double worst = 0;
        for (int t = 0; t < 20; ++t) {
            Mat A = kgrt::random_decay_matrix(J, 0.5, eng);
            double r = s * kgrt::urand(eng);
            worst = std::max(worst, hr_operator_norm(A, r) / sdecay_norm(A, s));
        }
        return worst;
    };
    double c8 = measure(8), c24 = measure(24);
    CHECK(std::isfinite(c24));
    CHECK(c24 <= 2.0 * c8 + 0.5);
}

TEST_CASE("analytic norm") {
    SUBCASE("k = 0 only reduces to the s-decay norm") {
        std::mt19937_64 eng(5);
        AngleOperator A(6, 1, 2);
        Mat m = kgrt::random_decay_matrix(6, 0.7, eng);
        A.add_coeff({0}, m);
        CHECK(analytic_norm(A, 0.8, 1.0) == doctest::Approx(sdecay_norm(m, 1.0)).epsilon(1e-14));
    }
    SUBCASE("two identity harmonics at rho = 1, s = 0 give 2e") {
        AngleOperator A(5, 1, 1);
        A.add_coeff({1}, Mat::Identity(5, 5));
        A.add_coeff({-1}, Mat::Identity(5, 5));
        CHECK(analytic_norm(A, 1.0, 0.0) == doctest::Approx(2.0 * M_E).epsilon(1e-14));
    }
}

TEST_CASE("block norm") {
    const int J = 6;
    SUBCASE("zero operator") {
        BlockOperator Z(J, 1, 2);
        NormParams p{1.0, 0.5, 1.0, 0.0, 0.0};
        CHECK(block_norm(Z, p) == 0.0);
    }
    SUBCASE("identity d-block at alpha=1, beta=0, s=0, rho=0: 2<J> + 3") {
        BlockOperator A(J, 1, 2);
        A.d.add_coeff({0}, Mat::Identity(J, J));
        NormParams p{0.0, 0.0, 1.0, 0.0, 0.0};
        double expected = 2.0 * std::sqrt(1.0 + double(J) * J) + 3.0;
        CHECK(block_norm(A, p) == doctest::Approx(expected).epsilon(1e-14));
    }
    SUBCASE("monotonicity in (rho, s, alpha, beta)") {
        std::mt19937_64 eng(42);
        for (int t = 0; t < 10; ++t) {
            BlockOperator A = kgrt::random_symmetric_block(J, 1, 2, eng);
            NormParams hi{1.2, 0.6, 0.9, 0.5, 0.0};
            NormParams lo{0.7, 0.3, 0.4, 0.2, 0.0};
            CHECK(block_norm(A, lo) <= block_norm(A, hi) * (1 + 1e-12));
        }
    }
}

TEST_CASE("lipschitz block norm over finite omega samples") {
    const int J = 4;
    NormParams p{0.0, 0.0, 0.0, 0.0, 1.0};

    std::vector<std::pair<RVec, BlockOperator>> family;
    for (double w : {10.0, 11.5, 13.0}) {
        BlockOperator A(J, 1, 1);
        A.d.add_coeff({0}, w * Mat::Identity(J, J));
        RVec om(1);
        om[0] = w;
        family.emplace_back(om, A);
    }
    // A(omega) = omega_1 I: sup |omega_1| + w * 1 with difference quotient exactly 1
    CHECK(lipschitz_block_norm(family, p) == doctest::Approx(13.0 + 1.0).epsilon(1e-14));

    // constant family: Lipschitz part zero
    std::vector<std::pair<RVec, BlockOperator>> constant = {family[0], family[0]};
    constant[1].first[0] += 1.0;
    constant[1].second = family[0].second;
    CHECK(lipschitz_block_norm(constant, p) == doctest::Approx(10.0).epsilon(1e-14));

    std::vector<std::pair<RVec, BlockOperator>> one = {family[0]};
    CHECK_THROWS(lipschitz_block_norm(one, p));
}

TEST_CASE("commutator_ad") {
    std::mt19937_64 eng(2024);
    const int J = 6;

    SUBCASE("[X, X] = 0") {
        BlockOperator X = kgrt::random_symmetric_block(J, 1, 2, eng);
        BlockOperator Z = commutator_ad(X, X);
        CHECK(Z.max_abs() < 1e-13);
    }

    SUBCASE("diagonal-blocks-only, k = 0: reduces to i[X^d, V^d]") {
        Mat xd = kgrt::random_matrix(2, eng);
        xd = (xd + xd.adjoint()).eval();
        Mat vd = kgrt::random_matrix(2, eng);
        vd = (vd + vd.adjoint()).eval();
        BlockOperator X(2, 1, 1), V(2, 1, 1);
        X.d.add_coeff({0}, xd);
        V.d.add_coeff({0}, vd);
        BlockOperator Z = commutator_ad(X, V);
        Mat expected = Cplx(0, 1) * (xd * vd - vd * xd);
        CHECK((Z.d.coeff({0}) - expected).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(Z.o.max_abs() < 1e-14);
    }

    SUBCASE("blockwise formula matches the assembled 2Jx2J commutator") {
        for (int t = 0; t < 5; ++t) {
            BlockOperator X = kgrt::random_symmetric_block(J, 1, 4, eng, 0.8);
            BlockOperator V = kgrt::random_symmetric_block(J, 1, 4, eng, 0.8);
            // restrict supports so the truncated convolution is exact
            X.d = X.d.low_pass(2); X.o = X.o.low_pass(2);
            V.d = V.d.low_pass(2); V.o = V.o.low_pass(2);
            BlockOperator Z = commutator_ad(X, V);
            RVec th(1);
            th[0] = 2.0 * M_PI * kgrt::urand(eng);
            Mat bX = X.assemble(th), bV = V.assemble(th);
            Mat direct = Cplx(0, 1) * (bX * bV - bV * bX);
            CHECK((Z.assemble(th) - direct).cwiseAbs().maxCoeff() < 1e-12);
        }
    }

    SUBCASE("output symmetry and norm bound") {
        // measured algebra constant for this suite's s
        const double s = 1.0;
        std::mt19937_64 e2(9);
        double Cs = 0;
        for (int t = 0; t < 20; ++t) {
            Mat A = kgrt::random_decay_matrix(J, 0.5, e2);
            Mat B = kgrt::random_decay_matrix(J, 0.5, e2);
            Cs = std::max(Cs, sdecay_norm(A * B, s) / (sdecay_norm(A, s) * sdecay_norm(B, s)));
        }
        for (int t = 0; t < 8; ++t) {
            BlockOperator X = kgrt::random_symmetric_block(J, 1, 3, eng);
            BlockOperator V = kgrt::random_symmetric_block(J, 1, 3, eng);
            X.d = X.d.low_pass(1); X.o = X.o.low_pass(1);
            V.d = V.d.low_pass(1); V.o = V.o.low_pass(1);
            BlockOperator Z = commutator_ad(X, V);
            CHECK(Z.symmetry_defect() <= 1e-12 * std::max(1.0, Z.max_abs()));

            NormParams paa{s, 0.3, 0.7, 0.7, 0.0};
            NormParams pa0{s, 0.3, 0.7, 0.0, 0.0};
            CHECK(block_norm(Z, paa) <=
                  2.0 * Cs * block_norm(X, paa) * block_norm(V, pa0) * (1 + 1e-9));
        }
    }
}

TEST_CASE("lie_conjugate") {
    std::mt19937_64 eng(31337);
    const int J = 5;

    SUBCASE("zero generator leaves V unchanged") {
        BlockOperator X(J, 1, 2);
        BlockOperator V = kgrt::random_symmetric_block(J, 1, 2, eng);
        LieResult r = lie_conjugate(X, V, 6);
        BlockOperator diff = r.value;
        diff -= V;
        CHECK(diff.max_abs() == 0.0);
    }

    SUBCASE("abelian 1x1 scalar case returns V") {
        BlockOperator X(1, 1, 1), V(1, 1, 1);
        Mat x(1, 1), v(1, 1);
        x(0, 0) = 0.3;  // real symmetric 1x1, d-block only, k = 0
        v(0, 0) = 1.7;
        X.d.add_coeff({0}, x);
        V.d.add_coeff({0}, v);
        LieResult r = lie_conjugate(X, V, 8);
        CHECK(std::abs(r.value.d.coeff({0})(0, 0) - Cplx(1.7, 0)) < 1e-14);
    }

    SUBCASE("norm bound e^{2 C_s |X|} |V| on a randomized suite") {
        const double s = 1.0;
        double Cs = 1.5;  // conservative measured constant for this suite
        NormParams paa{s, 0.2, 0.6, 0.6, 0.0};
        NormParams pa0{s, 0.2, 0.6, 0.0, 0.0};
        for (int t = 0; t < 5; ++t) {
            BlockOperator X = kgrt::random_symmetric_block(J, 1, 4, eng, 0.4);
            BlockOperator V = kgrt::random_symmetric_block(J, 1, 4, eng, 0.4);
            X.d = X.d.low_pass(1); X.o = X.o.low_pass(1);
            X *= Cplx(0.1, 0);  // keep the series well inside convergence
            V.d = V.d.low_pass(1); V.o = V.o.low_pass(1);
            LieResult r = lie_conjugate(X, V, 14);
            double bound = std::exp(2.0 * Cs * block_norm(X, paa)) * block_norm(V, pa0);
            CHECK(block_norm(r.value, pa0) <= bound * (1 + 1e-6));
        }
    }

    SUBCASE("unitarity of e^{iX(theta)} improves with the series order") {
        // Hermitian-at-theta generator: coefficients in adjoint pairs
        AngleOperator X(J, 1, 2);
        Mat a = 0.25 * kgrt::random_matrix(J, eng);
        X.add_coeff({1}, a);
        X.add_coeff({-1}, a.adjoint());
        Mat h = 0.25 * kgrt::random_matrix(J, eng);
        X.add_coeff({0}, 0.5 * (h + h.adjoint()).eval());

        RVec th(1);
        th[0] = 1.234;
        Mat xt = X.eval(th);
        CHECK((xt - xt.adjoint()).cwiseAbs().maxCoeff() < 1e-13);

        auto partial_exp = [&](int order) {
            Mat acc = Mat::Identity(J, J);
            Mat term = Mat::Identity(J, J);
            for (int q = 1; q <= order; ++q) {
                term = (term * (Cplx(0, 1) * xt) / double(q)).eval();
                acc += term;
            }
            return acc;
        };
        double prev = 1e300;
        for (int order : {4, 8, 12, 16}) {
            Mat U = partial_exp(order);
            double defect = (U.adjoint() * U - Mat::Identity(J, J)).cwiseAbs().maxCoeff();
            CHECK(defect < prev + 1e-15);
            prev = defect;
        }
        CHECK(prev < 1e-10);
    }
}

TEST_CASE("gauss-legendre nodes integrate monomials exactly") {
    std::vector<double> x, w;
    gauss_legendre_01(6, x, w);
    for (int q = 0; q <= 11; ++q) {
        double acc = 0;
        for (int i = 0; i < 6; ++i) acc += w[i] * std::pow(x[i], q);
        CHECK(acc == doctest::Approx(1.0 / (q + 1)).epsilon(1e-13));
    }
}
