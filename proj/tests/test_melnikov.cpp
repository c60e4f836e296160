#include <doctest.h>

#include "kgr/melnikov.hpp"
#include "kgr/spectral.hpp"
#include "test_helpers.hpp"

using namespace kgr;

namespace {

ModelConfig mel_config(int nu) {
    ModelConfig cfg;
    cfg.nu = nu;
    cfg.mass = 1.0;
    cfg.M = 100.0;
    cfg.J = 12;
    cfg.K = 3;
    cfg.alpha = 0.5;
    cfg.gamma0 = 0.5;
    cfg.tau0 = nu;  // > nu - 1
    cfg.gammaTilde = 0.1;
    cfg.tauTilde = 2.0 * nu + 3.0;
    cfg.gammaKam = 0.04;
    cfg.tauKam = nu + 1.0 + cfg.alpha + cfg.tauTilde / cfg.alpha + 1.0;
    return cfg;
}

// Dense polar-grid oracle for the nu=2 excluded fraction of Omega_0.
double grid_excluded_fraction(const ModelConfig& cfg, int nr = 200, int na = 720) {
    long excluded = 0, total = 0;
    for (int ir = 0; ir < nr; ++ir) {
        double r = cfg.M * (1.0 + (ir + 0.5) / nr);
        for (int ia = 0; ia < na; ++ia) {
            double phi = 2.0 * M_PI * (ia + 0.5) / na;
            RVec w(2);
            w[0] = r * std::cos(phi);
            w[1] = r * std::sin(phi);
            // weight by r for the polar area element
            total += std::lround(r / cfg.M * 1000);
            if (!in_omega0(w, cfg).member) excluded += std::lround(r / cfg.M * 1000);
        }
    }
    return double(excluded) / double(total);
}

}  // namespace

TEST_CASE("in_omega0") {
    SUBCASE("one frequency is never resonant for gamma0 <= 1") {
        ModelConfig cfg = mel_config(1);
        cfg.gamma0 = 1.0;
        for (double w : {100.0, 117.3, 151.9, 199.99}) {
            MelnikovVerdict v = in_omega0(RVec::Constant(1, w), cfg);
            CHECK(v.member);
            CHECK(v.worstTriple.margin >= 0);
        }
    }
    SUBCASE("exact resonance is rejected") {
        ModelConfig cfg = mel_config(2);
        RVec w(2);
        w[0] = cfg.M;
        w[1] = cfg.M;  // k = (1,-1) gives omega.k = 0
        MelnikovVerdict v = in_omega0(w, cfg);
        CHECK(!v.member);
        CHECK(v.worstTriple.margin < 0);
    }
    SUBCASE("Monte-Carlo fraction matches a dense-grid oracle") {
        ModelConfig cfg = mel_config(2);
        cfg.gamma0 = 0.1;
        cfg.tau0 = 2.0;
        double oracle = grid_excluded_fraction(cfg);
        FrequencySampler sampler{2, cfg.M, 2718, 20000};
        MeasureEstimate est =
            estimate_measure([&](const RVec& w) { return in_omega0(w, cfg).member; }, sampler);
        CHECK(std::abs(est.fraction - oracle) < 0.01);
        MESSAGE("grid ", oracle, " vs MC ", est.fraction);
    }
}

TEST_CASE("in_U_alpha") {
    SUBCASE("single passing constraint arithmetic") {
        // nu=1, omega=10.5, m=0, alpha=0.5, triple (k=1, j=1, l=2, minus):
        // |10.5 + 1 - 2| = 9.5 clears any admissible threshold
        ModelConfig cfg = mel_config(1);
        cfg.mass = 0.0;
        cfg.M = 10.0;
        cfg.alpha = 0.5;
        cfg.J = 4;
        RVec lam = eigenvalues_B(cfg.mass, cfg.J);
        RVec w = RVec::Constant(1, 10.5);
        MelnikovVerdict v = in_U_alpha_brute(w, lam, cfg);
        CHECK(v.member);
        // and the margin of that specific triple:
        double thr = cfg.gammaTilde / std::pow(jbracket(1.0), cfg.tauTilde) *
                     std::pow(jbracket(1.0), cfg.alpha) / std::pow(cfg.M, cfg.alpha);
        CHECK(9.5 - thr > 0);
    }

    SUBCASE("(0,a,a) is excluded from the minus branch") {
        // if (0,a,a) were tested its denominator would be exactly zero
        ModelConfig cfg = mel_config(1);
        RVec lam = eigenvalues_B(cfg.mass, cfg.J);
        RVec w = RVec::Constant(1, 133.7);
        MelnikovVerdict v = in_U_alpha_brute(w, lam, cfg);
        CHECK(v.member);
    }

    SUBCASE("filtered and brute verdicts agree on sampled frequencies") {
        for (int nu : {1, 2}) {
            ModelConfig cfg = mel_config(nu);
            RVec lam = eigenvalues_B(cfg.mass, cfg.J);
            FrequencySampler sampler{nu, cfg.M, 99, 100};
            int members = 0;
            for (const RVec& w : sampler.sample()) {
                MelnikovVerdict a = in_U_alpha(w, lam, cfg);
                MelnikovVerdict b = in_U_alpha_brute(w, lam, cfg);
                CHECK(a.member == b.member);
                members += a.member;
            }
            MESSAGE("nu=", nu, ": ", members, "/100 members");
        }
    }

    SUBCASE("shrinking gammaTilde never removes members") {
        ModelConfig cfg = mel_config(2);
        RVec lam = eigenvalues_B(cfg.mass, cfg.J);
        FrequencySampler sampler{2, cfg.M, 4242, 60};
        for (const RVec& w : sampler.sample()) {
            ModelConfig small = cfg;
            small.gammaTilde *= 0.25;
            bool big = in_U_alpha(w, lam, cfg).member;
            bool little = in_U_alpha(w, lam, small).member;
            if (big) CHECK(little);
        }
    }

    SUBCASE("excluded fraction grows with gammaTilde") {
        ModelConfig cfg = mel_config(2);
        RVec lam = eigenvalues_B(cfg.mass, cfg.J);
        double prev = -1;
        for (double g : {0.02, 0.08, 0.32}) {
            ModelConfig c = cfg;
            c.gammaTilde = g;
            FrequencySampler sampler{2, c.M, 5150, 4000};
            MeasureEstimate est = estimate_measure(
                [&](const RVec& w) {
                    return in_omega0(w, c).member && in_U_alpha(w, lam, c).member;
                },
                sampler);
            CHECK(est.fraction >= prev);
            prev = est.fraction;
        }
    }
}

TEST_CASE("in_step_set") {
    ModelConfig cfg = mel_config(1);
    RVec lam = eigenvalues_B(cfg.mass, cfg.J);

    SUBCASE("membership is monotone in N for fixed omega") {
        FrequencySampler sampler{1, cfg.M, 808, 40};
        for (const RVec& w : sampler.sample()) {
            bool small = in_step_set(w, lam, 5, cfg).member;
            bool large = in_step_set(w, lam, 20, cfg).member;
            // fewer constraints and a larger threshold denominator at larger N:
            // N=5 failing while N=20 passes is possible, the reverse is not
            if (large) {
                // all constraints of the N=5 set are also tested at N=20 with a
                // smaller threshold, so this direction must hold
                CHECK(small);
            }
        }
    }

    SUBCASE("implied by U_alpha membership when gamma <= gammaTilde, tau >= tauTilde") {
        // compare margins over the shared |k| <= K range
        FrequencySampler sampler{1, cfg.M, 313, 50};
        for (const RVec& w : sampler.sample()) {
            if (!in_U_alpha(w, lam, cfg).member) continue;
            MelnikovVerdict v = in_step_set(w, lam, 10, cfg, cfg.K);
            CHECK(v.member);
        }
    }

    SUBCASE("exact resonance fails") {
        ModelConfig c = mel_config(1);
        c.mass = 0.0;
        RVec l0 = eigenvalues_B(c.mass, c.J);
        RVec w = RVec::Constant(1, 101.0);  // omega = 101 = lambda_102 - lambda_1 exact? use k=1: omega.k + l - j
        // choose omega.k + lambda_1 - lambda_3 = 101 + 1 - 3 = 99 != 0; build a real resonance:
        // omega = 2 -> not in annulus; instead shift lambda by hand
        RVec lres = l0;
        lres[2] = 101.0 + lres[0];  // lambda_3 = omega + lambda_1 so k=-1 resonates
        MelnikovVerdict v = in_step_set(w, lres, 5, c);
        CHECK(!v.member);
    }
}

TEST_CASE("estimate_measure basics") {
    FrequencySampler sampler{1, 50.0, 1234, 500};

    SUBCASE("always-true predicate excludes nothing") {
        MeasureEstimate est = estimate_measure([](const RVec&) { return true; }, sampler);
        CHECK(est.fraction == 0.0);
        CHECK(est.ciLow == 0.0);
        CHECK(est.ciHigh < 0.01);
    }

    SUBCASE("nu=1 Omega_0 exclusion is exactly zero for gamma0 <= 1") {
        ModelConfig cfg = mel_config(1);
        cfg.gamma0 = 1.0;
        MeasureEstimate est =
            estimate_measure([&](const RVec& w) { return in_omega0(w, cfg).member; },
                             FrequencySampler{1, cfg.M, 77, 2000});
        CHECK(est.fraction == 0.0);
    }

    SUBCASE("sampler is deterministic and stays in the annulus") {
        FrequencySampler s1{2, 80.0, 31415, 300};
        FrequencySampler s2{2, 80.0, 31415, 300};
        auto a = s1.sample(), b = s2.sample();
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK((a[i] - b[i]).norm() == 0.0);
            CHECK(a[i].norm() >= 80.0);
            CHECK(a[i].norm() <= 160.0);
        }
    }
}
