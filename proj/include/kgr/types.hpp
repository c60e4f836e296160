#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

// Shared scalar/vector conventions used throughout the engine.
//
// Three different "norms of k" coexist and are NOT interchangeable:
//   * |k|_inf  — storage / truncation cutoffs of Fourier supports,
//   * |k|_1    — the exponential analytic weight e^{rho |k|_1},
//   * |k|_2    — Diophantine thresholds <k> = (1+|k|_2^2)^{1/2} and the
//                Cauchy-Schwarz bound |omega.k| <= |omega| |k|_2.

namespace kgr {

using Cplx = std::complex<double>;
using Mat  = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;

// Integer frequency multi-index k in Z^nu.
using KIndex = std::vector<int>;

inline int norm_inf(const KIndex& k) {
    int m = 0;
    for (int c : k) m = std::max(m, std::abs(c));
    return m;
}

inline int norm_l1(const KIndex& k) {
    int s = 0;
    for (int c : k) s += std::abs(c);
    return s;
}

inline double norm_l2(const KIndex& k) {
    double s = 0;
    for (int c : k) s += double(c) * double(c);
    return std::sqrt(s);
}

inline bool is_zero(const KIndex& k) {
    for (int c : k) if (c != 0) return false;
    return true;
}

inline KIndex negate(const KIndex& k) {
    KIndex r(k.size());
    for (size_t i = 0; i < k.size(); ++i) r[i] = -k[i];
    return r;
}

inline KIndex add(const KIndex& a, const KIndex& b) {
    KIndex r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline double dot(const RVec& omega, const KIndex& k) {
    double s = 0;
    for (size_t i = 0; i < k.size(); ++i) s += omega[long(i)] * k[i];
    return s;
}

// Japanese bracket <x> = (1+x^2)^{1/2}; for multi-indices |k|_2 is used.
inline double jbracket(double x) { return std::sqrt(1.0 + x * x); }
inline double jbracket(const KIndex& k) { return jbracket(norm_l2(k)); }

inline std::string k_to_string(const KIndex& k) {
    std::string s = "(";
    for (size_t i = 0; i < k.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(k[i]);
    }
    return s + ")";
}

// All continuous and truncation parameters of one experiment.
struct ModelConfig {
    int nu = 1;               // number of driving frequencies
    double mass = 0.0;        // Klein-Gordon mass m >= 0
    double rho = 0.5;         // analyticity width of the driving
    double M = 100.0;         // annulus size, |omega| in [M, 2M]
    int J = 16;               // spatial sine modes kept, j = 1..J
    int K = 4;                // angle-Fourier cutoff |k|_inf <= K
    double alpha = 0.4;       // Melnikov balance exponent, in (0,1)
    double s0 = 1.0;          // decay-norm index, > 1/2
    double gamma0 = 1.0;      // Diophantine constant of the Omega_0 set
    double tau0 = 1.0;        // Diophantine exponent of Omega_0, > nu-1
    double gammaTilde = 0.125;  // constant of the U_alpha set
    double tauTilde = 5.0;      // exponent of U_alpha, >= 2nu+3
    double gammaKam = 0.1;    // constant of the KAM step sets
    double tauKam = 15.0;     // exponent of the KAM step sets
    int lieOrder = 8;         // truncation order of all Lie series
    int quadS = 6;            // Gauss-Legendre nodes of the s-integrals
    std::uint64_t seed = 1;   // RNG seed for every stochastic component
    double k0 = 1e-2;         // smallness threshold the run is reported against

    void validate() const;
};

// One driving term v e^{i k.theta} cos(p x); the whole potential is the sum.
struct PotentialTerm {
    KIndex k;
    int p = 0;
    Cplx v{0.0, 0.0};
};

struct PotentialSpec {
    std::vector<PotentialTerm> terms;

    // Checks reality (every (k,p,v) matched by (-k,p,conj v)) and the
    // zero-average condition (no k = 0 mass). Throws on violation.
    void validate(int nu) const;
};

// Coefficients of phi = sum_m phi_m sin(m x), m = 1..J.
struct SineVector {
    CVec coeffs;
};

// Parameters of the weighted norms on truncated matrices.
struct NormParams {
    double s = 1.0;        // decay index
    double rho = 0.0;      // analytic weight rho'
    double alphaW = 0.0;   // diagonal-block weight exponent
    double betaW = 0.0;    // anti-diagonal-block weight exponent
    double lipWeight = 0;  // Lipschitz weight w, typically gamma/M^alpha
};

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what) : std::runtime_error("ConfigInvalid: " + what) {}
};

struct DenominatorTooSmall : std::runtime_error {
    explicit DenominatorTooSmall(const std::string& what)
        : std::runtime_error("DenominatorTooSmall: " + what) {}
};

struct NotSmallEnough : std::runtime_error {
    explicit NotSmallEnough(const std::string& what) : std::runtime_error("NotSmallEnough: " + what) {}
};

struct ConvergenceStall : std::runtime_error {
    explicit ConvergenceStall(const std::string& what)
        : std::runtime_error("ConvergenceStall: " + what) {}
};

struct StepTooLarge : std::runtime_error {
    explicit StepTooLarge(const std::string& what) : std::runtime_error("StepTooLarge: " + what) {}
};

struct UnknownMetric : std::runtime_error {
    explicit UnknownMetric(const std::string& what) : std::runtime_error("UnknownMetric: " + what) {}
};

}  // namespace kgr
