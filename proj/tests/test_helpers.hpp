#pragma once

#include <random>

#include "kgr/angle_op.hpp"
#include "kgr/spectral.hpp"

// Shared randomized-suite helpers. Every generator is seeded explicitly so
// suites are reproducible.

namespace kgrt {

using namespace kgr;

inline double urand(std::mt19937_64& eng) {
    return double(eng() >> 11) * (1.0 / 9007199254740992.0);
}

inline Cplx crand(std::mt19937_64& eng) {
    return {2.0 * urand(eng) - 1.0, 2.0 * urand(eng) - 1.0};
}

inline Mat random_matrix(int J, std::mt19937_64& eng) {
    Mat m(J, J);
    for (int r = 0; r < J; ++r)
        for (int c = 0; c < J; ++c) m(r, c) = crand(eng);
    return m;
}

// Random matrix with |A_m^n| ~ decay^|m-n| so s-decay norms stay moderate.
inline Mat random_decay_matrix(int J, double decay, std::mt19937_64& eng) {
    Mat m(J, J);
    for (int r = 0; r < J; ++r)
        for (int c = 0; c < J; ++c) m(r, c) = std::pow(decay, std::abs(r - c)) * crand(eng);
    return m;
}

inline AngleOperator random_angle_operator(int J, int nu, int kmax, int support,
                                           std::mt19937_64& eng, double decay = 0.5) {
    AngleOperator A(J, nu, kmax);
    for (int i = 0; i < support; ++i) {
        KIndex k(nu);
        for (int d = 0; d < nu; ++d) k[d] = int(urand(eng) * (2 * kmax + 1)) - kmax;
        A.add_coeff(k, random_decay_matrix(J, decay, eng));
    }
    return A;
}

// Random block operator satisfying the structural symmetries exactly:
// d-coefficients come in adjoint pairs, o-coefficients are symmetric.
inline BlockOperator random_symmetric_block(int J, int nu, int kmax, std::mt19937_64& eng,
                                            double decay = 0.5) {
    BlockOperator B(J, nu, kmax);
    for (int i = 0; i < 3; ++i) {
        KIndex k(nu);
        for (int d = 0; d < nu; ++d) k[d] = int(urand(eng) * (2 * kmax + 1)) - kmax;
        Mat md = random_decay_matrix(J, decay, eng);
        B.d.add_coeff(k, md);
        B.d.add_coeff(negate(k), md.adjoint());
        Mat mo = random_decay_matrix(J, decay, eng);
        mo = 0.5 * (mo + mo.transpose()).eval();
        B.o.add_coeff(k, mo);
    }
    return B;
}

// Random real driving satisfying (V1)/(V2) by construction.
inline PotentialSpec random_potential(int nu, int kmax, int pmax, int nterms,
                                      std::mt19937_64& eng) {
    PotentialSpec spec;
    for (int i = 0; i < nterms; ++i) {
        PotentialTerm t;
        t.k.resize(nu);
        bool zero = true;
        for (int d = 0; d < nu; ++d) {
            t.k[d] = int(urand(eng) * (2 * kmax + 1)) - kmax;
            if (t.k[d] != 0) zero = false;
        }
        if (zero) t.k[0] = 1;
        t.p = int(urand(eng) * (pmax + 1));
        t.v = crand(eng);
        spec.terms.push_back(t);
        PotentialTerm conj{negate(t.k), t.p, std::conj(t.v)};
        spec.terms.push_back(conj);
    }
    return spec;
}

}  // namespace kgrt
