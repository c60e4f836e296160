#pragma once

#include "kgr/types.hpp"

// Theta-dependent operators stored as finite Fourier families
//   A(theta) = sum_{|k|_inf <= kmax} Ahat(k) e^{i k.theta},
// each Ahat(k) a dense J x J matrix on the sine basis, and the 2x2
// operator-matrix structure
//   bA = ( A^d        A^o      )
//        ( -conj(A^o) -conj(A^d) )
// carried by BlockOperator. Products truncate the k-convolution back to
// |k|_inf <= kmax; the dropped Frobenius mass is accumulated so truncation
// stays observable.

namespace kgr {

class AngleOperator {
public:
    AngleOperator() = default;
    AngleOperator(int dim, int nu, int kmax) : dim_(dim), nu_(nu), kmax_(kmax) {}

    int dim() const { return dim_; }
    int nu() const { return nu_; }
    int kmax() const { return kmax_; }

    const std::map<KIndex, Mat>& fourier() const { return fourier_; }

    bool empty() const { return fourier_.empty(); }

    // Accumulates into the k-th coefficient; silently ignores exact zeros.
    void add_coeff(const KIndex& k, const Mat& m);

    // Coefficient lookup; returns a zero matrix when absent.
    Mat coeff(const KIndex& k) const;

    void prune(double tol = 0.0);

    Mat eval(const RVec& theta) const;

    // d/dt A(omega t) at theta: coefficient-wise multiplication by i(omega.k).
    AngleOperator time_derivative(const RVec& omega) const;

    // Conjugate operator: conj(A)(theta) psi := conj(A(theta) conj(psi)),
    // i.e. coefficient map k -> conj(Ahat(-k)).
    AngleOperator conjugated() const;

    // H^0 adjoint of the family: k -> Ahat(-k)^H.
    AngleOperator adjointed() const;

    AngleOperator transposed() const;

    AngleOperator& operator+=(const AngleOperator& other);
    AngleOperator& operator-=(const AngleOperator& other);
    AngleOperator& operator*=(Cplx c);

    friend AngleOperator operator+(AngleOperator a, const AngleOperator& b) { return a += b; }
    friend AngleOperator operator-(AngleOperator a, const AngleOperator& b) { return a -= b; }
    friend AngleOperator operator*(Cplx c, AngleOperator a) { return a *= c; }

    // Pointwise product A(theta)B(theta) with the convolution truncated to
    // |k|_inf <= kmax; dropped mass accumulates into *discarded if given.
    static AngleOperator convolve(const AngleOperator& a, const AngleOperator& b,
                                  double* discarded = nullptr);

    // diag(w) * A and A * diag(w) for a real weight vector over modes 1..J.
    AngleOperator scale_rows(const RVec& w) const;
    AngleOperator scale_cols(const RVec& w) const;

    // Largest coefficient magnitude, for tolerance scales.
    double max_abs() const;
    double frobenius() const;

    // Restriction to |k|_inf <= N (the projector Pi_N) and its complement.
    AngleOperator low_pass(int N) const;
    AngleOperator high_pass(int N) const;

private:
    int dim_ = 0;
    int nu_ = 1;
    int kmax_ = 0;
    std::map<KIndex, Mat> fourier_;
};

struct BlockOperator {
    AngleOperator d;  // diagonal block A^d
    AngleOperator o;  // anti-diagonal block A^o

    BlockOperator() = default;
    BlockOperator(int dim, int nu, int kmax) : d(dim, nu, kmax), o(dim, nu, kmax) {}

    int dim() const { return d.dim(); }

    // Full 2J x 2J matrix ((A^d, A^o), (-conj A^o, -conj A^d)) at theta.
    Mat assemble(const RVec& theta) const;

    BlockOperator& operator+=(const BlockOperator& b) { d += b.d; o += b.o; return *this; }
    BlockOperator& operator-=(const BlockOperator& b) { d -= b.d; o -= b.o; return *this; }
    BlockOperator& operator*=(Cplx c) { d *= c; o *= c; return *this; }

    friend BlockOperator operator+(BlockOperator a, const BlockOperator& b) { return a += b; }
    friend BlockOperator operator-(BlockOperator a, const BlockOperator& b) { return a -= b; }
    friend BlockOperator operator*(Cplx c, BlockOperator a) { return a *= c; }

    double max_abs() const { return std::max(d.max_abs(), o.max_abs()); }

    // Worst violation of the structural symmetries
    //   [A^d]^* = A^d   (Ahat^d(k)^H = Ahat^d(-k))
    //   [A^o]^* = conj(A^o)   (each Ahat^o(k) complex symmetric)
    // relative to max_abs().
    double symmetry_defect() const;
};

// Assembles ((X, X), (-X, -X)) = X (x) sigma4 at theta.
Mat assemble_sigma4(const Mat& x);

// Assembles ((D, 0), (0, -D)) for a real diagonal D = diag(lambda).
Mat assemble_sigma3(const RVec& lambda);

}  // namespace kgr
