#include "kgr/angle_op.hpp"

namespace kgr {

void AngleOperator::add_coeff(const KIndex& k, const Mat& m) {
    if (int(k.size()) != nu_) throw std::invalid_argument("AngleOperator: k has wrong dimension");
    if (norm_inf(k) > kmax_) throw std::invalid_argument("AngleOperator: |k|_inf exceeds cutoff");
    auto it = fourier_.find(k);
    if (it == fourier_.end())
        fourier_.emplace(k, m);
    else
        it->second += m;
}

Mat AngleOperator::coeff(const KIndex& k) const {
    auto it = fourier_.find(k);
    if (it == fourier_.end()) return Mat::Zero(dim_, dim_);
    return it->second;
}

void AngleOperator::prune(double tol) {
    for (auto it = fourier_.begin(); it != fourier_.end();) {
        if (it->second.cwiseAbs().maxCoeff() <= tol)
            it = fourier_.erase(it);
        else
            ++it;
    }
}

Mat AngleOperator::eval(const RVec& theta) const {
    Mat out = Mat::Zero(dim_, dim_);
    for (const auto& [k, m] : fourier_) {
        double phase = 0;
        for (int i = 0; i < nu_; ++i) phase += k[i] * theta[i];
        out += std::exp(Cplx(0.0, phase)) * m;
    }
    return out;
}

AngleOperator AngleOperator::time_derivative(const RVec& omega) const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) {
        double wk = dot(omega, k);
        if (wk != 0.0) out.fourier_.emplace(k, Cplx(0.0, wk) * m);
    }
    return out;
}

AngleOperator AngleOperator::conjugated() const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) out.fourier_.emplace(negate(k), m.conjugate());
    return out;
}

AngleOperator AngleOperator::adjointed() const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) out.fourier_.emplace(negate(k), m.adjoint());
    return out;
}

AngleOperator AngleOperator::transposed() const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) out.fourier_.emplace(k, m.transpose());
    return out;
}

AngleOperator& AngleOperator::operator+=(const AngleOperator& other) {
    for (const auto& [k, m] : other.fourier_) add_coeff(k, m);
    return *this;
}

AngleOperator& AngleOperator::operator-=(const AngleOperator& other) {
    for (const auto& [k, m] : other.fourier_) add_coeff(k, -m);
    return *this;
}

AngleOperator& AngleOperator::operator*=(Cplx c) {
    for (auto& [k, m] : fourier_) m *= c;
    return *this;
}

AngleOperator AngleOperator::convolve(const AngleOperator& a, const AngleOperator& b,
                                      double* discarded) {
    AngleOperator out(a.dim_, a.nu_, a.kmax_);
    for (const auto& [ka, ma] : a.fourier_) {
        for (const auto& [kb, mb] : b.fourier_) {
            KIndex k = add(ka, kb);
            Mat prod = ma * mb;
            if (norm_inf(k) > a.kmax_) {
                if (discarded) *discarded += prod.norm();
                continue;
            }
            out.add_coeff(k, prod);
        }
    }
    return out;
}

AngleOperator AngleOperator::scale_rows(const RVec& w) const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) out.fourier_.emplace(k, w.asDiagonal() * m);
    return out;
}

AngleOperator AngleOperator::scale_cols(const RVec& w) const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_) out.fourier_.emplace(k, m * w.asDiagonal());
    return out;
}

double AngleOperator::max_abs() const {
    double v = 0;
    for (const auto& [k, m] : fourier_)
        if (m.size() > 0) v = std::max(v, m.cwiseAbs().maxCoeff());
    return v;
}

double AngleOperator::frobenius() const {
    double s = 0;
    for (const auto& [k, m] : fourier_) s += m.squaredNorm();
    return std::sqrt(s);
}

AngleOperator AngleOperator::low_pass(int N) const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_)
        if (norm_inf(k) <= N) out.fourier_.emplace(k, m);
    return out;
}

AngleOperator AngleOperator::high_pass(int N) const {
    AngleOperator out(dim_, nu_, kmax_);
    for (const auto& [k, m] : fourier_)
        if (norm_inf(k) > N) out.fourier_.emplace(k, m);
    return out;
}

Mat BlockOperator::assemble(const RVec& theta) const {
    const int J = dim();
    Mat D = d.eval(theta);
    Mat O = o.eval(theta);
    Mat out(2 * J, 2 * J);
    out.topLeftCorner(J, J) = D;
    out.topRightCorner(J, J) = O;
    out.bottomLeftCorner(J, J) = -O.conjugate();
    out.bottomRightCorner(J, J) = -D.conjugate();
    return out;
}

double BlockOperator::symmetry_defect() const {
    double defect = 0;
    for (const auto& [k, m] : d.fourier())
        defect = std::max(defect, (m.adjoint() - d.coeff(negate(k))).cwiseAbs().maxCoeff());
    for (const auto& [k, m] : o.fourier())
        defect = std::max(defect, (m - m.transpose()).cwiseAbs().maxCoeff());
    return defect;
}

Mat assemble_sigma4(const Mat& x) {
    const long J = x.rows();
    Mat out(2 * J, 2 * J);
    out.topLeftCorner(J, J) = x;
    out.topRightCorner(J, J) = x;
    out.bottomLeftCorner(J, J) = -x;
    out.bottomRightCorner(J, J) = -x;
    return out;
}

Mat assemble_sigma3(const RVec& lambda) {
    const long J = lambda.size();
    Mat out = Mat::Zero(2 * J, 2 * J);
    for (long j = 0; j < J; ++j) {
        out(j, j) = lambda[j];
        out(J + j, J + j) = -lambda[j];
    }
    return out;
}

}  // namespace kgr
