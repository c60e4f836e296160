#include "kgr/spectral.hpp"

#include <cmath>

namespace kgr {

void ModelConfig::validate() const {
    if (nu < 1) throw ConfigInvalid("nu must be >= 1");
    if (mass < 0) throw ConfigInvalid("mass must be >= 0");
    if (rho <= 0) throw ConfigInvalid("rho must be > 0");
    if (M <= 1) throw ConfigInvalid("M must be > 1");
    if (J < 2) throw ConfigInvalid("J must be >= 2");
    if (K < 1) throw ConfigInvalid("K must be >= 1");
    if (!(alpha > 0 && alpha < 1)) throw ConfigInvalid("alpha must lie in (0,1)");
    if (!(s0 > 0.5)) throw ConfigInvalid("s0 must exceed 1/2");
    if (gamma0 <= 0 || gammaTilde <= 0 || gammaKam <= 0)
        throw ConfigInvalid("Diophantine constants must be positive");
    if (!(tau0 > nu - 1)) throw ConfigInvalid("tau0 must exceed nu-1");
    if (tauTilde < 2 * nu + 3) throw ConfigInvalid("tauTilde must be >= 2nu+3");
    if (!(tauKam > nu + 1 + alpha + tauTilde / alpha))
        throw ConfigInvalid("tauKam must exceed nu+1+alpha+tauTilde/alpha");
    if (lieOrder < 1) throw ConfigInvalid("lieOrder must be >= 1");
    if (quadS < 1) throw ConfigInvalid("quadS must be >= 1");
}

void PotentialSpec::validate(int nu) const {
    std::map<std::pair<KIndex, int>, Cplx> agg;
    for (const auto& t : terms) {
        if (int(t.k.size()) != nu) throw ConfigInvalid("potential term k has wrong dimension");
        if (t.p < 0) throw ConfigInvalid("potential term p must be >= 0");
        agg[{t.k, t.p}] += t.v;
    }
    const double tol = 1e-14;
    for (const auto& [key, v] : agg) {
        if (std::abs(v) <= tol) continue;
        if (is_zero(key.first))
            throw ConfigInvalid("potential violates zero theta-average: term with k = 0 present");
        auto it = agg.find({negate(key.first), key.second});
        Cplx partner = (it == agg.end()) ? Cplx(0, 0) : it->second;
        if (std::abs(partner - std::conj(v)) > tol * std::max(1.0, std::abs(v)))
            throw ConfigInvalid("potential violates reality: missing conjugate partner of k=" +
                                k_to_string(key.first) + ", p=" + std::to_string(key.second));
    }
}

RVec eigenvalues_B(double mass, int J) {
    RVec lam(J);
    for (int j = 1; j <= J; ++j) lam[j - 1] = std::sqrt(double(j) * j + mass * mass);
    return lam;
}

double dispersion_correction(double mass, int j) {
    return j * (std::sqrt(double(j) * j + mass * mass) - j);
}

AngleOperator assemble_V(const PotentialSpec& spec, const ModelConfig& cfg, double* maxDropped) {
    spec.validate(cfg.nu);
    const int J = cfg.J;
    AngleOperator V(J, cfg.nu, cfg.K);
    double dropped = 0;
    for (const auto& t : spec.terms) {
        if (norm_inf(t.k) > cfg.K) {
            dropped = std::max(dropped, std::abs(t.v));
            continue;
        }
        Mat m = Mat::Zero(J, J);
        for (int c = 1; c <= J; ++c) {
            // cos(px) sin(cx) = [sin((c+p)x) + sin((c-p)x)] / 2, sin(0) = 0,
            // sin(-nx) = -sin(nx); rows outside 1..J are dropped.
            int up = c + t.p;
            if (up <= J)
                m(up - 1, c - 1) += 0.5;
            else
                dropped = std::max(dropped, 0.5 * std::abs(t.v));
            int down = c - t.p;
            if (down >= 1) {
                m(down - 1, c - 1) += 0.5;
            } else if (down <= -1) {
                if (-down <= J)
                    m(-down - 1, c - 1) -= 0.5;
                else
                    dropped = std::max(dropped, 0.5 * std::abs(t.v));
            }
        }
        V.add_coeff(t.k, t.v * m);
    }
    V.prune();
    if (maxDropped) *maxDropped = dropped;
    return V;
}

BlockOperator assemble_W(const AngleOperator& V, const ModelConfig& cfg) {
    RVec lam = eigenvalues_B(cfg.mass, cfg.J);
    RVec isqrt = lam.array().rsqrt();
    AngleOperator core = V.scale_rows(isqrt).scale_cols(isqrt);
    core *= 0.5;
    BlockOperator W(cfg.J, cfg.nu, cfg.K);
    W.d = core;
    W.o = core;
    return W;
}

double sobolev_norm(const CVec& coeffs, double r) {
    double s = 0;
    for (long m = 0; m < coeffs.size(); ++m)
        s += std::pow(1.0 + double(m + 1) * double(m + 1), r) * std::norm(coeffs[m]);
    return std::sqrt(s);
}

double sobolev_norm(const SineVector& phi, double r) { return sobolev_norm(phi.coeffs, r); }

double sobolev_norm2(const CVec& pair, double r) {
    const long J = pair.size() / 2;
    double a = sobolev_norm(CVec(pair.head(J)), r);
    double b = sobolev_norm(CVec(pair.tail(J)), r);
    return std::sqrt(a * a + b * b);
}

}  // namespace kgr
