#include "kgr/melnikov.hpp"

#include <cmath>
#include <random>

namespace kgr {

namespace {

// Iterates k over the box |k|_inf <= kmax in Z^nu.
template <typename F>
void for_each_k(int nu, int kmax, F&& f) {
    KIndex k(nu, -kmax);
    while (true) {
        f(const_cast<const KIndex&>(k));
        int d = 0;
        while (d < nu) {
            if (++k[d] <= kmax) break;
            k[d] = -kmax;
            ++d;
        }
        if (d == nu) return;
    }
}

struct VerdictBuilder {
    MelnikovVerdict v;

    void test(const KIndex& k, int j, int l, int sign, double value, double threshold) {
        ++v.tested;
        double margin = value - threshold;
        if (v.worstTriple.j == 0 || margin < v.worstTriple.margin)
            v.worstTriple = {k, j, l, sign, margin};
        if (margin < 0) v.member = false;
    }
};

// Shared second-order sweep. thresholdBase(k) multiplies <j+-l>^alpha/M^alpha.
// devBound(j,l) bounds |lambda_j +- lambda_l - (j +- l)|; passing a negative
// bound disables the analytic filters for that pair.
MelnikovVerdict second_order_check(const RVec& omega, const RVec& lambdas, const ModelConfig& cfg,
                                   int kmax,
                                   const std::function<double(const KIndex&)>& thresholdBase,
                                   const std::function<double(int, int)>& devBound,
                                   double autoPassFactor, bool filtersRequested) {
    const int J = int(lambdas.size());
    const double Ma = std::pow(cfg.M, cfg.alpha);
    const double omegaNorm = omega.norm();

    // Enabling inequalities for the auto-pass regions; if violated the whole
    // sweep falls back to direct testing.
    double baseMax = 0;
    for_each_k(cfg.nu, kmax, [&](const KIndex& k) {
        if (!is_zero(k)) baseMax = std::max(baseMax, thresholdBase(k));
    });
    double devMax = 0;
    for (int j = 1; j <= J; ++j)
        for (int i : {j, std::min(J, j + 1)})
            devMax = std::max(devMax, std::abs(devBound(j, i)));
    const bool filters = filtersRequested && devMax >= 0 &&
                         baseMax * 2.0 * std::sqrt(2.0) <= Ma &&
                         2.0 * devMax <= (autoPassFactor - 2.0 - 2.0) * cfg.M &&
                         omegaNorm <= 2.0 * cfg.M * (1.0 + 1e-12);

    VerdictBuilder out;
    auto lam = [&](int j) { return lambdas[j - 1]; };

    for_each_k(cfg.nu, kmax, [&](const KIndex& k) {
        const double base = thresholdBase(k);
        const double wk = dot(omega, k);
        const double kl2 = norm_l2(k);

        if (is_zero(k)) {
            for (int j = 1; j <= J; ++j) {
                for (int l = 1; l <= J; ++l) {
                    double thrP = base * std::pow(jbracket(double(j + l)), cfg.alpha) / Ma;
                    out.test(k, j, l, +1, lam(j) + lam(l), thrP);
                    if (j == l) continue;  // (0,a,a) excluded from the minus branch
                    double thrM = base * std::pow(jbracket(double(j - l)), cfg.alpha) / Ma;
                    out.test(k, j, l, -1, std::abs(lam(j) - lam(l)), thrM);
                }
            }
            return;
        }

        // Minus branch, j = l: the constraint reduces to |omega.k| once per k.
        out.test(k, 1, 1, -1, std::abs(wk), base / Ma);

        for (int j = 1; j <= J; ++j) {
            for (int l = 1; l <= J; ++l) {
                for (int sign : {+1, -1}) {
                    if (sign < 0 && j == l) continue;
                    const double n = std::abs(double(j) + sign * double(l));
                    const double thr = base * std::pow(jbracket(n), cfg.alpha) / Ma;
                    if (filters) {
                        // |omega.k + lambda_j +- lambda_l|
                        //   >= |j +- l| - dev - |omega||k| >= |j +- l|/2 >= thr.
                        if (n >= autoPassFactor * cfg.M * kl2) {
                            ++out.v.autoPassed;
                            continue;
                        }
                        // Small dispersive deviation: the integer surrogate at
                        // 1.5x threshold proves the constraint.
                        double dev = devBound(j, l);
                        if (dev >= 0 && dev <= 0.5 * thr &&
                            std::abs(wk + double(j) + sign * double(l)) >= 1.5 * thr) {
                            ++out.v.autoPassed;
                            continue;
                        }
                    }
                    out.test(k, j, l, sign, std::abs(wk + lam(j) + sign * lam(l)), thr);
                }
            }
        }
    });
    return out.v;
}

double uniform01(std::mt19937_64& eng) {
    return double(eng() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace

MelnikovVerdict in_omega0(const RVec& omega, const ModelConfig& cfg) {
    VerdictBuilder out;
    for_each_k(cfg.nu, cfg.K, [&](const KIndex& k) {
        if (is_zero(k)) return;
        double thr = cfg.gamma0 * cfg.M / std::pow(jbracket(k), cfg.tau0);
        out.test(k, 0, 0, 0, std::abs(dot(omega, k)), thr);
    });
    return out.v;
}

MelnikovVerdict in_U_alpha(const RVec& omega, const RVec& lambdas, const ModelConfig& cfg) {
    const double Ma = std::pow(cfg.M, cfg.alpha);
    const double m2 = cfg.mass * cfg.mass;
    auto base = [&](const KIndex& k) { return cfg.gammaTilde / std::pow(jbracket(k), cfg.tauTilde); };
    // 0 <= c_j <= m^2 gives |lambda_j +- lambda_l - (j +- l)| <= 2 m^2 / min(j,l).
    auto dev = [&](int j, int l) { return 2.0 * m2 / double(std::min(j, l)); };
    const bool filters = m2 <= cfg.M;
    (void)Ma;
    return second_order_check(omega, lambdas, cfg, cfg.K, base, dev, 8.0, filters);
}

MelnikovVerdict in_U_alpha_brute(const RVec& omega, const RVec& lambdas, const ModelConfig& cfg) {
    auto base = [&](const KIndex& k) { return cfg.gammaTilde / std::pow(jbracket(k), cfg.tauTilde); };
    auto dev = [&](int, int) { return -1.0; };
    return second_order_check(omega, lambdas, cfg, cfg.K, base, dev, 8.0, false);
}

MelnikovVerdict in_step_set(const RVec& omega, const RVec& lambdas, int N, const ModelConfig& cfg,
                            int kcap) {
    int kmax = (kcap > 0) ? std::min(kcap, N) : N;
    double base = cfg.gammaKam / (2.0 * std::pow(jbracket(double(N)), cfg.tauKam));
    // Perturbed eigenvalues: bound the deviation from the integers by the data.
    double D = 0;
    for (int j = 1; j <= int(lambdas.size()); ++j)
        D = std::max(D, std::abs(lambdas[j - 1] - j));
    auto thr = [base](const KIndex&) { return base; };
    auto dev = [D](int, int) { return 2.0 * D; };
    return second_order_check(omega, lambdas, cfg, kmax, thr, dev, 16.0, true);
}

MelnikovVerdict in_omega_inf(const RVec& omega, const RVec& lambdasInf, const ModelConfig& cfg) {
    auto base = [&](const KIndex& k) { return cfg.gammaKam / std::pow(jbracket(k), cfg.tauKam); };
    double D = 0;
    for (int j = 1; j <= int(lambdasInf.size()); ++j)
        D = std::max(D, std::abs(lambdasInf[j - 1] - j));
    auto dev = [D](int, int) { return 2.0 * D; };
    return second_order_check(omega, lambdasInf, cfg, cfg.K, base, dev, 16.0, true);
}

std::vector<RVec> FrequencySampler::sample() const {
    std::mt19937_64 eng(seed);
    std::vector<RVec> out;
    out.reserve(count);
    while (int(out.size()) < count) {
        RVec w(nu);
        for (int d = 0; d < nu; ++d) w[d] = (2.0 * uniform01(eng) - 1.0) * 2.0 * M;
        double r = w.norm();
        if (r >= M && r <= 2.0 * M) out.push_back(w);
    }
    return out;
}

MeasureEstimate estimate_measure(const std::function<bool(const RVec&)>& member,
                                 const FrequencySampler& sampler) {
    auto samples = sampler.sample();
    int excluded = 0;
    for (const RVec& w : samples)
        if (!member(w)) ++excluded;
    MeasureEstimate est;
    est.n = int(samples.size());
    est.fraction = double(excluded) / est.n;
    // Wilson score interval at 95%.
    const double z = 1.959963984540054;
    double p = est.fraction, n = est.n;
    double denom = 1.0 + z * z / n;
    double center = (p + z * z / (2 * n)) / denom;
    double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    est.ciLow = std::max(0.0, center - half);
    est.ciHigh = std::min(1.0, center + half);
    return est;
}

}  // namespace kgr
