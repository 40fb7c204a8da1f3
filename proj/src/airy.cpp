#include "bbmwave/airy.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <vector>

#include "bbmwave/errors.hpp"
#include "bbmwave/quad.hpp"

namespace bbmwave {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrtPi = 1.77245385090551602730;
constexpr double kAi0 = 0.35502805388781723926;    // Ai(0)
constexpr double kAip0 = -0.25881940379280679840;  // Ai'(0)

// Maclaurin branch, reliable on (-7, 6).  Beyond +6 the cancellation between
// the two fundamental series costs relative accuracy; beyond -7 the terms
// grow past ~1e4 and the alternating cancellation costs absolute accuracy.
struct SeriesVal {
    double v, d;  // value and derivative
};

SeriesVal ai_series(double x) {
    const double x2 = x * x;
    const double x3 = x2 * x;
    // f = sum u_k, u_0 = 1, u_k = u_{k-1} x^3 / (3k (3k-1))
    // g = sum v_k, v_0 = x, v_k = v_{k-1} x^3 / ((3k+1) 3k)
    // f' = sum u_{k-1} x^2 / (3k-1),  g' = 1 + sum v_{k-1} x^2 / (3k)
    double u = 1.0, v = x;
    double f = u, g = v, fp = 0.0, gp = 1.0;
    double scale = 1.0 + std::fabs(x);
    for (int k = 1; k < 240; ++k) {
        fp += u * x2 / (3 * k - 1);
        gp += v * x2 / (3 * k);
        u *= x3 / (3.0 * k * (3.0 * k - 1.0));
        v *= x3 / ((3.0 * k + 1.0) * 3.0 * k);
        f += u;
        g += v;
        scale = std::max(scale, std::fabs(u) + std::fabs(v));
        if (std::fabs(u) + std::fabs(v) < 1e-18 * scale && k > 3) break;
    }
    return {kAi0 * f + kAip0 * g, kAi0 * fp + kAip0 * gp};
}

// Asymptotic coefficient ladder u_k (DLMF 9.7.2); v_k for the derivative.
// Both series are summed to their smallest term (they diverge eventually).
constexpr int kAsymMax = 48;

struct AsymCoef {
    double u[kAsymMax], v[kAsymMax];
};

const AsymCoef& asym_coef() {
    static const AsymCoef c = [] {
        AsymCoef a;
        a.u[0] = a.v[0] = 1.0;
        for (int k = 1; k < kAsymMax; ++k) {
            a.u[k] = a.u[k - 1] * (6.0 * k - 5.0) * (6.0 * k - 3.0) *
                     (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
            a.v[k] = a.u[k] * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        }
        return a;
    }();
    return c;
}

// Sum sum_k s^k c_k zeta^{-k} stopping at the smallest term.
double asym_sum(const double* c, double zeta, int stride, int offset,
                bool alternate) {
    double sum = 0.0, prev = 1e300;
    double zp = std::pow(zeta, -offset);
    int sign = 1;
    for (int k = offset; k < kAsymMax; k += stride) {
        const double term = c[k] * zp;
        if (std::fabs(term) > prev) break;  // divergence point reached
        sum += sign * term;
        prev = std::fabs(term);
        if (prev < 1e-18 * std::fabs(sum)) break;
        for (int s = 0; s < stride; ++s) zp /= zeta;
        if (alternate) sign = -sign;
    }
    return sum;
}

struct AiPair {
    double v, d;
};

AiPair ai_asym_pos(double x) {
    const AsymCoef& c = asym_coef();
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const double s = asym_sum(c.u, zeta, 1, 0, true);
    const double sp = asym_sum(c.v, zeta, 1, 0, true);
    const double pre = std::exp(-zeta) / (2.0 * kSqrtPi);
    const double xq = std::pow(x, 0.25);
    return {pre * s / xq, -pre * xq * sp};
}

AiPair ai_asym_neg(double x) {
    const AsymCoef& c = asym_coef();
    const double z = -x;
    const double zeta = 2.0 / 3.0 * z * std::sqrt(z);
    const double th = zeta - 0.25 * kPi;
    const double ce = asym_sum(c.u, zeta, 2, 0, true);   // u_0, -u_2/z^2, ...
    const double co = asym_sum(c.u, zeta, 2, 1, true);   // u_1/z, -u_3/z^3...
    const double de = asym_sum(c.v, zeta, 2, 0, true);
    const double dd = asym_sum(c.v, zeta, 2, 1, true);
    const double xq = std::pow(z, 0.25);
    const double s = std::sin(th), cth = std::cos(th);
    return {(cth * ce + s * co) / (kSqrtPi * xq),
            (s * de - cth * dd) * xq / kSqrtPi};
}

AiPair ai_pair(double x) {
    if (x >= 6.0) return ai_asym_pos(x);
    if (x <= -7.0) return ai_asym_neg(x);
    const SeriesVal sv = ai_series(x);
    return {sv.v, sv.d};
}

// Zero table: asymptotic initializer (DLMF 9.9.18 inversion) plus Newton.
double zero_estimate(int k) {
    const double t = 3.0 * kPi * (4.0 * k - 1.0) / 8.0;
    const double t2 = 1.0 / (t * t);
    const double T =
        std::pow(t, 2.0 / 3.0) *
        (1.0 + t2 * (5.0 / 48.0 +
                     t2 * (-5.0 / 36.0 +
                           t2 * (77125.0 / 82944.0 -
                                 t2 * 108056875.0 / 6967296.0))));
    return -T;
}

struct ZeroTable {
    std::mutex mu;
    std::vector<double> z, zp;

    void extend(int k) {
        std::lock_guard<std::mutex> lock(mu);
        while (static_cast<int>(z.size()) < k) {
            const int i = static_cast<int>(z.size()) + 1;
            double g = zero_estimate(i);
            bool ok = false;
            for (int it = 0; it < 100; ++it) {
                const AiPair p = ai_pair(g);
                const double step = p.v / p.d;
                g -= step;
                if (std::fabs(step) < 1e-13 * std::fabs(g)) {
                    ok = true;
                    break;
                }
            }
            if (!ok)
                throw numeric_error("airy_zero: Newton refinement stalled at k=" +
                                    std::to_string(i));
            z.push_back(g);
            zp.push_back(ai_pair(g).d);
        }
    }
};

ZeroTable& zero_table() {
    static ZeroTable t;
    return t;
}

// Edge-law table: cumulative integral of Ai(y + gamma_1) on [0, kEdgeSpan].
constexpr double kEdgeSpan = 16.0;
constexpr int kEdgePanels = 4096;

struct EdgeTable {
    double h;
    double norm;
    std::vector<double> cum;  // cum[i] = int_0^{i h} Ai(y + gamma_1) dy
};

const EdgeTable& edge_table() {
    static const EdgeTable t = [] {
        EdgeTable e;
        e.h = kEdgeSpan / kEdgePanels;
        e.cum.resize(kEdgePanels + 1);
        e.cum[0] = 0.0;
        const double g1 = airy_zero(1);
        for (int i = 0; i < kEdgePanels; ++i) {
            const double a = i * e.h, b = a + e.h;
            const double fa = ai(a + g1), fm = ai(0.5 * (a + b) + g1),
                         fb = ai(b + g1);
            e.cum[i + 1] = e.cum[i] + e.h / 6.0 * (fa + 4.0 * fm + fb);
        }
        // Tail beyond the span is below 1e-14 of the total; ignored.
        e.norm = e.cum[kEdgePanels];
        return e;
    }();
    return t;
}

}  // namespace

double ai(double x) { return ai_pair(x).v; }
double ai_prime(double x) { return ai_pair(x).d; }

double log_ai(double x) {
    if (x < 6.0) {
        if (x <= -2.3381) throw config_error("log_ai: x at or below first zero");
        return std::log(ai_pair(x).v);
    }
    const AsymCoef& c = asym_coef();
    const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
    const double s = asym_sum(c.u, zeta, 1, 0, true);
    return -zeta + std::log(s) - std::log(2.0 * kSqrtPi) - 0.25 * std::log(x);
}

double airy_zero(int k) {
    if (k < 1) throw config_error("airy_zero: k must be >= 1");
    ZeroTable& t = zero_table();
    t.extend(k);
    std::lock_guard<std::mutex> lock(t.mu);
    return t.z[k - 1];
}

double airy_zero_prime(int k) {
    if (k < 1) throw config_error("airy_zero_prime: k must be >= 1");
    ZeroTable& t = zero_table();
    t.extend(k);
    std::lock_guard<std::mutex> lock(t.mu);
    return t.zp[k - 1];
}

double airy_orth(int j, int k) {
    const double gj = airy_zero(j), gk = airy_zero(k);
    const double zmax = std::max(-gj, -gk) + 12.0;
    return integrate([gj, gk](double z) { return ai(z + gj) * ai(z + gk); },
                     0.0, zmax, 1e-11);
}

double edge_norm() { return edge_table().norm; }

double edge_density(double y) {
    if (y < 0.0) return 0.0;
    return ai(y + airy_zero(1)) / edge_table().norm;
}

double edge_cdf(double y) {
    if (y <= 0.0) return 0.0;
    const EdgeTable& t = edge_table();
    if (y >= kEdgeSpan) return 1.0;
    const int i = static_cast<int>(y / t.h);
    const double a = i * t.h;
    const double g1 = airy_zero(1);
    const double local = integrate(
        [g1](double u) { return ai(u + g1); }, a, y, 1e-14, 20);
    return (t.cum[i] + local) / t.norm;
}

double edge_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw config_error("edge_quantile: p must lie in (0,1)");
    double lo = 0.0, hi = kEdgeSpan;
    for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (edge_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double laplace_growth(double r) {
    if (!(r > 0.0 && r <= 8.0))
        throw config_error("laplace_growth: r must lie in (0, 8]");
    const double g1 = airy_zero(1);
    const double shift = r * r * r / 3.0;
    auto f = [r, shift](double z) {
        const double e = r * z - shift;
        if (z < 6.0) return std::exp(e) * ai(z);
        return std::exp(e + log_ai(z));
    };
    // Panels: the oscillation-free head, the saddle near z = r^2, and a tail
    // wide enough that the Gaussian falloff (variance ~ 2r) is exhausted.
    std::vector<double> pts = {g1, 0.0, 6.0, r * r,
                               r * r + 20.0 * std::sqrt(2.0 * r) + 8.0};
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    // The exp weight turns ai's absolute cancellation noise (worst just
    // below the series/asymptotic join at z = 6, ~3e-8 relative there) into
    // relative noise of the integrand, so tell the quadrature where its
    // floor is; the result is still good to ~1e-7.
    return integrate_panels(f, pts.data(), static_cast<int>(pts.size()), 1e-10,
                            20'000'000, 1e-7);
}

}  // namespace bbmwave
