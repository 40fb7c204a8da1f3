#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>

#include "bbmwave/errors.hpp"

namespace bbmwave {

// Adaptive Simpson quadrature with the classic |S_fine - S_coarse|/15 error
// estimate.  A panel is accepted when the estimate meets its apportioned
// absolute tolerance, or when it is roundoff-dominated (below the relative
// noise floor of the local magnitudes), or when the panel has shrunk to the
// width floor.  A global evaluation budget turns pathological integrands into
// a loud numeric_error instead of a hang.
namespace detail {

struct QuadCtl {
    double wmin;               // narrowest panel worth splitting
    double noise_rel;          // relative evaluation noise of the integrand
    std::int64_t budget;       // remaining function evaluations
};

template <class F>
double simpson_rec(const F& f, double a, double fa, double b, double fb,
                   double m, double fm, double whole, double tol,
                   QuadCtl& ctl) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    if ((ctl.budget -= 2) < 0)
        throw numeric_error("adaptive quadrature: evaluation budget exhausted");
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    // Roundoff floor of the Simpson sums themselves (L1, so oscillatory
    // panels that cancel internally still report their true noise scale).
    const double l1 = (m - a) / 6.0 * (std::fabs(fa) + 4.0 * std::fabs(flm) +
                                       std::fabs(fm)) +
                      (b - m) / 6.0 * (std::fabs(fm) + 4.0 * std::fabs(frm) +
                                       std::fabs(fb));
    if (std::fabs(delta) <= 15.0 * tol ||
        std::fabs(delta) <= ctl.noise_rel * l1 || (b - a) <= ctl.wmin)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, ctl) +
           simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, ctl);
}

}  // namespace detail

// noise_rel is the relative accuracy of one integrand evaluation.  The
// default is a hair above machine epsilon; integrands built on kernels with
// known cancellation noise (e.g. exp-weighted Airy values) should pass their
// own floor so the subdivision stops once the error estimate is pure noise.
template <class F>
double integrate(const F& f, double a, double b, double abs_tol = 1e-12,
                 std::int64_t max_evals = 20'000'000,
                 double noise_rel = 4e-16) {
    if (!(a < b)) {
        if (a == b) return 0.0;
        return -integrate(f, b, a, abs_tol, max_evals, noise_rel);
    }
    detail::QuadCtl ctl{(b - a) * 0x1p-42, noise_rel, max_evals};
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, fa, b, fb, m, fm, whole, abs_tol, ctl);
}

// Integrate over a list of panel break points; useful when the integrand has
// known structure (peaks, kinks) the adaptive pass should not have to find.
template <class F>
double integrate_panels(const F& f, const double* pts, int n,
                        double abs_tol = 1e-12,
                        std::int64_t max_evals = 20'000'000,
                        double noise_rel = 4e-16) {
    double total = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        total += integrate(f, pts[i], pts[i + 1], abs_tol / (n - 1), max_evals,
                           noise_rel);
    return total;
}

inline double integrate_panels(const std::function<double(double)>& f,
                               std::initializer_list<double> pts,
                               double abs_tol = 1e-12,
                               std::int64_t max_evals = 20'000'000,
                               double noise_rel = 4e-16) {
    return integrate_panels(f, pts.begin(), static_cast<int>(pts.size()),
                            abs_tol, max_evals, noise_rel);
}

}  // namespace bbmwave
