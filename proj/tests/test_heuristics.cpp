#include "doctest.h"

#include <cmath>
#include <string>
#include <vector>

#include "bbmwave/airy.hpp"
#include "bbmwave/errors.hpp"
#include "bbmwave/heuristics.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/quad.hpp"

using namespace bbmwave;

namespace {

ModelParams design_point() {
    ModelParams p;
    p.rho = 0.5;
    p.beta = 0.01;
    p.delta = 0.5;
    return p;
}

// forward population-size relation, written out independently of the solver
double forward_n(double rho, double beta) {
    return std::exp(std::log(beta) / 3.0 - 3.0 * std::log(rho) +
                    rho * rho * rho / (6.0 * beta) -
                    rho * airy_zero(1) / std::cbrt(2.0 * beta));
}

}  // namespace

TEST_SUITE("heuristics") {

TEST_CASE("trajectory is flat then parabolic with the stated boundary data") {
    const ModelParams p = design_point();
    const double top = p.rho * p.rho / (2.0 * p.beta);  // 12.5
    const double T = 60.0;

    SUBCASE("target at the plateau gives a flat curve") {
        const TrajectoryCurve c = ld_trajectory(p, T, top);
        CHECK(c.t_z == T);
        CHECK(c.in_regime);
        CHECK(c.value(0.0) == top);
        CHECK(c.value(T) == top);
    }

    SUBCASE("target zero leaves the plateau rho/beta before the horizon") {
        const TrajectoryCurve c = ld_trajectory(p, T, 0.0);
        CHECK(T - c.t_z == doctest::Approx(p.rho / p.beta).epsilon(1e-12));
        CHECK(c.value(c.t_z) == top);
        CHECK(std::abs(c.value(T)) < 1e-9);
        // smooth fit at t_z and curvature -beta inside the parabola
        const double h = 1e-5;
        CHECK(std::abs(c.value(c.t_z + h) - c.value(c.t_z - h)) / (2.0 * h) <
              1e-4);
        const double u = 30.0, hh = 1e-3;
        const double second =
            (c.value(u + hh) - 2.0 * c.value(u) + c.value(u - hh)) /
            (hh * hh);
        CHECK(second == doctest::Approx(-p.beta).epsilon(1e-4));
        CHECK(std::abs(c.value(c.t_z - 1e-9) - c.value(c.t_z + 1e-9)) <
              1e-12);
    }

    SUBCASE("sampling covers the horizon monotonically") {
        const TrajectoryCurve c = ld_trajectory(p, T, -3.0);
        const auto pts = c.sample(40);
        REQUIRE(pts.size() == 41);
        CHECK(pts.front().first == 0.0);
        CHECK(pts.front().second == top);
        CHECK(pts.back().first == T);
        CHECK(pts.back().second == doctest::Approx(-3.0).epsilon(1e-10));
        for (std::size_t i = 1; i < pts.size(); ++i)
            CHECK(pts[i].second <= pts[i - 1].second + 1e-14);
        CHECK_THROWS_AS(c.sample(0), config_error);
    }

    SUBCASE("unreachable targets require explicit extrapolation") {
        CHECK_THROWS_AS(ld_trajectory(p, 5.0, 0.0), config_error);
        const TrajectoryCurve c = ld_trajectory(p, 5.0, 0.0, true);
        CHECK_FALSE(c.in_regime);
        CHECK(c.t_z < 0.0);
        CHECK(std::abs(c.value(5.0)) < 1e-9);
    }

    SUBCASE("targets above the plateau and degenerate parameters") {
        CHECK_THROWS_AS(ld_trajectory(p, T, top + 0.1, true), config_error);
        CHECK_THROWS_AS(ld_trajectory(p, -1.0, 0.0), config_error);
        ModelParams crit = p;
        crit.beta = 0.0;
        CHECK_THROWS_AS(ld_trajectory(crit, T, 0.0), config_error);
    }
}

TEST_CASE("exponent matches its derivatives and the action integral") {
    const ModelParams p = design_point();
    const double top = p.rho * p.rho / (2.0 * p.beta);

    SUBCASE("values and finite-difference derivatives at the maximum") {
        CHECK(ld_exponent(p, 0.0) ==
              doctest::Approx(0.125 / 0.06).epsilon(1e-12));
        CHECK(std::abs(ld_exponent(p, top)) < 1e-12);
        const double h1 = 1e-4;
        const double d1 =
            (ld_exponent(p, h1) - ld_exponent(p, -h1)) / (2.0 * h1);
        CHECK(std::abs(d1) < 1e-6);
        const double h2 = 1e-3;
        const double d2 = (ld_exponent(p, h2) - 2.0 * ld_exponent(p, 0.0) +
                           ld_exponent(p, -h2)) /
                          (h2 * h2);
        CHECK(d2 == doctest::Approx(-p.beta / p.rho).epsilon(1e-4));
    }

    SUBCASE("closed form equals the action integral over the trajectory") {
        const double T = 60.0;
        for (double z : {0.0, 3.0, -5.0, 10.0, 12.0}) {
            const TrajectoryCurve c = ld_trajectory(p, T, z);
            const auto action = [&](double u) {
                const double h = 1e-4;
                const double fd =
                    (c.value(u + h) - c.value(u - h)) / (2.0 * h);
                const double v = fd + p.rho;
                return p.beta * c.value(u) - 0.5 * v * v;
            };
            const double pts[] = {0.0, c.t_z, T};
            const double got =
                integrate_panels(action, pts, 3, 1e-9, 20'000'000, 1e-11);
            CHECK(got ==
                  doctest::Approx(ld_exponent(p, z)).epsilon(1e-8));
        }
    }

    SUBCASE("strictly decreasing away from the maximum on both sides") {
        for (double z = 0.0; z < 12.0; z += 1.0)
            CHECK(ld_exponent(p, z + 1.0) < ld_exponent(p, z));
        for (double z = 0.0; z > -10.0; z -= 1.0)
            CHECK(ld_exponent(p, z - 1.0) < ld_exponent(p, z));
    }

    SUBCASE("gaussian expansion is even and tight over one bulk deviation") {
        CHECK(ld_exponent_gauss(p, 0.0) ==
              doctest::Approx(ld_exponent(p, 0.0)).epsilon(1e-13));
        CHECK(ld_exponent_gauss(p, 4.3) == ld_exponent_gauss(p, -4.3));
        const double sd = std::sqrt(p.rho / p.beta);
        const double bound = 0.05 * ld_exponent(p, 0.0);
        for (int i = 0; i <= 40; ++i) {
            const double z = -sd + i * (2.0 * sd / 40.0);
            CHECK(std::abs(ld_exponent(p, z) - ld_exponent_gauss(p, z)) <=
                  bound);
        }
    }

    SUBCASE("domain errors") {
        CHECK_THROWS_AS(ld_exponent(p, top + 1e-9), config_error);
        CHECK_THROWS_AS(ld_exponent(p, std::nan("")), config_error);
        ModelParams crit = p;
        crit.beta = 0.0;
        CHECK_THROWS_AS(ld_exponent(crit, 0.0), config_error);
        CHECK_THROWS_AS(ld_exponent_gauss(crit, 0.0), config_error);
    }
}

TEST_CASE("discrete correspondence inverts the population-size relation") {
    SUBCASE("forward value at the reference parameters is pinned") {
        CHECK(forward_n(0.5, 0.01) ==
              doctest::Approx(1027.155715367229).epsilon(1e-12));
    }

    SUBCASE("round trip at the reference parameters") {
        // mu and s chosen so that s sqrt(mu) reproduces beta = 0.01
        const DiscreteCorrespondence m =
            discrete_map(1027.155715367229, 1e-4, 1.0);
        CHECK(m.beta == doctest::Approx(0.01).epsilon(1e-15));
        CHECK(m.rho == doctest::Approx(0.5).epsilon(1e-9));
    }

    SUBCASE("round trip across a grid of mutation rates and strengths") {
        for (double mu : {1e-4, 1e-2, 1e-1}) {
            for (double s : {1e-2, 1e-1, 1.0}) {
                const double beta = s * std::sqrt(mu);
                // twice the cube-root scale sits above the branch minimum
                // while keeping the population size representable
                const double rho0 = 2.0 * std::cbrt(6.0 * beta);
                const double n = forward_n(rho0, beta);
                REQUIRE(std::isfinite(n));
                const DiscreteCorrespondence m = discrete_map(n, mu, s);
                CHECK(m.rho == doctest::Approx(rho0).epsilon(1e-6));
                CHECK(m.beta == doctest::Approx(beta).epsilon(1e-14));
                CHECK(m.selection_index ==
                      doctest::Approx(n * n * n * mu * s * s)
                          .epsilon(1e-12));
            }
        }
    }

    SUBCASE("arithmetic outputs on a solvable input") {
        const DiscreteCorrespondence m = discrete_map(5000.0, 1e-4, 1e-2);
        CHECK(m.beta == doctest::Approx(1e-4).epsilon(1e-15));
        CHECK(m.selection_index == doctest::Approx(1250.0).epsilon(1e-12));
        CHECK(forward_n(m.rho, m.beta) ==
              doctest::Approx(5000.0).epsilon(1e-9));
        // larger populations map to stronger drift
        CHECK(discrete_map(50000.0, 1e-4, 1e-2).rho > m.rho);
    }

    SUBCASE("populations below the branch minimum are rejected") {
        // with beta = 1e-4 the relation bottoms out near N = 3318.6
        CHECK_THROWS_AS(discrete_map(1000.0, 1e-4, 1e-2), numeric_error);
        try {
            discrete_map(1000.0, 1e-4, 1e-2);
        } catch (const numeric_error& e) {
            CHECK(std::string(e.what()).find("below the branch minimum") !=
                  std::string::npos);
        }
        const DiscreteCorrespondence m = discrete_map(3319.0, 1e-4, 1e-2);
        CHECK(forward_n(m.rho, m.beta) ==
              doctest::Approx(3319.0).epsilon(1e-9));
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(discrete_map(1.0, 1e-4, 1e-2), config_error);
        CHECK_THROWS_AS(discrete_map(std::nan(""), 1e-4, 1e-2),
                        config_error);
        CHECK_THROWS_AS(discrete_map(100.0, 0.0, 1e-2), config_error);
        CHECK_THROWS_AS(discrete_map(100.0, 1e-4, -1.0), config_error);
    }
}

}  // TEST_SUITE
