#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bbmwave/airy.hpp"
#include "bbmwave/engine.hpp"
#include "bbmwave/errors.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/rng.hpp"
#include "bbmwave/stats.hpp"

using namespace bbmwave;

namespace {

ModelParams design_point() {
    ModelParams p;
    p.rho = 0.5;
    p.beta = 0.01;
    p.delta = 0.5;
    return p;
}

PopulationState state_at(double time, const std::vector<double>& xs) {
    PopulationState s;
    s.time = time;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s.particles.push_back({xs[i], i, kNoParent});
    s.next_id = xs.size();
    return s;
}

// Draws from the edge law by rejection against a flat proposal, using only
// the density; keeps the ks check independent of edge_cdf / edge_quantile.
std::vector<WeightedAtom> edge_rejection_sample(std::size_t n, Rng& rng) {
    const double span = 9.0;
    const double cap = 0.43;  // above the density peak ~0.4203
    std::vector<WeightedAtom> out;
    out.reserve(n);
    while (out.size() < n) {
        const double y = span * rng.uniform();
        if (cap * rng.uniform() < edge_density(y)) out.push_back({y, 1.0});
    }
    return out;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("summary matches hand-built populations") {
    const ModelParams p = design_point();
    const double ell = level(p, 0.0);

    SUBCASE("empty state") {
        PopulationState s;
        s.time = 3.5;
        const SummarySnapshot out = summary(s, p, {0.0, 1.0});
        CHECK(out.time == 3.5);
        CHECK(out.n == 0);
        CHECK(out.y == 0.0);
        REQUIRE(out.z.size() == 2);
        CHECK(out.z[0] == 0.0);
        CHECK(out.z[1] == 0.0);
        CHECK(std::isinf(out.min_position));
        CHECK(out.min_position > 0.0);
        CHECK(std::isinf(out.max_position));
        CHECK(out.max_position < 0.0);
    }

    SUBCASE("single particle at the front level") {
        const SummarySnapshot out = summary(state_at(0.0, {ell}), p, {0.0});
        CHECK(out.n == 1);
        CHECK(out.y == doctest::Approx(std::exp(p.rho * ell)).epsilon(1e-12));
        CHECK(out.z[0] == 0.0);  // the weight vanishes at and above the level
        CHECK(out.min_position == ell);
        CHECK(out.max_position == ell);
    }

    SUBCASE("single particle one scale unit below the level") {
        const double x = ell - 1.0 / std::cbrt(2.0 * p.beta);
        const SummarySnapshot out = summary(state_at(0.0, {x}), p, {0.0});
        const double want = std::exp(p.rho * x) * 0.5052317484966367;
        CHECK(out.z[0] == doctest::Approx(want).epsilon(1e-11));
    }

    SUBCASE("edge cloud weight is count times the single-particle weight") {
        const PopulationState s = init_edge_cloud(p, 4.0);
        REQUIRE(s.size() == 15);
        const SummarySnapshot out = summary(s, p, {0.0});
        CHECK(out.z[0] ==
              doctest::Approx(15.0 * z_weight(p, 0.0, ell - 4.0))
                  .epsilon(1e-12));
        CHECK(out.y ==
              doctest::Approx(15.0 * std::exp(p.rho * (ell - 4.0)))
                  .epsilon(1e-12));
    }

    SUBCASE("additive over a disjoint split") {
        const std::vector<double> xs = {-2.0, 0.3, 5.0, 9.4, 12.0, 17.8, 20.5};
        const std::vector<double> offs = {-1.0, 0.0, 1.0, 2.0};
        const SummarySnapshot whole = summary(state_at(1.0, xs), p, offs);
        const SummarySnapshot a = summary(
            state_at(1.0, {xs.begin(), xs.begin() + 4}), p, offs);
        const SummarySnapshot b = summary(
            state_at(1.0, {xs.begin() + 4, xs.end()}), p, offs);
        CHECK(whole.n == a.n + b.n);
        CHECK(whole.y == doctest::Approx(a.y + b.y).epsilon(1e-13));
        for (std::size_t j = 0; j < offs.size(); ++j) {
            CHECK(whole.z[j] ==
                  doctest::Approx(a.z[j] + b.z[j]).epsilon(1e-13));
            CHECK(whole.z[j] >= 0.0);
        }
        CHECK(whole.min_position == std::min(a.min_position, b.min_position));
        CHECK(whole.max_position == std::max(a.max_position, b.max_position));
    }
}

TEST_CASE("bulk measure rescales positions by sqrt(beta/rho)") {
    const ModelParams p = design_point();

    SUBCASE("empty population becomes a unit atom at zero") {
        const EmpiricalMeasure m = bulk_measure(PopulationState{}, p);
        REQUIRE(m.atoms.size() == 1);
        CHECK(m.atoms[0].location == 0.0);
        CHECK(m.atoms[0].weight == 1.0);
        CHECK(m.total_weight == 1.0);
    }

    SUBCASE("unit atoms at rescaled positions") {
        const std::vector<double> xs = {-3.0, 0.0, 7.5};
        const EmpiricalMeasure m = bulk_measure(state_at(2.0, xs), p);
        REQUIRE(m.atoms.size() == 3);
        const double scale = std::sqrt(p.beta / p.rho);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            CHECK(m.atoms[i].location ==
                  doctest::Approx(xs[i] * scale).epsilon(1e-14));
            CHECK(m.atoms[i].weight == 1.0);
        }
        CHECK(m.total_weight == 3.0);

        // halving beta shrinks every location by sqrt(2)
        ModelParams q = p;
        q.beta = 0.005;
        const EmpiricalMeasure m2 = bulk_measure(state_at(2.0, xs), q);
        for (std::size_t i = 0; i < xs.size(); ++i)
            CHECK(m2.atoms[i].location * std::sqrt(2.0) ==
                  doctest::Approx(m.atoms[i].location).epsilon(1e-13));
    }
}

TEST_CASE("edge measure rescales the gap to the front level") {
    const ModelParams p = design_point();
    const double ell = level(p, 0.0);
    const double c = std::cbrt(2.0 * p.beta);

    SUBCASE("needs a positive growth gradient") {
        ModelParams crit = p;
        crit.beta = 0.0;
        CHECK_THROWS_AS(edge_measure(PopulationState{}, crit), config_error);
    }

    SUBCASE("empty population becomes a unit atom at zero") {
        const EmpiricalMeasure m = edge_measure(PopulationState{}, p);
        REQUIRE(m.atoms.size() == 1);
        CHECK(m.atoms[0].location == 0.0);
        CHECK(m.total_weight == 1.0);
    }

    SUBCASE("one particle a scale unit below the level maps to location 1") {
        const double x = ell - 1.0 / c;
        const EmpiricalMeasure m = edge_measure(state_at(0.0, {x}), p);
        REQUIRE(m.atoms.size() == 1);
        CHECK(m.atoms[0].location == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(m.atoms[0].weight ==
              doctest::Approx(std::exp(p.rho * x)).epsilon(1e-14));
        CHECK(m.total_weight == doctest::Approx(m.atoms[0].weight));
    }

    SUBCASE("total weight agrees with the summary weight y") {
        std::vector<double> xs;
        for (int i = 0; i < 100; ++i) xs.push_back(ell - 8.0 + 0.1 * i);
        const PopulationState s = state_at(1.0, xs);
        const EmpiricalMeasure m = edge_measure(s, p);
        const SummarySnapshot out = summary(s, p, {});
        CHECK(m.total_weight == doctest::Approx(out.y).epsilon(1e-13));
        for (const WeightedAtom& a : m.atoms)
            CHECK(a.location == doctest::Approx(c * (ell - xs[&a - m.atoms.data()])).epsilon(1e-10));
    }
}

TEST_CASE("ks distance against the normal reference") {
    SUBCASE("point mass at zero sits at exactly one half") {
        EmpiricalMeasure m;
        m.atoms = {{0.0, 1.0}};
        m.total_weight = 1.0;
        CHECK(distance(m, Reference::std_normal, Metric::ks) ==
              doctest::Approx(0.5).epsilon(1e-12));
    }

    SUBCASE("two weighted atoms, sup just below the upper atom") {
        EmpiricalMeasure m;
        m.atoms = {{-1.0, 0.25}, {1.0, 0.75}};
        m.total_weight = 1.0;
        // sup |F_emp - Phi| = Phi(1) - 0.25 approached from the left of 1
        CHECK(distance(m, Reference::std_normal, Metric::ks) ==
              doctest::Approx(0.5913447460685429).epsilon(1e-12));
    }

    SUBCASE("a large iid normal sample is close in ks") {
        Rng rng(20260816, 0);
        EmpiricalMeasure m;
        m.atoms.reserve(100000);
        for (int i = 0; i < 100000; ++i) m.atoms.push_back({rng.normal(), 1.0});
        m.total_weight = 100000.0;
        const double d = distance(m, Reference::std_normal, Metric::ks);
        CHECK(d < 0.01);
        CHECK(d > 1e-4);
    }

    SUBCASE("atom order does not matter") {
        EmpiricalMeasure m;
        m.atoms = {{0.7, 0.2}, {-0.3, 0.5}, {1.9, 0.1}, {0.0, 0.2}};
        m.total_weight = 1.0;
        const double d1 = distance(m, Reference::std_normal, Metric::ks);
        std::reverse(m.atoms.begin(), m.atoms.end());
        CHECK(distance(m, Reference::std_normal, Metric::ks) == d1);
    }
}

TEST_CASE("ks distance against the edge law") {
    SUBCASE("rejection sample from the density lands close") {
        Rng rng(777001, 0);
        CHECK(edge_density(1.32) < 0.43);  // proposal cap dominates the peak
        EmpiricalMeasure m;
        m.atoms = edge_rejection_sample(100000, rng);
        m.total_weight = 100000.0;
        const double d = distance(m, Reference::airy_edge, Metric::ks);
        CHECK(d < 0.01);
        CHECK(d > 1e-4);
    }

    SUBCASE("stratified quantile grid attains the step discretization error") {
        EmpiricalMeasure m;
        const int n = 2000;
        for (int j = 0; j < n; ++j)
            m.atoms.push_back({edge_quantile((j + 0.5) / n), 1.0});
        m.total_weight = n;
        const double d = distance(m, Reference::airy_edge, Metric::ks);
        CHECK(d > 0.2 / n);
        CHECK(d < 0.6 / n);
    }
}

TEST_CASE("wasserstein distance matches closed forms") {
    SUBCASE("point mass against the normal law") {
        // W1(delta_a, N(0,1)) = 2 phi(a) + a (2 Phi(a) - 1)
        EmpiricalMeasure m;
        m.atoms = {{0.0, 2.0}};
        m.total_weight = 2.0;  // non-unit mass, normalization is exercised
        CHECK(distance(m, Reference::std_normal, Metric::wasserstein1) ==
              doctest::Approx(0.7978845608028654).epsilon(1e-10));
        m.atoms[0].location = 1.5;
        CHECK(distance(m, Reference::std_normal, Metric::wasserstein1) ==
              doctest::Approx(1.5586135875252093).epsilon(1e-10));
    }

    SUBCASE("two symmetric atoms against the normal law") {
        EmpiricalMeasure m;
        m.atoms = {{-1.0, 0.5}, {1.0, 0.5}};
        m.total_weight = 1.0;
        CHECK(distance(m, Reference::std_normal, Metric::wasserstein1) ==
              doctest::Approx(0.5353773215478798).epsilon(1e-10));
    }

    SUBCASE("point mass against the edge law") {
        // W1(delta_a, edge) = int |y - a| h(y) dy, frozen by outside quadrature
        EmpiricalMeasure m;
        m.atoms = {{0.5, 1.0}};
        m.total_weight = 1.0;
        CHECK(distance(m, Reference::airy_edge, Metric::wasserstein1) ==
              doctest::Approx(1.3101710677332622).epsilon(1e-8));
        m.atoms[0].location = 1.0;
        CHECK(distance(m, Reference::airy_edge, Metric::wasserstein1) ==
              doctest::Approx(0.9537088358615948).epsilon(1e-8));
        m.atoms[0].location = 2.0;
        CHECK(distance(m, Reference::airy_edge, Metric::wasserstein1) ==
              doctest::Approx(0.8296597351543590).epsilon(1e-8));
    }

    SUBCASE("triangle sanity between point masses") {
        const std::vector<double> grid = {-2.0, -0.5, 0.0, 0.7, 1.4, 3.0};
        for (Reference ref : {Reference::std_normal, Reference::airy_edge}) {
            for (double a : grid) {
                for (double b : grid) {
                    EmpiricalMeasure ma, mb;
                    ma.atoms = {{a, 1.0}};
                    ma.total_weight = 1.0;
                    mb.atoms = {{b, 1.0}};
                    mb.total_weight = 1.0;
                    const double da =
                        distance(ma, ref, Metric::wasserstein1);
                    const double db =
                        distance(mb, ref, Metric::wasserstein1);
                    CHECK(da <= std::abs(a - b) + db + 1e-12);
                }
            }
        }
    }
}

TEST_CASE("distance rejects malformed measures") {
    EmpiricalMeasure m;
    CHECK_THROWS_AS(distance(m, Reference::std_normal, Metric::ks),
                    config_error);
    m.atoms = {{0.0, 1.0}};
    m.total_weight = 0.0;
    CHECK_THROWS_AS(distance(m, Reference::std_normal, Metric::ks),
                    config_error);
    m.total_weight = 2.0;  // disagrees with the atom weights
    CHECK_THROWS_AS(distance(m, Reference::std_normal, Metric::ks),
                    config_error);
    m.total_weight = 1.0;
    m.atoms[0].weight = -1.0;
    CHECK_THROWS_AS(distance(m, Reference::std_normal, Metric::wasserstein1),
                    config_error);
    m.atoms[0] = {std::nan(""), 1.0};
    CHECK_THROWS_AS(distance(m, Reference::std_normal, Metric::ks),
                    config_error);
}

TEST_CASE("predicted population follows the front weight") {
    const ModelParams p = design_point();

    SUBCASE("frozen factor and the orthogonality route") {
        CHECK(predicted_population(1.0, p) ==
              doctest::Approx(0.0315313407385337).epsilon(1e-10));
        // same number through the integral Ai'(gamma_1)^2 = int Ai(z+g1)^2 dz
        const double via_orth =
            std::exp(-p.rho * p.rho * p.rho / (3.0 * p.beta)) /
            airy_orth(1, 1);
        CHECK(predicted_population(1.0, p) ==
              doctest::Approx(via_orth).epsilon(1e-9));
    }

    SUBCASE("linear in the front weight") {
        CHECK(predicted_population(0.0, p) == 0.0);
        CHECK(predicted_population(3.7, p) ==
              doctest::Approx(3.7 * predicted_population(1.0, p))
                  .epsilon(1e-15));
    }

    SUBCASE("rejects bad inputs") {
        CHECK_THROWS_AS(predicted_population(-1.0, p), config_error);
        CHECK_THROWS_AS(predicted_population(std::nan(""), p), config_error);
        ModelParams crit = p;
        crit.beta = 0.0;
        CHECK_THROWS_AS(predicted_population(1.0, crit), config_error);
    }
}

TEST_CASE("weighted functional restricts strictly below the level") {
    const ModelParams p = design_point();
    const double ellA = level(p, 1.0);

    SUBCASE("unit integrand sums the exponential weights below the level") {
        const PopulationState s =
            state_at(0.0, {ellA - 3.0, ellA - 1.0, ellA, ellA + 2.0});
        const double got =
            weighted_functional(s, p, 1.0, [](double) { return 1.0; });
        const double want = std::exp(p.rho * (ellA - 3.0)) +
                            std::exp(p.rho * (ellA - 1.0));
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
    }

    SUBCASE("airy integrand reproduces the summary front weight") {
        const double c = std::cbrt(2.0 * p.beta);
        const double g1 = airy_zero(1);
        std::vector<double> xs = {ellA - 6.0, ellA - 2.5, ellA - 0.4,
                                  ellA + 1.0};
        const PopulationState s = state_at(0.0, xs);
        const double got = weighted_functional(
            s, p, 1.0,
            [&](double x) { return ai(c * (ellA - x) + g1); });
        CHECK(got ==
              doctest::Approx(summary(s, p, {1.0}).z[0]).epsilon(1e-12));
    }

    SUBCASE("empty population and missing integrand") {
        CHECK(weighted_functional(PopulationState{}, p, 0.0,
                                  [](double) { return 1.0; }) == 0.0);
        CHECK_THROWS_AS(
            weighted_functional(PopulationState{}, p, 0.0,
                                std::function<double(double)>{}),
            config_error);
    }
}

TEST_CASE("martingale test tracks the decay and flags plan mismatches") {
    const ModelParams p = design_point();
    ReplicaPlan plan;
    plan.params = p;
    plan.init = ReplicaPlan::Init::point;
    plan.init_x = level(p, 1.0) - 1.0;
    plan.barrier = Barrier::fixed(1.0);
    plan.horizon = 6.0;
    plan.snapshot_times = {2.0, 6.0};
    plan.replicas = 800;
    plan.step.dt_max = 0.01;
    const std::vector<ReplicaResult> ensemble = run_replicas(plan, 515151);

    SUBCASE("rows follow the closed-form decay of the mean") {
        const std::vector<MartingaleRow> rows =
            martingale_test(ensemble, plan, 1.0);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].time == 2.0);
        CHECK(rows[1].time == 6.0);
        const double z0 = z_weight(p, 1.0, plan.init_x);
        CHECK(rows[0].target ==
              doctest::Approx(std::exp(-p.beta * 2.0 / p.rho) * z0)
                  .epsilon(1e-14));
        CHECK(rows[1].target / rows[0].target ==
              doctest::Approx(std::exp(-p.beta * 4.0 / p.rho))
                  .epsilon(1e-14));
        for (const MartingaleRow& r : rows) {
            CHECK(r.se > 0.0);
            CHECK(r.variance >= 0.0);
            CHECK(std::abs(r.z_score) <= 3.5);
            CHECK(r.z_score ==
                  doctest::Approx((r.mean - r.target) / r.se)
                      .epsilon(1e-12));
        }
        // undoing the decay and predicting the population is time invariant
        const double pred0 = predicted_population(
            rows[0].target * std::exp(p.beta * rows[0].time / p.rho), p);
        const double pred1 = predicted_population(
            rows[1].target * std::exp(p.beta * rows[1].time / p.rho), p);
        CHECK(pred0 == doctest::Approx(pred1).epsilon(1e-12));
    }

    SUBCASE("plan mismatches are usage errors") {
        ReplicaPlan wrong = plan;
        wrong.barrier = Barrier::none();
        CHECK_THROWS_AS(martingale_test(ensemble, wrong, 1.0), config_error);
        wrong = plan;
        wrong.barrier = Barrier::fixed(0.0);
        CHECK_THROWS_AS(martingale_test(ensemble, wrong, 1.0), config_error);
        wrong = plan;
        wrong.init = ReplicaPlan::Init::edge_cloud;
        CHECK_THROWS_AS(martingale_test(ensemble, wrong, 1.0), config_error);
        CHECK_THROWS_AS(martingale_test({}, plan, 1.0), config_error);
        std::vector<ReplicaResult> trimmed(ensemble.begin(),
                                           ensemble.begin() + 2);
        trimmed[1].snapshots.pop_back();
        CHECK_THROWS_AS(martingale_test(trimmed, plan, 1.0), config_error);
    }
}

}  // TEST_SUITE
