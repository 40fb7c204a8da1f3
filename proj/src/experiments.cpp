#include "bbmwave/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <system_error>
#include <vector>

#include "bbmwave/airy.hpp"
#include "bbmwave/densities.hpp"
#include "bbmwave/engine.hpp"
#include "bbmwave/errors.hpp"
#include "bbmwave/heuristics.hpp"
#include "bbmwave/model.hpp"
#include "bbmwave/quad.hpp"
#include "bbmwave/stats.hpp"
#include "json.hpp"

namespace bbmwave {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string num(std::uint64_t v) {
    char buf[24];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

// CSV sink; all numeric cells use the shortest round-trip form from num().
struct Csv {
    std::ofstream out;
    Csv(const fs::path& path, const std::string& header) {
        out.open(path, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << header << '\n';
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
    void close() {
        out.flush();
        if (!out) throw std::runtime_error("csv write failed");
        out.close();
    }
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

void atomic_write(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    write_text(tmp, text);
    fs::rename(tmp, path);
}

json manifest_json(const ExperimentConfig& c, double wall_s) {
    json m;
    m["experiment"] = c.experiment;
    m["seed"] = c.seed;
    m["config"] = json::parse(serialize_config(c));
    m["version"] = {{"bbmwave", "0.1.0"}};
    if (wall_s >= 0.0)
        m["wall_time_s"] = wall_s;
    else
        m["wall_time_s"] = nullptr;
    return m;
}

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
    MeanSe out;
    if (v.empty()) return out;
    double s = 0.0;
    for (double x : v) s += x;
    out.mean = s / static_cast<double>(v.size());
    if (v.size() < 2) return out;
    double q = 0.0;
    for (double x : v) q += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(q / (static_cast<double>(v.size()) - 1.0) /
                       static_cast<double>(v.size()));
    return out;
}

void write_histogram(const fs::path& path, const EmpiricalMeasure& m,
                     double lo, double hi, int bins) {
    std::vector<double> mass(static_cast<std::size_t>(bins), 0.0);
    const double width = (hi - lo) / bins;
    for (const WeightedAtom& a : m.atoms) {
        int k = static_cast<int>(std::floor((a.location - lo) / width));
        k = std::clamp(k, 0, bins - 1);  // tail mass folds into edge bins
        mass[static_cast<std::size_t>(k)] += a.weight / m.total_weight;
    }
    Csv csv(path, "bin_lo,bin_hi,mass");
    for (int k = 0; k < bins; ++k)
        csv.row({num(lo + k * width), num(lo + (k + 1) * width),
                 num(mass[static_cast<std::size_t>(k)])});
    csv.close();
}

// --- simulate ------------------------------------------------------------

json run_simulate(const ExperimentConfig& c, const fs::path& dir) {
    const ReplicaPlan plan = to_plan(c);
    const double offset =
        c.barrier.kind == Barrier::Kind::none ? 0.0 : c.barrier.A;
    const bool with_z = c.params.beta > 0.0;

    Csv snaps(dir / "snapshots.csv",
              "replica,time,n,y,z,min_position,max_position");
    Csv hits(dir / "absorptions.csv", "replica,time,position,particle_id");

    std::uint64_t births = 0, deaths = 0, absorbed = 0;
    double max_seen = -std::numeric_limits<double>::infinity();
    std::vector<double> final_n, final_y;

    run_replicas(plan, c.seed, [&](ReplicaResult&& r) {
        for (const PopulationState& s : r.snapshots) {
            const SummarySnapshot sum =
                summary(s, c.params, with_z ? std::vector<double>{offset}
                                            : std::vector<double>{});
            snaps.row({num(r.replica), num(sum.time), num(sum.n), num(sum.y),
                       num(with_z ? sum.z[0]
                                  : std::numeric_limits<double>::quiet_NaN()),
                       num(sum.min_position), num(sum.max_position)});
        }
        if (!r.snapshots.empty()) {
            const PopulationState& last = r.snapshots.back();
            final_n.push_back(static_cast<double>(last.size()));
            final_y.push_back(summary(last, c.params, {}).y);
        }
        for (const AbsorptionEvent& e : r.log.absorptions)
            hits.row({num(r.replica), num(e.time), num(e.position),
                      num(e.id)});
        births += r.log.births;
        deaths += r.log.deaths;
        absorbed += r.log.absorptions.size();
        max_seen = std::max(max_seen, r.log.max_position_seen);
    });
    snaps.close();
    hits.close();

    json metrics;
    metrics["replicas"] = c.replicas;
    metrics["births_total"] = births;
    metrics["deaths_total"] = deaths;
    metrics["absorbed_total"] = absorbed;
    metrics["max_position_seen"] = max_seen;
    if (!final_n.empty()) {
        const MeanSe n = mean_se(final_n);
        const MeanSe y = mean_se(final_y);
        metrics["final_n_mean"] = n.mean;
        metrics["final_n_se"] = n.se;
        metrics["final_y_mean"] = y.mean;
        metrics["final_y_se"] = y.se;
    }
    return metrics;
}

// --- verify-airy ----------------------------------------------------------

json run_verify_airy(const ExperimentConfig&, const fs::path& dir) {
    Csv csv(dir / "airy.csv", "x,ai,ai_prime");
    double ode_max = 0.0;
    const double h = 0.01;  // fourth-order stencil keeps noise below 1e-6
    for (int i = 0; i <= 500; ++i) {
        const double x = -15.0 + 0.05 * i;
        csv.row({num(x), num(ai(x)), num(ai_prime(x))});
        const double second = (-ai(x - 2 * h) + 16 * ai(x - h) -
                               30 * ai(x) + 16 * ai(x + h) - ai(x + 2 * h)) /
                              (12 * h * h);
        ode_max = std::max(ode_max, std::abs(second - x * ai(x)));
    }
    csv.close();

    double diag_err = 0.0, offdiag = 0.0;
    for (int j = 1; j <= 10; ++j) {
        for (int k = j; k <= 10; ++k) {
            const double v = airy_orth(j, k);
            if (j == k) {
                const double d = airy_zero_prime(k);
                diag_err = std::max(diag_err, std::abs(v - d * d));
            } else {
                offdiag = std::max(offdiag, std::abs(v));
            }
        }
    }

    json metrics;
    metrics["gamma1"] = airy_zero(1);
    metrics["ai_prime_gamma1"] = airy_zero_prime(1);
    metrics["edge_norm"] = edge_norm();
    metrics["ode_residual_max"] = ode_max;
    metrics["orth_diag_max_err"] = diag_err;
    metrics["orth_offdiag_max"] = offdiag;
    metrics["laplace_growth_6"] = laplace_growth(6.0);
    return metrics;
}

// --- verify-density --------------------------------------------------------

json run_verify_density(const ExperimentConfig& c, const fs::path& dir) {
    const ModelParams& p = c.params;

    double ck_max = 0.0;
    const struct {
        double t, s, x, y;
    } ck_cases[] = {{4.0, 1.5, 0.0, 1.0},
                    {2.0, 1.0, -3.0, 2.0},
                    {8.0, 3.0, 0.0, -5.0},
                    {6.0, 2.0, 12.0, 10.0},
                    {10.0, 5.0, 5.0, 0.0}};
    for (const auto& q : ck_cases) {
        const double direct = free_density(p, q.t, q.x, q.y);
        const double lo = std::min(q.x, q.y), hi = std::max(q.x, q.y);
        const double pts[] = {-80.0, lo, 0.5 * (lo + hi), hi, 90.0};
        const double glued = integrate_panels(
            [&](double z) {
                return free_density(p, q.s, q.x, z) *
                       free_density(p, q.t - q.s, z, q.y);
            },
            pts, 5, 1e-14 + 1e-9 * direct);
        ck_max = std::max(ck_max, std::abs(glued / direct - 1.0));
    }

    double mass_max = 0.0;
    const struct {
        double t, x;
    } mass_cases[] = {{5.0, 0.0}, {10.0, 0.0}, {3.0, 1.0}};
    for (const auto& q : mass_cases) {
        const double quad = integrate(
            [&](double y) { return free_density(p, q.t, q.x, y); }, -60.0,
            60.0, 1e-12);
        mass_max =
            std::max(mass_max, std::abs(quad - free_mass(p, q.t, q.x)));
    }

    double mart_max = 0.0;
    if (p.beta > 0.0) {
        const struct {
            double A, t;
            int terms;
            double depth;
        } mart_cases[] = {{0.0, 2.0 * std::pow(p.beta, -2.0 / 3.0), 64, 45.0},
                          {1.0, 2.0 * std::pow(p.beta, -2.0 / 3.0), 64, 45.0},
                          {0.0, 10.0, 256, 28.0},
                          {1.0, 10.0, 256, 28.0}};
        for (const auto& q : mart_cases) {
            const SpectralSeries series{q.terms, 1e-10};
            const double ell = level(p, q.A);
            const double x = ell - 2.0;
            const double lhs = integrate(
                [&](double y) {
                    return killed_density(p, q.A, q.t, x, y, series) *
                           z_weight(p, q.A, y);
                },
                ell - q.depth, ell, 1e-10, 20'000'000, 1e-9);
            const double rhs =
                std::exp(-q.A * p.beta * q.t / p.rho) * z_weight(p, q.A, x);
            mart_max = std::max(mart_max, std::abs(lhs / rhs - 1.0));
        }
    }

    const double t = c.horizon > 0.0 ? c.horizon : 1.0;
    const double center = c.init_x - p.rho * t;
    const double sd = std::sqrt(t);
    Csv csv(dir / "density_profile.csv", "y,density");
    for (int i = 0; i <= 300; ++i) {
        const double y = center - 6.0 * sd + i * (12.0 * sd / 300.0);
        csv.row({num(y), num(free_density(p, t, c.init_x, y))});
    }
    csv.close();

    json metrics;
    metrics["ck_max_rel"] = ck_max;
    metrics["mass_max_abs"] = mass_max;
    metrics["martingale_max_rel"] = mart_max;
    return metrics;
}

// --- martingale -------------------------------------------------------------

json run_martingale(const ExperimentConfig& c, const fs::path& dir) {
    const ReplicaPlan plan = to_plan(c);
    const std::vector<ReplicaResult> ensemble = run_replicas(plan, c.seed);
    const std::vector<MartingaleRow> rows =
        martingale_test(ensemble, plan, c.barrier.A);

    Csv csv(dir / "martingale.csv", "time,mean,se,target,z_score,variance");
    double max_z = 0.0;
    for (const MartingaleRow& r : rows) {
        csv.row({num(r.time), num(r.mean), num(r.se), num(r.target),
                 num(r.z_score), num(r.variance)});
        max_z = std::max(max_z, std::abs(r.z_score));
    }
    csv.close();

    json metrics;
    metrics["offset"] = c.barrier.A;
    metrics["replicas"] = c.replicas;
    metrics["rows"] = rows.size();
    metrics["max_abs_z"] = max_z;
    return metrics;
}

// --- bulk-gauss / edge-profile ----------------------------------------------

json run_bulk_gauss(const ExperimentConfig& c, const fs::path& dir) {
    const ReplicaPlan plan = to_plan(c);

    // One unit of ensemble weight per replica (empty ones count as the
    // unit atom at zero, matching bulk_measure). Population size is
    // correlated with position, so weighting atoms equally across the
    // whole ensemble would drag the aggregate toward the largest replicas.
    EmpiricalMeasure pool;
    std::uint64_t n_total = 0, empty_replicas = 0;
    run_replicas(plan, c.seed, [&](ReplicaResult&& r) {
        const PopulationState& last = r.snapshots.back();
        n_total += last.size();
        if (last.size() == 0) ++empty_replicas;
        EmpiricalMeasure part = bulk_measure(last, c.params);
        for (WeightedAtom& a : part.atoms) a.weight /= part.total_weight;
        pool.atoms.insert(pool.atoms.end(), part.atoms.begin(),
                          part.atoms.end());
        pool.total_weight += 1.0;
    });

    double mean = 0.0;
    for (const WeightedAtom& a : pool.atoms) mean += a.location * a.weight;
    mean /= pool.total_weight;
    double var = 0.0;
    for (const WeightedAtom& a : pool.atoms)
        var += a.weight * (a.location - mean) * (a.location - mean);
    var /= pool.total_weight;

    write_histogram(dir / "bulk_hist.csv", pool, -5.0, 5.0, 100);

    json metrics;
    metrics["ks_to_normal"] =
        distance(pool, Reference::std_normal, Metric::ks);
    metrics["w1_to_normal"] =
        distance(pool, Reference::std_normal, Metric::wasserstein1);
    metrics["mean"] = mean;
    metrics["variance"] = var;
    metrics["n_total"] = n_total;
    metrics["empty_replicas"] = empty_replicas;
    return metrics;
}

json run_edge_profile(const ExperimentConfig& c, const fs::path& dir) {
    const ReplicaPlan plan = to_plan(c);

    // Each replica's edge measure enters with unit total weight (empty
    // replicas are the unit atom at zero, matching edge_measure). Pooling
    // raw weights instead would let rare high excursions dominate the
    // ensemble through their e^{rho x} factors.
    EmpiricalMeasure pool;
    std::vector<double> ys;
    std::uint64_t n_total = 0, empty_replicas = 0;
    run_replicas(plan, c.seed, [&](ReplicaResult&& r) {
        const PopulationState& last = r.snapshots.back();
        n_total += last.size();
        if (last.size() == 0) ++empty_replicas;
        EmpiricalMeasure part = edge_measure(last, c.params);
        ys.push_back(last.size() == 0 ? 0.0 : part.total_weight);
        for (WeightedAtom& a : part.atoms) a.weight /= part.total_weight;
        pool.atoms.insert(pool.atoms.end(), part.atoms.begin(),
                          part.atoms.end());
        pool.total_weight += 1.0;
    });
    const MeanSe y = mean_se(ys);

    write_histogram(dir / "edge_hist.csv", pool, 0.0, 8.0, 80);

    json metrics;
    metrics["ks_to_edge"] = distance(pool, Reference::airy_edge, Metric::ks);
    metrics["y_mean"] = y.mean;
    metrics["y_se"] = y.se;
    metrics["n_total"] = n_total;
    metrics["empty_replicas"] = empty_replicas;
    return metrics;
}

// --- survival ----------------------------------------------------------------

json run_survival(const ExperimentConfig& c, const fs::path& dir) {
    const SurvivalEstimate est = survival_probe(
        c.params, c.init_x, c.horizon, c.replicas, c.seed, c.step);

    Csv csv(dir / "survival.csv", "p_hat,ci_low,ci_high,replicas");
    csv.row({num(est.p_hat), num(est.ci_low), num(est.ci_high),
             num(est.replicas)});
    csv.close();

    json metrics;
    metrics["p_hat"] = est.p_hat;
    metrics["ci_low"] = est.ci_low;
    metrics["ci_high"] = est.ci_high;
    metrics["replicas"] = est.replicas;
    if (c.params.beta > 0.0) {
        metrics["bound"] =
            2.0 * c.params.beta * c.init_x / c.params.delta;
        metrics["suggested_horizon"] =
            survival_horizon(c.params, c.init_x);
    }
    return metrics;
}

// --- hits ---------------------------------------------------------------------

json run_hits(const ExperimentConfig& c, const fs::path& dir) {
    const ReplicaPlan plan = to_plan(c);
    const std::size_t windows = c.snapshot_times.size() - 1;
    std::vector<std::vector<double>> counts(
        windows, std::vector<double>(c.replicas, 0.0));

    run_replicas(plan, c.seed, [&](ReplicaResult&& r) {
        for (const AbsorptionEvent& e : r.log.absorptions) {
            for (std::size_t w = 0; w < windows; ++w) {
                if (e.time > c.snapshot_times[w] &&
                    e.time <= c.snapshot_times[w + 1])
                    counts[w][r.replica] += 1.0;
            }
        }
    });

    // wide series: certifies the boundary flux down to window starts ~ 1
    const SpectralSeries series{4800, 1e-10};
    Csv csv(dir / "hits.csv", "t_lo,t_hi,mean,se,expected,z_score");
    double max_z = 0.0, total_mean = 0.0, total_expected = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
        const MeanSe ms = mean_se(counts[w]);
        const double expected =
            expected_hits(c.params, c.barrier.A, c.snapshot_times[w],
                          c.snapshot_times[w + 1], c.init_x, series);
        const double z = ms.se > 0.0 ? (ms.mean - expected) / ms.se : 0.0;
        csv.row({num(c.snapshot_times[w]), num(c.snapshot_times[w + 1]),
                 num(ms.mean), num(ms.se), num(expected), num(z)});
        max_z = std::max(max_z, std::abs(z));
        total_mean += ms.mean;
        total_expected += expected;
    }
    csv.close();

    json metrics;
    metrics["windows"] = windows;
    metrics["replicas"] = c.replicas;
    metrics["max_abs_z"] = max_z;
    metrics["total_mean"] = total_mean;
    metrics["total_expected"] = total_expected;
    return metrics;
}

// --- heuristic-curve -------------------------------------------------------------

json run_heuristic_curve(const ExperimentConfig& c, const fs::path& dir) {
    const ModelParams& p = c.params;
    const double sd = std::sqrt(p.rho / p.beta);
    const double top = p.rho * p.rho / (2.0 * p.beta);
    const double lo = -2.0 * sd;
    const double hi = std::min(top, 2.0 * sd);

    Csv csv(dir / "curve.csv", "z,exponent,gauss");
    for (int i = 0; i <= 200; ++i) {
        const double z = lo + i * ((hi - lo) / 200.0);
        csv.row({num(z), num(ld_exponent(p, z)),
                 num(ld_exponent_gauss(p, z))});
    }
    csv.close();

    const double h1 = 1e-4, h2 = 1e-3;
    double dev = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double z = -sd + i * (2.0 * sd / 40.0);
        dev = std::max(dev,
                       std::abs(ld_exponent(p, z) - ld_exponent_gauss(p, z)));
    }

    json metrics;
    metrics["g0"] = ld_exponent(p, 0.0);
    metrics["gprime0_fd"] =
        (ld_exponent(p, h1) - ld_exponent(p, -h1)) / (2.0 * h1);
    metrics["gsecond0_fd"] = (ld_exponent(p, h2) - 2.0 * ld_exponent(p, 0.0) +
                              ld_exponent(p, -h2)) /
                             (h2 * h2);
    metrics["gauss_max_abs_diff"] = dev;
    return metrics;
}

// --- calibrate ---------------------------------------------------------------------

json run_calibrate(const ExperimentConfig& c, const fs::path& dir) {
    const DiscreteInputs& d = *c.discrete;
    const DiscreteCorrespondence m = discrete_map(d.N, d.mu, d.s);
    const double forward =
        std::exp(std::log(m.beta) / 3.0 - 3.0 * std::log(m.rho) +
                 m.rho * m.rho * m.rho / (6.0 * m.beta) -
                 m.rho * airy_zero(1) / std::cbrt(2.0 * m.beta));

    Csv csv(dir / "calibrate.csv", "N,mu,s,beta,rho,selection_index");
    csv.row({num(d.N), num(d.mu), num(d.s), num(m.beta), num(m.rho),
             num(m.selection_index)});
    csv.close();

    json metrics;
    metrics["beta"] = m.beta;
    metrics["rho"] = m.rho;
    metrics["selection_index"] = m.selection_index;
    metrics["forward_n"] = forward;
    metrics["n_input"] = d.N;
    return metrics;
}

}  // namespace

int run_experiment(const ExperimentConfig& c) {
    const auto t0 = std::chrono::steady_clock::now();
    fs::path dir;
    try {
        validate(c);
        dir = fs::path(c.out_dir);
        fs::create_directories(dir);
        write_text(dir / "manifest.json",
                   manifest_json(c, -1.0).dump(2) + "\n");
    } catch (const config_error& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return kExitNumeric;
    }

    try {
        json metrics;
        if (c.experiment == "simulate")
            metrics = run_simulate(c, dir);
        else if (c.experiment == "verify-airy")
            metrics = run_verify_airy(c, dir);
        else if (c.experiment == "verify-density")
            metrics = run_verify_density(c, dir);
        else if (c.experiment == "martingale")
            metrics = run_martingale(c, dir);
        else if (c.experiment == "bulk-gauss")
            metrics = run_bulk_gauss(c, dir);
        else if (c.experiment == "edge-profile")
            metrics = run_edge_profile(c, dir);
        else if (c.experiment == "survival")
            metrics = run_survival(c, dir);
        else if (c.experiment == "hits")
            metrics = run_hits(c, dir);
        else if (c.experiment == "heuristic-curve")
            metrics = run_heuristic_curve(c, dir);
        else
            metrics = run_calibrate(c, dir);

        metrics["experiment"] = c.experiment;
        metrics["seed"] = c.seed;
        atomic_write(dir / "metrics.json", metrics.dump(2) + "\n");

        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                          t0)
                .count();
        write_text(dir / "manifest.json",
                   manifest_json(c, wall).dump(2) + "\n");
        return kExitOk;
    } catch (const config_error& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "bbmwave: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace bbmwave
