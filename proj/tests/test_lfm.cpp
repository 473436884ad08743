#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "coastnav/lfm.hpp"
#include "testutil.hpp"

using namespace coastnav;

namespace {

LfmParams default_params() {
    LfmParams p;
    p.p_hit = 0.9;
    p.p_random = 0.1;
    p.sigma_lfm = 25.0;
    p.rho_max = 5000.0;
    return p;
}

/// samples forming a single point at a known NED location
ShorelineSamples point_samples(const GeodeticPoint& origin, NedPoint p) {
    return ShorelineSamples(origin, {p}, 5.0);
}

}  // namespace

TEST_CASE("observation endpoint in world coordinates") {
    const GeodeticPoint origin = testutil::kOrigin;

    SUBCASE("zero range is the pose position") {
        const Pose pose{origin, 1.234};
        const GeodeticPoint p = observation_to_geo({1e-12, 0.7}, pose);
        CHECK(std::abs(p.lat - origin.lat) < 1e-15);
        CHECK(std::abs(p.lon - origin.lon) < 1e-15);
    }
    SUBCASE("dead ahead with zero heading is due north") {
        const GeodeticPoint p = observation_to_geo({1000.0, 0.0}, {origin, 0.0});
        const NedPoint v = to_ned(p, origin);
        CHECK(v.north == doctest::Approx(1000.0).epsilon(1e-12));
        CHECK(std::abs(v.east) < 1e-9);
    }
    SUBCASE("bearing plus heading add up to south") {
        const GeodeticPoint p = observation_to_geo({1000.0, kPi / 2.0}, {origin, kPi / 2.0});
        const GeodeticPoint expected = to_geo({-1000.0, 0.0}, origin);
        CHECK(p.lat == doctest::Approx(expected.lat).epsilon(1e-14));
        CHECK(p.lon == doctest::Approx(expected.lon).epsilon(1e-14));
    }
}

TEST_CASE("likelihood field model values") {
    const GeodeticPoint origin = testutil::kOrigin;
    const LfmParams params = default_params();
    const Pose pose{origin, 0.0};

    SUBCASE("zero distance peak") {
        // shoreline sample exactly at the observation endpoint
        const auto samples = point_samples(origin, {1000.0, 0.0});
        const double value = likelihood({1000.0, 0.0}, pose, samples, params);
        const double expected = 0.9 / (std::sqrt(2.0 * kPi) * 25.0) + 0.1 / 5000.0;
        CHECK(value == doctest::Approx(expected).epsilon(1e-9));
    }
    SUBCASE("far from any shoreline only the clutter floor remains") {
        const auto samples = point_samples(origin, {1000.0, 0.0});
        // endpoint 400 m (16 sigma) from the only sample
        const double value = likelihood({600.0, 0.0}, pose, samples, params);
        CHECK(value == doctest::Approx(0.1 / 5000.0).epsilon(1e-15));
    }
    SUBCASE("closed form at D = sigma, extended-precision oracle") {
        const auto samples = point_samples(origin, {1000.0, 0.0});
        const double value = likelihood({975.0, 0.0}, pose, samples, params);
        const long double expected =
            0.9L * expl(-0.5L) / (sqrtl(2.0L * 3.14159265358979323846L) * 25.0L) +
            0.1L / 5000.0L;
        CHECK(value == doctest::Approx(static_cast<double>(expected)).epsilon(1e-9));
    }
    SUBCASE("clutter floor is a lower bound everywhere") {
        const Chart chart = testutil::archipelago_chart(origin);
        const auto samples = extract_shoreline(chart, origin, 6000.0, 5.0);
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> range(1.0, 5000.0), angle(0.0, 2.0 * kPi);
        for (int i = 0; i < 300; ++i) {
            const double v = likelihood({range(rng), angle(rng)}, pose, samples, params);
            CHECK(v >= 0.1 / 5000.0);
        }
    }
}

TEST_CASE("scan log likelihood") {
    const GeodeticPoint origin = testutil::kOrigin;
    const LfmParams params = default_params();
    const Pose pose{origin, 0.0};
    const Chart chart = testutil::archipelago_chart(origin);
    const auto samples = extract_shoreline(chart, origin, 6000.0, 5.0);

    SUBCASE("single observation scan") {
        RadarScan scan;
        scan.observations = {{1800.0, 0.4}};
        CHECK(scan_log_likelihood(scan, pose, samples, params) ==
              doctest::Approx(std::log(likelihood({1800.0, 0.4}, pose, samples, params))));
    }
    SUBCASE("concatenation adds log likelihoods") {
        RadarScan a, b, ab;
        a.observations = {{1800.0, 0.4}, {2000.0, 1.0}};
        b.observations = {{900.0, 2.0}, {2500.0, 5.0}, {1200.0, 3.3}};
        ab.observations = a.observations;
        ab.observations.insert(ab.observations.end(), b.observations.begin(),
                               b.observations.end());
        CHECK(scan_log_likelihood(ab, pose, samples, params) ==
              doctest::Approx(scan_log_likelihood(a, pose, samples, params) +
                              scan_log_likelihood(b, pose, samples, params))
                  .epsilon(1e-12));
    }
    SUBCASE("permutation invariance") {
        RadarScan scan;
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> range(100.0, 4000.0), angle(0.0, 2.0 * kPi);
        for (int i = 0; i < 64; ++i) scan.observations.push_back({range(rng), angle(rng)});
        RadarScan shuffled = scan;
        std::shuffle(shuffled.observations.begin(), shuffled.observations.end(), rng);
        CHECK(scan_log_likelihood(scan, pose, samples, params) ==
              doctest::Approx(scan_log_likelihood(shuffled, pose, samples, params))
                  .epsilon(1e-12));
    }
    SUBCASE("empty scan is an error") {
        CHECK_THROWS_AS(scan_log_likelihood(RadarScan{}, pose, samples, params),
                        std::invalid_argument);
    }
    SUBCASE("grid search peaks at the true pose for a noise-free scan") {
        RadarNoiseParams noise;
        noise.n_spokes = 360;
        const RadarScan scan = cast_scan(pose, samples, noise, 11);
        REQUIRE(!scan.observations.empty());

        double best = -1e300;
        double best_dn = 0.0, best_de = 0.0;
        for (int i = -10; i <= 10; ++i) {
            for (int j = -10; j <= 10; ++j) {
                const double dn = 20.0 * i, de = 20.0 * j;
                const double ll =
                    scan_log_likelihood(scan, apply_offset(pose, {dn, de, 0.0}), samples, params);
                if (ll > best) {
                    best = ll;
                    best_dn = dn;
                    best_de = de;
                }
            }
        }
        CHECK(std::abs(best_dn) <= 20.0);
        CHECK(std::abs(best_de) <= 20.0);
    }
}

TEST_CASE("particle swarm optimizer") {
    PsoConfig config;
    config.bound_lower = {-500.0, -500.0, -0.3};
    config.bound_upper = {500.0, 500.0, 0.3};
    config.n_particles = 40;
    config.n_iters = 80;

    SUBCASE("quadratic bowl") {
        auto objective = [](const PoseOffset& x) {
            return -(x.dn * x.dn + x.de * x.de + 1e6 * x.dpsi * x.dpsi);
        };
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            config.rng_seed = seed;
            const PsoResult r = pso_maximize(objective, config);
            CHECK(std::abs(r.argmax.dn) < 10.0);  // 1% of box width
            CHECK(std::abs(r.argmax.de) < 10.0);
            CHECK(std::abs(r.argmax.dpsi) < 0.006);
        }
    }
    SUBCASE("no iterations returns the best initial particle") {
        config.n_particles = 1;
        config.n_iters = 0;
        config.rng_seed = 12345;
        std::vector<PoseOffset> evaluated;
        auto objective = [&](const PoseOffset& x) {
            evaluated.push_back(x);
            return -x.dn * x.dn;
        };
        const PsoResult r = pso_maximize(objective, config);
        REQUIRE(evaluated.size() == 1);
        CHECK(r.argmax.dn == evaluated[0].dn);
        CHECK(r.argmax.de == evaluated[0].de);
        CHECK(r.argmax.dpsi == evaluated[0].dpsi);
        CHECK(r.value == -evaluated[0].dn * evaluated[0].dn);
    }
    SUBCASE("bimodal objective: global basin found in at least 28 of 30 restarts") {
        auto bump = [](double x, double c, double w) {
            const double z = (x - c) / w;
            return std::exp(-z * z);
        };
        auto objective = [&](const PoseOffset& x) {
            return 2.0 * bump(x.dn, 150.0, 40.0) + 1.0 * bump(x.dn, -200.0, 40.0) -
                   1e-6 * (x.de * x.de) - x.dpsi * x.dpsi;
        };
        // dense-grid verification that the global peak is the 150 m bump
        double grid_best = -1e300, grid_arg = 0.0;
        for (double dn = -500.0; dn <= 500.0; dn += 0.5) {
            const double v = objective({dn, 0.0, 0.0});
            if (v > grid_best) {
                grid_best = v;
                grid_arg = dn;
            }
        }
        REQUIRE(std::abs(grid_arg - 150.0) < 1.0);

        int found = 0;
        for (std::uint64_t seed = 0; seed < 30; ++seed) {
            config.rng_seed = seed;
            const PsoResult r = pso_maximize(objective, config);
            if (std::abs(r.argmax.dn - 150.0) < 60.0) ++found;
        }
        CHECK(found >= 28);
    }
    SUBCASE("deterministic given the seed") {
        auto objective = [](const PoseOffset& x) { return -(x.dn * x.dn + x.de * x.de); };
        config.rng_seed = 9;
        const PsoResult a = pso_maximize(objective, config);
        const PsoResult b = pso_maximize(objective, config);
        CHECK(a.argmax.dn == b.argmax.dn);
        CHECK(a.value == b.value);
    }
}

TEST_CASE("first stage estimation") {
    const GeodeticPoint origin = testutil::kOrigin;
    const Chart chart = testutil::archipelago_chart(origin);
    const LfmParams params = default_params();

    PsoConfig pso;
    pso.n_particles = 40;
    pso.n_iters = 60;
    pso.bound_lower = {-350.0, -350.0, -0.15};
    pso.bound_upper = {350.0, 350.0, 0.15};

    RadarNoiseParams noise;
    noise.n_spokes = 360;

    const Pose truth{origin, 0.2};
    const auto truth_samples = extract_shoreline(chart, origin, 5100.0, 5.0);

    SUBCASE("noise-free scan from a displaced prior") {
        const RadarScan scan = cast_scan(truth, truth_samples, noise, 21);
        const Pose prior{to_geo({200.0, 200.0}, origin), truth.heading + deg_to_rad(5.0)};
        pso.rng_seed = 77;
        const PoseEstimate est = estimate_first_stage(scan, prior, chart, params, pso);
        REQUIRE(est.available);
        CHECK(est.stage == EstimateStage::first);
        const NedPoint err = to_ned(est.mean.position, origin);
        CHECK(err.norm() < 10.0);  // 2x sample spacing
        CHECK(std::abs(wrap_pi(est.mean.heading - truth.heading)) < 0.02);
        CHECK(est.cov(0, 0) == doctest::Approx(61.0 * 61.0));
        CHECK(!est.ridge_north);
        CHECK(!est.ridge_east);
    }
    SUBCASE("moderate noise stays within the first-stage error scale") {
        noise.p_detect = 0.8;
        noise.sigma_range = 25.0;
        noise.p_clutter_per_spoke = 0.1;
        const RadarScan scan = cast_scan(truth, truth_samples, noise, 22);
        const Pose prior{to_geo({200.0, 0.0}, origin), truth.heading};
        pso.rng_seed = 78;
        const PoseEstimate est = estimate_first_stage(scan, prior, chart, params, pso);
        REQUIRE(est.available);
        CHECK(to_ned(est.mean.position, origin).norm() < 61.0);
    }
    SUBCASE("featureless straight coastline flags the unconstrained axis") {
        const Chart coast = testutil::straight_coast_chart(origin, 2000.0);
        const auto coast_samples = extract_shoreline(coast, origin, 5100.0, 5.0);
        const Pose pose{origin, 0.0};
        const RadarScan scan = cast_scan(pose, coast_samples, noise, 23);
        pso.rng_seed = 79;
        const PoseEstimate est = estimate_first_stage(scan, pose, coast, params, pso);
        REQUIRE(est.available);
        CHECK(est.ridge_east);
        CHECK(!est.ridge_north);
    }
    SUBCASE("no land in range reports unavailable") {
        Chart empty_chart;
        empty_chart.shorelines.push_back(
            {to_geo({50000.0, 0.0}, origin), to_geo({50000.0, 1000.0}, origin)});
        RadarScan scan;
        scan.observations = {{1000.0, 0.0}};
        scan.rho_max = 5000.0;
        const PoseEstimate est =
            estimate_first_stage(scan, {origin, 0.0}, empty_chart, params, pso);
        CHECK(!est.available);
    }
    SUBCASE("translation equivariance") {
        const NedPoint shift{800.0, -600.0};
        // scene B is scene A translated in the tangent frame at the origin
        Chart chart_b;
        for (const auto& line : chart.shorelines) {
            std::vector<GeodeticPoint> moved;
            for (const auto& p : line) moved.push_back(to_geo(to_ned(p, origin) + shift, origin));
            chart_b.shorelines.push_back(std::move(moved));
        }
        const Pose truth_b{to_geo(shift, origin), truth.heading};
        const auto samples_b = extract_shoreline(chart_b, truth_b.position, 5100.0, 5.0);

        const RadarScan scan_a = cast_scan(truth, truth_samples, noise, 31);
        const RadarScan scan_b = cast_scan(truth_b, samples_b, noise, 31);

        const PoseOffset prior_shift{150.0, -120.0, 0.05};
        const Pose prior_a = apply_offset(truth, prior_shift);
        const Pose prior_b = apply_offset(truth_b, prior_shift);

        pso.rng_seed = 80;
        const PoseEstimate est_a = estimate_first_stage(scan_a, prior_a, chart, params, pso);
        const PoseEstimate est_b = estimate_first_stage(scan_b, prior_b, chart_b, params, pso);
        REQUIRE(est_a.available);
        REQUIRE(est_b.available);

        const NedPoint off_a = to_ned(est_a.mean.position, prior_a.position);
        const NedPoint off_b = to_ned(est_b.mean.position, prior_b.position);
        CHECK(std::abs(off_a.north - off_b.north) < 10.0);
        CHECK(std::abs(off_a.east - off_b.east) < 10.0);
    }
}

TEST_CASE("EM parameter fitting") {
    SUBCASE("recovers the generating mixture from distances") {
        std::mt19937_64 rng(41);
        std::normal_distribution<double> hit(0.0, 25.0);
        std::uniform_real_distribution<double> clutter(0.0, 3000.0);
        std::bernoulli_distribution is_hit(0.9);
        std::vector<double> d;
        for (int i = 0; i < 10000; ++i)
            d.push_back(is_hit(rng) ? std::abs(hit(rng)) : clutter(rng));

        LfmParams init = default_params();
        init.p_hit = 0.5;
        init.p_random = 0.5;
        init.sigma_lfm = 60.0;
        const EmFitResult fit = fit_lfm_em_distances(d, init, 1e-8, 300);
        CHECK(fit.converged);
        CHECK(fit.params.p_hit == doctest::Approx(0.9).epsilon(0.06));
        CHECK(fit.params.sigma_lfm == doctest::Approx(25.0).epsilon(0.10));
        CHECK(fit.params.p_hit + fit.params.p_random == 1.0);
    }
    SUBCASE("log likelihood is non-decreasing") {
        std::mt19937_64 rng(43);
        std::normal_distribution<double> hit(0.0, 10.0);
        std::uniform_real_distribution<double> clutter(0.0, 2000.0);
        std::bernoulli_distribution is_hit(0.7);
        std::vector<double> d;
        for (int i = 0; i < 3000; ++i)
            d.push_back(is_hit(rng) ? std::abs(hit(rng)) : clutter(rng));

        LfmParams init = default_params();
        init.p_hit = 0.3;
        init.p_random = 0.7;
        init.sigma_lfm = 100.0;
        const EmFitResult fit = fit_lfm_em_distances(d, init, 1e-9, 200);
        REQUIRE(fit.log_likelihood.size() >= 2);
        for (std::size_t i = 1; i < fit.log_likelihood.size(); ++i)
            CHECK(fit.log_likelihood[i] >= fit.log_likelihood[i - 1] - 1e-9);
    }
    SUBCASE("pure clutter drives p_hit to zero") {
        std::mt19937_64 rng(47);
        std::uniform_real_distribution<double> clutter(200.0, 4000.0);
        std::vector<double> d;
        for (int i = 0; i < 4000; ++i) d.push_back(clutter(rng));
        const EmFitResult fit = fit_lfm_em_distances(d, default_params(), 1e-9, 400);
        CHECK(fit.params.p_hit < 0.05);
    }
    SUBCASE("paired pose/scan data set against a chart") {
        // ship inside a ring shoreline: every spoke sees land
        const GeodeticPoint origin = testutil::kOrigin;
        const Chart chart = testutil::atoll_chart(origin, 2000.0, 720);
        RadarNoiseParams noise;
        noise.p_detect = 0.9;
        noise.sigma_range = 25.0;
        noise.p_clutter_per_spoke = 0.1;
        noise.n_spokes = 360;

        const auto samples = extract_shoreline(chart, origin, 5100.0, 4.0);
        std::vector<std::pair<Pose, RadarScan>> dataset;
        for (int k = 0; k < 10; ++k) {
            const Pose pose{origin, 0.1 * k};
            dataset.emplace_back(pose, cast_scan(pose, samples, noise, 900 + k));
        }

        LfmParams init = default_params();
        init.p_hit = 0.5;
        init.p_random = 0.5;
        init.sigma_lfm = 60.0;
        const EmFitResult fit = fit_lfm_em(dataset, chart, init, 1e-8, 300, 4.0);
        CHECK(fit.params.p_hit == doctest::Approx(0.9).epsilon(0.07));
        CHECK(fit.params.sigma_lfm == doctest::Approx(25.0).epsilon(0.12));
    }
    SUBCASE("empty data set is an error") {
        CHECK_THROWS_AS(fit_lfm_em_distances({}, default_params(), 1e-6, 10),
                        std::invalid_argument);
    }
}
