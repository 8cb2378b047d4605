#include <doctest.h>

#include <cmath>
#include <sstream>

#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/hjb.hpp"
#include "znl/sde.hpp"

using namespace znl;

TEST_CASE("simulate_path is deterministic and validates inputs") {
    auto f = registry_get("ex1-sqrt");
    auto K = Domain::interval(-1.0, 1.0);
    SdeConfig cfg;
    cfg.epsilon = 0.1;
    cfg.step = 1e-3;
    Path a = simulate_path(f, K, cfg, 17, Point{0.0});
    Path b = simulate_path(f, K, cfg, 17, Point{0.0});
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.states[i] == b.states[i]);
    REQUIRE(a.exit.has_value());
    CHECK(a.exit->time == b.exit->time);

    CHECK_THROWS_AS(simulate_path(f, K, cfg, 0, Point{2.0}), PreconditionError);
    CHECK_THROWS_AS(simulate_path(f, K, cfg, 0, Point{0.0, 0.0}), ValidationError);
}

TEST_CASE("exit points land on the boundary") {
    auto f = registry_get("prod2d");
    auto K = Domain::ball({0.0, 0.0}, 0.25);
    SdeConfig cfg;
    cfg.epsilon = 0.05;
    cfg.step = 1e-3;
    for (int i = 0; i < 20; ++i) {
        Path p = simulate_path(f, K, cfg, i, Point{0.0, 0.0});
        REQUIRE(p.exit.has_value());
        CHECK(std::fabs(K.oriented_distance(p.exit->point)) <= K.tol_boundary());
        CHECK(p.exit->time > 0.0);
    }
}

TEST_CASE("common noise drives both coordinates identically") {
    auto z = make_zero_field(2);
    auto K = Domain::ball({0.0, 0.0}, 5.0);
    SdeConfig cfg;
    cfg.epsilon = 1.0;
    cfg.step = 1e-3;
    cfg.horizon = 0.5;
    cfg.noise_mode = NoiseMode::Common;
    Path p = simulate_path(z, K, cfg, 3, Point{0.0, 0.0});
    CHECK_FALSE(p.exit.has_value());
    for (const Point& x : p.states) CHECK(x[0] == doctest::Approx(x[1]).epsilon(1e-14));

    // the shared increments equal the coordinate-0 stream of the same path
    cfg.noise_mode = NoiseMode::Independent;
    Path q = simulate_path(z, K, cfg, 3, Point{0.0, 0.0});
    CHECK(p.states.back()[0] == doctest::Approx(q.states.back()[0]).epsilon(1e-14));
}

TEST_CASE("ensembles are identical for any worker count") {
    auto f = registry_get("ex1-sqrt");
    auto K = Domain::interval(-1.0, 1.0);
    SdeConfig cfg;
    cfg.epsilon = 0.1;
    cfg.step = 1e-3;
    auto r1 = simulate_ensemble(f, K, cfg, 64, Point{0.0}, 1);
    auto r4 = simulate_ensemble(f, K, cfg, 64, Point{0.0}, 4);
    REQUIRE(r1.rows.size() == r4.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
        CHECK(r1.rows[i].path_index == r4.rows[i].path_index);
        REQUIRE(r1.rows[i].exit.has_value() == r4.rows[i].exit.has_value());
        if (r1.rows[i].exit) {
            CHECK(r1.rows[i].exit->time == r4.rows[i].exit->time);
            CHECK(r1.rows[i].exit->point == r4.rows[i].exit->point);
        }
    }
    std::ostringstream s1, s4;
    write_csv(r1, 1, s1);
    write_csv(r4, 1, s4);
    CHECK(s1.str() == s4.str());
}

TEST_CASE("pure-noise exit times scale like 1/eps^2") {
    // For b = 0 on [-1,1] the expected exit from 0 is exactly 1/eps^2.
    auto z = make_zero_field(1);
    auto K = Domain::interval(-1.0, 1.0);
    SdeConfig cfg;
    cfg.step = 1e-3;
    cfg.horizon = 200.0;
    for (double eps : {1.0, 0.5}) {
        cfg.epsilon = eps;
        auto res = simulate_ensemble(z, K, cfg, 3000, Point{0.0});
        CHECK(res.summary.censored_count == 0);
        const double expected = 1.0 / (eps * eps);
        CHECK(std::fabs(res.summary.mean_exit - expected) / expected < 0.10);
    }
}

TEST_CASE("censoring at the horizon is reported, not an error") {
    auto z = make_zero_field(1);
    auto K = Domain::interval(-1.0, 1.0);
    SdeConfig cfg;
    cfg.epsilon = 0.05;  // expected exit time 400 >> horizon
    cfg.step = 1e-2;
    cfg.horizon = 1.0;
    auto res = simulate_ensemble(z, K, cfg, 50, Point{0.0});
    CHECK(res.summary.censored_count == 50);
    CHECK(std::isnan(res.summary.mean_exit));
    std::ostringstream os;
    write_csv(res, 1, os);
    CHECK(os.str().find("inf") != std::string::npos);
}

TEST_CASE("step resolution warning fires when step > eps^2") {
    SdeConfig cfg;
    cfg.epsilon = 0.01;
    cfg.step = 1e-3;
    CHECK_FALSE(cfg.step_resolves_diffusion());
    cfg.step = 1e-4;
    CHECK(cfg.step_resolves_diffusion());
}

TEST_CASE("record stride keeps the crossing and final samples") {
    auto f = registry_get("ex1-sqrt");
    auto K = Domain::interval(-1.0, 1.0);
    SdeConfig cfg;
    cfg.epsilon = 0.1;
    cfg.step = 1e-3;
    cfg.record_stride = 100;
    Path p = simulate_path(f, K, cfg, 5, Point{0.0});
    REQUIRE(p.exit.has_value());
    CHECK(p.size() < 200);
    CHECK(K.oriented_distance(p.states.back()) >= 0.0);
}

TEST_CASE("Monte Carlo agrees with the drift-diffusion oracle off equilibrium") {
    auto f = registry_get("ex1-sqrt");
    SdeConfig cfg;
    cfg.epsilon = 0.5;
    cfg.step = 1e-3;
    cfg.horizon = 50.0;
    auto K = Domain::interval(-1.0, 1.0);
    auto res = simulate_ensemble(f, K, cfg, 4000, Point{0.25});
    const double u = expected_exit_oracle_1d(f, -1.0, 1.0, 0.5, 0.25);
    CHECK(res.summary.censored_count == 0);
    CHECK(std::fabs(res.summary.mean_exit - u) < 5.0 * res.summary.ci95 + 0.01);
}
