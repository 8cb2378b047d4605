#include <doctest.h>

#include <cmath>

#include "znl/domain.hpp"
#include "znl/drift.hpp"
#include "znl/ode.hpp"

using namespace znl;

TEST_CASE("integrate_ode validates its inputs") {
    auto f = registry_get("ex1-sqrt");
    CHECK_THROWS_AS(integrate_ode(f, Point{0.0}, 1.0, 1e-3), AmbiguousOriginError);
    CHECK_THROWS_AS(integrate_ode(f, Point{0.1}, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(integrate_ode(f, Point{0.1, 0.2}, 1.0, 1e-3), ValidationError);
}

TEST_CASE("RK4 tracks the closed-form branch away from the equilibrium") {
    // From x0 > 0 the flow of b = 2 sign(x) sqrt|x| is (sqrt(x0) + t)^2.
    auto f = registry_get("ex1-sqrt");
    const double x0 = 0.04;
    Path p = integrate_ode(f, Point{x0}, 1.0, 1e-4);
    const double t = p.times.back();
    const double exact = (std::sqrt(x0) + t) * (std::sqrt(x0) + t);
    CHECK(p.states.back()[0] == doctest::Approx(exact).epsilon(1e-8));
}

TEST_CASE("exit functional interpolates the crossing in b_K") {
    auto f = registry_get("ex1-sqrt");
    auto K = Domain::interval(-1.0, 1.0);
    Path p = integrate_ode(f, Point{0.04}, 3.0, 1e-4, &K);
    auto rec = exit_functional(p, K);
    REQUIRE(rec.has_value());
    CHECK(rec->time == doctest::Approx(1.0 - 0.2).epsilon(1e-6));
    CHECK(rec->point[0] == doctest::Approx(1.0));
}

TEST_CASE("time_along_segment inverts the branch travel time") {
    auto f = registry_get("ex1-sqrt");
    // x(t) = t^2 reaches L at sqrt(L)
    const double T = time_along_segment(f, Point{0.0}, Point{1.0}, 0.49);
    CHECK(T == doctest::Approx(0.7).epsilon(1e-10));
    // against the drift the time is infinite
    CHECK(time_along_segment(f, Point{0.25}, Point{-1.0}, 0.2) == kInf);
}

TEST_CASE("enumerate_leaving returns the exact branches when known") {
    auto f = registry_get("ex2-asym");
    auto lv = enumerate_leaving(f, 2, 1e-6, 2.0, 1e-3);
    REQUIRE(lv.members.size() == 2);
    CHECK(lv.members[0].label == "+branch");
    CHECK(lv.members[1].label == "-branch");
    CHECK_FALSE(lv.continuum);
    CHECK(lv.members[0].path.states[0] == Point{0.0});
    // sampled states follow t^2/4 and -9t^2/4
    CHECK(lv.members[0].path.state_at_or_after(1.0)[0] == doctest::Approx(0.25));
    CHECK(lv.members[1].path.state_at_or_after(1.0)[0] == doctest::Approx(-2.25));
}

TEST_CASE("enumerate_leaving discretizes the radial continuum") {
    auto f = registry_get("radial2d");
    auto lv = enumerate_leaving(f, 64, 1e-6, 2.0, 1e-3);
    CHECK(lv.continuum);
    CHECK(lv.members.size() == 64);
    // each ray solution has |x(t)| = t^2
    for (int i = 0; i < 8; ++i) {
        const Point& x = lv.members[i].path.state_at_or_after(1.0);
        CHECK(norm(x) == doctest::Approx(1.0).epsilon(1e-3));
    }
}

TEST_CASE("(H3): all leaving members exit at a common time") {
    auto f = registry_get("ex2-asym");
    const double r = 0.25;
    auto K = Domain::interval(-9.0 * r / 4.0, r / 4.0);
    auto lv = enumerate_leaving(f, 2, 1e-6, 2.0, 1e-4);
    auto rep = check_h3(K, lv, 1e-3);
    CHECK(rep.passed);
    CHECK(rep.exit_times.size() == 2);
    CHECK(rep.exit_times[0].second == doctest::Approx(std::sqrt(r)).epsilon(1e-4));
}

TEST_CASE("exit_time_function matches the analytic values") {
    auto f = registry_get("ex2-asym");
    auto lv = enumerate_leaving(f, 2, 1e-6, 2.0, 1e-4);

    auto K1 = Domain::interval(-0.25, 0.25);
    CHECK(exit_time_function(f, K1, lv, Point{0.0}, 2.0, 1e-4) ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    auto K2 = Domain::interval(-0.5625, 0.0625);
    CHECK(exit_time_function(f, K2, lv, Point{0.0}, 2.0, 1e-4) ==
          doctest::Approx(0.5).epsilon(1e-6));

    // off the equilibrium: unique flow
    CHECK(exit_time_function(f, K1, lv, Point{0.01}, 2.0, 1e-4) ==
          doctest::Approx(2.0 * (0.5 - 0.1)).epsilon(1e-5));
    CHECK_THROWS_AS(exit_time_function(f, K1, lv, Point{0.5}, 2.0, 1e-4),
                    PreconditionError);
}

TEST_CASE("exit_time_function reports +inf with a depth diagnostic") {
    auto z = make_zero_field(1);
    auto K = Domain::interval(-1.0, 1.0);
    Path still = integrate_ode(z, Point{0.25}, 1.0, 1e-2, &K);
    CHECK_FALSE(exit_functional(still, K).has_value());
    LeavingSolutionSet lv;
    double deepest = 0.0;
    const double v =
        exit_time_function(z, K, lv, Point{0.25}, 1.0, 1e-2, &deepest);
    CHECK(v == kInf);
    CHECK(deepest == doctest::Approx(-0.75));
}

TEST_CASE("minimal exits are attained by leaving members (optimal subset)") {
    // Every exit time reported for the origin equals some member's exit time.
    auto f = registry_get("prod2d");
    auto K = Domain::ball({0.0, 0.0}, 0.25);
    auto lv = enumerate_leaving(f, 4, 1e-6, 2.0, 1e-4);
    compute_leaving_exits(lv, K);
    const double v = exit_time_function(f, K, lv, Point{0.0, 0.0}, 2.0, 1e-4);
    double best = kInf;
    for (const auto& m : lv.members) best = std::min(best, m.path.exit->time);
    CHECK(v == doctest::Approx(best));
    CHECK(v == doctest::Approx(std::sqrt(0.25 / std::sqrt(2.0))).epsilon(1e-4));
}
