#include <doctest.h>

#include <cmath>

#include "znl/domain.hpp"
#include "znl/drift.hpp"

using namespace znl;

TEST_CASE("registry knows its labels and rejects others") {
    for (const auto& lbl : registry_labels()) CHECK_NOTHROW(registry_get(lbl));
    CHECK_THROWS_AS(registry_get("no-such-field"), RegistryError);
    try {
        registry_get("no-such-field");
    } catch (const RegistryError& e) {
        CHECK(std::string(e.what()).find("ex1-sqrt") != std::string::npos);
    }
}

TEST_CASE("field evaluations match their closed forms") {
    auto f1 = registry_get("ex1-sqrt");
    CHECK(f1.eval(Point{0.25})[0] == doctest::Approx(1.0));
    CHECK(f1.eval(Point{-0.25})[0] == doctest::Approx(-1.0));
    CHECK(f1.eval(Point{0.0})[0] == 0.0);

    auto f2 = registry_get("ex2-asym");
    CHECK(f2.eval(Point{0.04})[0] == doctest::Approx(0.2));
    CHECK(f2.eval(Point{-0.04})[0] == doctest::Approx(-0.6));

    auto fp = registry_get("prod2d");
    auto v = fp.eval(Point{0.25, -1.0});
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(-2.0));

    auto fr = registry_get("radial2d");
    auto w = fr.eval(Point{1.0, 0.0});
    CHECK(w[0] == doctest::Approx(2.0));
    CHECK(w[1] == 0.0);
    auto z = fr.eval(Point{0.0, 0.0});
    CHECK(z[0] == 0.0);
}

TEST_CASE("fields are odd under sign flips") {
    auto f = registry_get("ex1-sqrt");
    for (double x : {0.01, 0.3, 1.7})
        CHECK(f.eval(Point{-x})[0] == doctest::Approx(-f.eval(Point{x})[0]));
    auto p = registry_get("prod2d");
    auto a = p.eval(Point{0.3, 0.7});
    auto b = p.eval(Point{-0.3, -0.7});
    CHECK(a[0] == doctest::Approx(-b[0]));
    CHECK(a[1] == doctest::Approx(-b[1]));
}

TEST_CASE("powerlaw validates gamma and matches its branch solution") {
    CHECK_THROWS_AS(registry_get("powerlaw", {{"gamma", 1.5}}), ValidationError);
    CHECK_THROWS_AS(registry_get("powerlaw", {{"gamma", 0.0}}), ValidationError);
    auto f = registry_get("powerlaw", {{"gamma", 0.5}, {"c_plus", 2.0}});
    // branch x(t) = ((1-g) c t)^(1/(1-g)) = t^2 for g = 1/2, c = 2
    CHECK(f.leaving[0].state(0.5)[0] == doctest::Approx(0.25));
    CHECK(f.eval(Point{0.09})[0] == doctest::Approx(0.6));
}

TEST_CASE("stated probabilities sum to one where given") {
    for (const char* lbl : {"ex1-sqrt", "ex2-asym", "prod2d"}) {
        auto f = registry_get(lbl);
        double s = 0.0;
        for (const auto& sol : f.leaving) s += sol.probability;
        CHECK(s == doctest::Approx(1.0));
    }
    auto f2 = registry_get("ex2-asym");
    const double w = std::cbrt(9.0);
    CHECK(f2.leaving[0].probability == doctest::Approx(1.0 / (1.0 + w)));
    CHECK(f2.leaving[1].probability == doctest::Approx(w / (1.0 + w)));
}

TEST_CASE("drift bound covers the inflated domain") {
    auto f = registry_get("ex1-sqrt");
    auto K = Domain::interval(-1.0, 1.0);
    set_bound_for_domain(f, K);
    CHECK(f.bound == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(std::fabs(f.eval(Point{1.0})[0]) <= f.bound);
}

TEST_CASE("(H2) holds for registered fields and fails for the zero field") {
    for (const auto& lbl : registry_labels()) {
        auto f = registry_get(lbl, lbl == std::string("powerlaw")
                                       ? std::map<std::string, double>{{"gamma", 0.5}}
                                       : std::map<std::string, double>{});
        auto rep = check_h2(f, 1.0, 256);
        CHECK(rep.passed);
        CHECK(rep.norm_at_zero == 0.0);
        CHECK(rep.min_norm > 0.0);
    }
    auto z = make_zero_field(1);
    CHECK_FALSE(check_h2(z, 1.0, 64).passed);
}
