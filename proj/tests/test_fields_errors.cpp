#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "rimech/errors.hpp"
#include "rimech/fields.hpp"
#include "rimech/numeric.hpp"
#include "test_support.hpp"

using namespace rimech;

TEST_SUITE("fields") {

TEST_CASE("the registry knows exactly the built-in families") {
    const std::vector<std::string> expected = {"constant", "polynomial", "sinusoid", "bump",
                                               "weak-field-U"};
    CHECK(fields::family_names() == expected);
}

TEST_CASE("direct constructors") {
    CHECK(fields::constant(3.25)(-17.0) == 3.25);

    // 1 + 2s + 3s^2 at s = 2.
    const auto poly = fields::polynomial({1.0, 2.0, 3.0});
    CHECK(poly(2.0) == doctest::Approx(17.0).epsilon(1e-15));
    CHECK(poly(0.0) == 1.0);

    const auto osc = fields::sinusoid(2.0, 0.5, 3.0, 0.25);
    CHECK(osc(0.7) == doctest::Approx(2.0 + 0.5 * std::sin(3.0 * 0.7 + 0.25)).epsilon(1e-15));

    CHECK(fields::weak_field_u(0.03, 2.0)(0.7) ==
          doctest::Approx(0.029563491899653804).epsilon(1e-15));
}

TEST_CASE("bump profile: plateau value, support, smooth joins") {
    const auto f = fields::bump(1.5, 0.8, 4.0, 1.25);
    CHECK(f(4.0) == doctest::Approx(2.3).epsilon(1e-15));       // center = base + amplitude
    CHECK(f(2.75) == doctest::Approx(1.5).epsilon(1e-15));      // support edge
    CHECK(f(-100.0) == 1.5);
    CHECK(f(100.0) == 1.5);

    // C^1 at the edge: one-sided slopes from inside and outside agree.
    const double h = 1e-6;
    const double inside_slope = (f(2.75 + h) - f(2.75)) / h;
    CHECK(std::abs(inside_slope) < 1e-5);

    // The advertised excess integral matches quadrature of f - base.
    const auto grid = numeric::linspace(2.75, 5.25, 100001);
    std::vector<double> excess(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) excess[i] = f(grid[i]) - 1.5;
    const double quad = numeric::trapezoid(grid, excess);
    CHECK(fields::bump_excess_integral(0.8, 1.25) == doctest::Approx(quad).epsilon(1e-9));
    CHECK(fields::bump_excess_integral(0.8, 1.25) == doctest::Approx(1.0).epsilon(1e-15));

    CHECK(thrown_kind([] { fields::bump(1.0, 1.0, 0.0, -2.0); }) == ErrorKind::schema_error);
}

TEST_CASE("registry dispatch matches the direct constructors") {
    const auto direct = fields::sinusoid(2.0, 0.3, 1.0, 0.0);
    const auto looked_up = fields::make("sinusoid", {2.0, 0.3, 1.0, 0.0});
    for (double s : {-1.3, 0.0, 0.4, 2.9}) CHECK(looked_up(s) == direct(s));

    CHECK(fields::make("constant", {5.5})(0.0) == 5.5);
    CHECK(fields::make("polynomial", {1.0, 2.0, 3.0})(2.0) == doctest::Approx(17.0));
    CHECK(fields::make("bump", {1.5, 0.8, 4.0, 1.25})(4.0) == doctest::Approx(2.3));
    CHECK(fields::make("weak-field-U", {0.03, 2.0})(0.7) ==
          doctest::Approx(0.029563491899653804));
}

TEST_CASE("registry rejections carry usable messages") {
    // Wrong arity names the family and the expected shape.
    try {
        fields::make("sinusoid", {1.0});
        FAIL("expected a schema error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema_error);
        CHECK(std::string(e.what()).find("sinusoid") != std::string::npos);
        CHECK(std::string(e.what()).find("4 parameters") != std::string::npos);
    }

    CHECK(thrown_kind([] { fields::make("polynomial", {}); }) == ErrorKind::schema_error);

    // Unknown family lists what would have worked.
    try {
        fields::make("gaussian", {0.0, 1.0});
        FAIL("expected a schema error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::schema_error);
        const std::string msg = e.what();
        CHECK(msg.find("gaussian") != std::string::npos);
        for (const auto& name : fields::family_names())
            CHECK(msg.find(name) != std::string::npos);
    }
}

}  // TEST_SUITE("fields")

TEST_SUITE("errors") {

TEST_CASE("every kind maps to its kebab-case name") {
    const std::vector<std::pair<ErrorKind, const char*>> table = {
        {ErrorKind::invalid_dimension, "invalid-dimension"},
        {ErrorKind::derivative_failure, "derivative-failure"},
        {ErrorKind::degenerate_probe, "degenerate-probe"},
        {ErrorKind::underdetermined_system, "underdetermined-system"},
        {ErrorKind::integration_diverged, "integration-diverged"},
        {ErrorKind::gauge_degenerate, "gauge-degenerate"},
        {ErrorKind::space_like_segment, "space-like-segment"},
        {ErrorKind::not_applicable, "not-applicable"},
        {ErrorKind::constraint_violation, "constraint-violation"},
        {ErrorKind::not_an_integral, "not-an-integral"},
        {ErrorKind::superluminal_state, "superluminal-state"},
        {ErrorKind::off_shell_state, "off-shell-state"},
        {ErrorKind::division_degenerate, "division-degenerate"},
        {ErrorKind::kind_mismatch, "kind-mismatch"},
        {ErrorKind::window_out_of_range, "window-out-of-range"},
        {ErrorKind::grid_too_coarse, "grid-too-coarse"},
        {ErrorKind::parse_error, "parse-error"},
        {ErrorKind::schema_error, "schema-error"},
    };
    for (const auto& [kind, name] : table) CHECK(std::string(to_string(kind)) == name);
}

TEST_CASE("what() leads with the kind and keeps the message") {
    const Error e(ErrorKind::off_shell_state, "energy does not match the momentum");
    CHECK(std::string(e.what()) == "off-shell-state: energy does not match the momentum");
    CHECK(e.kind() == ErrorKind::off_shell_state);

    // Errors are catchable as std::runtime_error for callers that do not
    // dispatch on the kind.
    try {
        throw Error(ErrorKind::parse_error, "bad byte");
    } catch (const std::runtime_error& re) {
        CHECK(std::string(re.what()) == "parse-error: bad byte");
    }
}

}  // TEST_SUITE("errors")
