#include <cmath>
#include <vector>

#include "doctest.h"
#include "rimech/errors.hpp"
#include "rimech/numeric.hpp"

using namespace rimech;

TEST_SUITE("numeric") {

TEST_CASE("linspace covers both endpoints uniformly") {
    const std::vector<double> g = numeric::linspace(-1.0, 2.0, 7);
    REQUIRE(g.size() == 7);
    CHECK(g.front() == -1.0);
    CHECK(g.back() == 2.0);
    for (std::size_t i = 1; i < g.size(); ++i)
        CHECK(g[i] - g[i - 1] == doctest::Approx(0.5).epsilon(1e-14));

    const std::vector<double> two = numeric::linspace(3.0, 4.0, 2);
    CHECK(two == std::vector<double>{3.0, 4.0});
}

TEST_CASE("trapezoid and its cumulative variant agree with the analytic integral") {
    // Oracle: integral of s^2 over [0,1] is 1/3; composite trapezoid on a
    // uniform grid overshoots by h^2/6 * (b-a) * f''/2 = h^2/6.
    const int n = 101;
    const std::vector<double> xs = numeric::linspace(0.0, 1.0, n);
    std::vector<double> ys(n);
    for (int i = 0; i < n; ++i) ys[i] = xs[i] * xs[i];

    const double h = 0.01;
    CHECK(numeric::trapezoid(xs, ys) == doctest::Approx(1.0 / 3.0 + h * h / 6.0).epsilon(1e-10));

    const std::vector<double> run = numeric::cumulative_trapezoid(xs, ys);
    REQUIRE(run.size() == xs.size());
    CHECK(run.front() == 0.0);
    CHECK(run.back() == doctest::Approx(numeric::trapezoid(xs, ys)).epsilon(1e-14));
}

TEST_CASE("rk4 reproduces exponential growth to fourth order") {
    auto rhs = [](double, const Vec& y) { return y; };
    Vec y0(1);
    y0[0] = 1.0;

    auto solve = [&](int n) {
        double last = 0.0;
        numeric::rk4(rhs, y0, numeric::linspace(0.0, 1.0, n),
                     [&](int, double, const Vec& y) { last = y[0]; });
        return last;
    };

    const double e = 2.718281828459045;
    CHECK(std::abs(solve(101) - e) < 1e-9);

    // Halving the step must shrink the error about sixteenfold.
    const double coarse = std::abs(solve(11) - e);
    const double fine = std::abs(solve(21) - e);
    CHECK(coarse / fine == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("rk4 runs grids in either direction") {
    auto rhs = [](double, const Vec& y) { return y; };
    Vec y0(1);
    y0[0] = 2.718281828459045;
    double last = 0.0;
    numeric::rk4(rhs, y0, numeric::linspace(1.0, 0.0, 101),
                 [&](int, double, const Vec& y) { last = y[0]; });
    CHECK(last == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("rk4 observer sees every grid point, starting with the unmodified state") {
    auto rhs = [](double, const Vec& y) { return -y; };
    Vec y0(2);
    y0 << 1.0, -0.5;
    int calls = 0;
    Vec first;
    numeric::rk4(rhs, y0, numeric::linspace(0.0, 1.0, 33), [&](int i, double, const Vec& y) {
        if (i == 0) first = y;
        ++calls;
    });
    CHECK(calls == 33);
    CHECK(first[0] == y0[0]);
    CHECK(first[1] == y0[1]);
}

TEST_CASE("rk4 reports finite-time blow-up") {
    // dy/dt = y^2 from y(0)=1 leaves the reals at t=1.
    auto rhs = [](double, const Vec& y) { return Vec(y.array().square()); };
    Vec y0(1);
    y0[0] = 1.0;
    CHECK_THROWS_WITH_AS(
        numeric::rk4(rhs, y0, numeric::linspace(0.0, 2.0, 201), [](int, double, const Vec&) {}),
        doctest::Contains("integration-diverged"), Error);
}

TEST_CASE("scalar derivative helpers") {
    const double d =
        numeric::central_diff([](double s) { return std::sin(s); }, 0.7, numeric::fd_step(0.7));
    CHECK(d == doctest::Approx(std::cos(0.7)).epsilon(1e-9));

    Mat A(2, 2);
    A << 2.0, 0.5, 0.5, 1.0;
    Vec b(2);
    b << -1.0, 0.3;
    auto quad = [&](const Vec& x) { return 0.5 * x.dot(A * x) + b.dot(x); };

    Vec x(2);
    x << 0.4, -0.9;
    const Vec g = numeric::gradient(quad, x);
    const Vec want = A * x + b;
    CHECK((g - want).cwiseAbs().maxCoeff() < 1e-9);

    const Mat H = numeric::hessian(quad, x);
    CHECK((H - A).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("all_finite flags infinities and NaNs") {
    Vec v(3);
    v << 1.0, 2.0, 3.0;
    CHECK(numeric::all_finite(v));
    v[1] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(numeric::all_finite(v));
    v[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK_FALSE(numeric::all_finite(v));
}

}  // TEST_SUITE
