#include <cmath>
#include <vector>

#include "doctest.h"
#include "rimech/metric.hpp"
#include "rimech/rel_particle.hpp"
#include "test_support.hpp"

using namespace rimech;

TEST_SUITE("metric") {

TEST_CASE("flat metrics carry the requested signature") {
    const Metric mp = make_minkowski(4, SignatureOrder::minus_plus);
    CHECK(mp.dim == 4);
    CHECK(mp.signature == std::vector<int>{-1, 1, 1, 1});
    const Mat g = mp(Vec::Zero(4));
    CHECK(g(0, 0) == -1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == 0.0);

    const Metric pm = make_minkowski(3, SignatureOrder::plus_minus);
    CHECK(pm.signature == std::vector<int>{1, -1, -1});
    CHECK(pm(Vec::Zero(3))(0, 0) == 1.0);
    CHECK(pm(Vec::Zero(3))(2, 2) == -1.0);
}

TEST_CASE("inner products and index gymnastics") {
    const Metric m = make_minkowski(2, SignatureOrder::minus_plus);
    Vec x = Vec::Zero(2);
    Vec a(2), b(2);
    a << 1.0, 0.6;
    b << 2.0, -1.0;

    // g(a,b) = -1*2 + 0.6*(-1) = -2.6 by hand.
    CHECK(inner(m, x, a, b) == doctest::Approx(-2.6).epsilon(1e-14));
    CHECK(norm_squared(m, x, a) == doctest::Approx(-1.0 + 0.36).epsilon(1e-14));

    const Vec low = lower_index(m, x, a);
    CHECK(low[0] == doctest::Approx(-1.0));
    CHECK(low[1] == doctest::Approx(0.6));
    const Vec back = raise_index(m, x, low);
    CHECK((back - a).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("round trip through a position-dependent metric") {
    auto U = [](const Vec& x) { return 0.05 * std::sin(x[1]); };
    const Metric m = make_weak_field_metric(U, 3, 1.0);
    Vec x(3);
    x << 0.3, 1.2, -0.7;

    const Mat g = m(x);
    CHECK(g(0, 0) == doctest::Approx(-(1.0 - 2.0 * 0.05 * std::sin(1.2))).epsilon(1e-14));
    CHECK(g(1, 1) == 1.0);
    CHECK(g(2, 2) == 1.0);
    CHECK(g(0, 1) == 0.0);

    Vec v(3);
    v << 1.1, -0.4, 0.25;
    const Vec round = raise_index(m, x, lower_index(m, x, v));
    CHECK((round - v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("speed bound classification by signature") {
    // One positive axis: the light cone caps spatial speed at exactly 1.
    const SpeedBound lorentz = max_spatial_speed({1, -1, -1, -1});
    CHECK(lorentz.feasible);
    CHECK(lorentz.bounded);
    CHECK(lorentz.bound == doctest::Approx(1.0).epsilon(1e-9));

    // Two positive axes open a cone of unbounded spatial directions.
    const SpeedBound two_plus = max_spatial_speed({1, 1, -1});
    CHECK(two_plus.feasible);
    CHECK_FALSE(two_plus.bounded);

    // No positive axis leaves g(v,v) >= 0 unsatisfiable for nonzero v.
    const SpeedBound all_minus = max_spatial_speed({-1, -1});
    CHECK_FALSE(all_minus.feasible);

    CHECK(thrown_kind([] { max_spatial_speed({1, 0, -1}); }) == ErrorKind::invalid_dimension);
    CHECK(thrown_kind([] { max_spatial_speed({}); }) == ErrorKind::invalid_dimension);
}

TEST_CASE("speed bound classification is exhaustive over small signatures") {
    for (int d = 2; d <= 4; ++d) {
        for (int mask = 0; mask < (1 << d); ++mask) {
            std::vector<int> sig(d);
            int plus = 0;
            for (int i = 0; i < d; ++i) {
                sig[i] = (mask >> i) & 1 ? 1 : -1;
                plus += (sig[i] == 1);
            }
            const SpeedBound sb = max_spatial_speed(sig);
            CAPTURE(d);
            CAPTURE(mask);
            if (plus == 0) {
                // No clock axis: every direction is spacelike.
                CHECK_FALSE(sb.feasible);
            } else if (plus == 1) {
                CHECK(sb.feasible);
                CHECK(sb.bounded);
                CHECK(sb.bound == doctest::Approx(1.0).epsilon(1e-9));
            } else {
                // Any second timelike axis defeats a finite cap, spatial
                // axes present or not.
                CHECK(sb.feasible);
                CHECK_FALSE(sb.bounded);
            }
        }
    }
}

}  // TEST_SUITE
