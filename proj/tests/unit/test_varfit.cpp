#include <cmath>
#include <vector>

#include "doctest.h"

#include "biohybrid/errors.hpp"
#include "biohybrid/varfit/minprenum.hpp"
#include "biohybrid/varfit/serialize.hpp"

using namespace biohybrid;
using namespace biohybrid::varfit;

namespace {

MinPreNumCurve make_curve(std::vector<double> p) {
    MinPreNumCurve c;
    c.trials = 1000;
    c.p_fire = std::move(p);
    return c;
}

MinPreNumCurve step_at(int n0, int n_max = 20) {
    std::vector<double> p(static_cast<std::size_t>(n_max), 0.0);
    for (int n = n0; n <= n_max; ++n) p[static_cast<std::size_t>(n - 1)] = 1.0;
    return make_curve(p);
}

}  // namespace

TEST_CASE("curve expectation examples") {
    CHECK(curve_expectation(step_at(5)) == doctest::Approx(5.0));
    CHECK(curve_expectation(step_at(1)) == doctest::Approx(1.0));
    std::vector<double> ramp;
    for (int n = 1; n <= 20; ++n) ramp.push_back(n / 20.0);
    CHECK(curve_expectation(make_curve(ramp)) == doctest::Approx(10.5));
    CHECK_THROWS_AS(curve_expectation(make_curve(std::vector<double>(20, 0.0))), UndefinedExpectationError);

    // A dip is clipped before renormalizing.
    const auto mass = minprenum_mass(make_curve({0.5, 0.4, 1.0}));
    REQUIRE(mass.size() == 3);
    CHECK(mass[0] == doctest::Approx(0.5 / 1.1));
    CHECK(mass[1] == 0.0);
    CHECK(mass[2] == doctest::Approx(0.6 / 1.1));
}

TEST_CASE("per-trial minimum expectation") {
    auto c = step_at(3, 5);
    c.min_counts = {3, 3, 4, 0};
    CHECK(curve_expectation(c, ExpectationMethod::PerTrialMinimum) == doctest::Approx(10.0 / 3.0));
    CHECK(parse_expectation_method(to_string(ExpectationMethod::PerTrialMinimum)) ==
          ExpectationMethod::PerTrialMinimum);
}

TEST_CASE("derive_threshold_dist") {
    // Nine values with population mean 7.2 and std 2.1.
    std::vector<double> e(9, 7.2);
    const double d = 2.1 * 3.0 / std::sqrt(2.0);
    e[0] = 7.2 + d;
    e[1] = 7.2 - d;
    REQUIRE(mean_of(e) == doctest::Approx(7.2));
    REQUIRE(population_std(e) == doctest::Approx(2.1));
    const auto v = derive_threshold_dist(e, 0.0008);
    CHECK(v.mean == doctest::Approx(0.00576));
    CHECK(v.std == doctest::Approx(0.00168));
    CHECK(std::round(v.mean * 1e4) / 1e4 == doctest::Approx(0.0058));
    CHECK(std::round(v.std * 1e4) / 1e4 == doctest::Approx(0.0017));
    const auto w = derive_threshold_dist(e, 0.79e-3);
    CHECK(w.mean == doctest::Approx(0.005688));
    CHECK(w.std == doctest::Approx(0.001659));

    const std::vector<double> same(9, 6.0);
    CHECK(derive_threshold_dist(same, 0.0008).std == 0.0);

    const auto k = derive_threshold_dist(e, 3 * 0.0008);
    CHECK(k.mean == doctest::Approx(3 * v.mean));
    CHECK(k.std == doctest::Approx(3 * v.std));
    CHECK_THROWS_AS(derive_threshold_dist(std::vector<double>(8, 7.0), 0.0008), PreconditionError);
    CHECK_THROWS_AS(derive_threshold_dist(e, 0.0), PreconditionError);
}

TEST_CASE("align_average_curves") {
    std::vector<MinPreNumCurve> nine(9, step_at(6));
    const auto a = align_average_curves(nine);
    CHECK(a.curve.p_fire == nine[0].p_fire);

    const std::vector<MinPreNumCurve> two{step_at(4), step_at(6)};
    const auto b = align_average_curves(two);
    CHECK(b.reference_peak == 5);
    const auto mass = minprenum_mass(b.curve);
    CHECK(mass[4] == doctest::Approx(1.0));
    for (double p : b.curve.p_fire) CHECK((p == 0.0 || p == 1.0));

    std::vector<MinPreNumCurve> with_dead{step_at(5), make_curve(std::vector<double>(20, 0.0))};
    const auto c = align_average_curves(with_dead);
    CHECK(!c.warnings.empty());
    CHECK(c.curve.p_fire == step_at(5).p_fire);
}

TEST_CASE("computational minPreNum curve") {
    const double w = 0.001;
    const auto c = computational_minprenum_curve({w, 0.0}, 2.5 * w, 10, 200, NegativeWeightPolicy::ClampZero, 1);
    CHECK(c.at(1) == 0.0);
    CHECK(c.at(2) == 0.0);
    for (int n = 3; n <= 10; ++n) CHECK(c.at(n) == 1.0);

    const auto always = computational_minprenum_curve({0.0007, 0.0001}, 0.0, 10, 200,
                                                      NegativeWeightPolicy::Resample, 1);
    for (double p : always.p_fire) CHECK(p == 1.0);

    const auto g = computational_minprenum_curve({0.0007, 0.0007}, 0.0058, 20, 1000,
                                                 NegativeWeightPolicy::ClampZero, 3);
    for (int n = 1; n < 20; ++n) CHECK(g.at(n + 1) >= g.at(n) - 0.05);
    const double e = curve_expectation(g);
    CHECK(e >= 1.0);
    CHECK(e <= 20.0);
    CHECK(g.p_fire == computational_minprenum_curve({0.0007, 0.0007}, 0.0058, 20, 1000,
                                                    NegativeWeightPolicy::ClampZero, 3).p_fire);
}

TEST_CASE("fit_weight_dist self-consistency") {
    FitGrid grid;
    grid.mean_lo = 0.0004;
    grid.mean_hi = 0.0010;
    grid.std_lo = 0.0004;
    grid.std_hi = 0.0010;
    const auto target = computational_minprenum_curve({0.0007, 0.0007}, 0.0058, 20, 1000,
                                                      NegativeWeightPolicy::ClampZero, 9);
    const auto fit = fit_weight_dist(target, 0.0058, grid, 1000, NegativeWeightPolicy::ClampZero, 9);
    CHECK(std::abs(fit.best.mean - 0.0007) <= grid.mean_step + 1e-12);
    CHECK(std::abs(fit.best.std - 0.0007) <= grid.std_step + 1e-12);
    CHECK(!fit.on_boundary);
}

TEST_CASE("fit_weight_dist flat target hits the boundary") {
    FitGrid grid;
    grid.mean_lo = 0.0001;
    grid.mean_hi = 0.0005;
    grid.std_lo = 0.0001;
    grid.std_hi = 0.0005;
    const auto fit = fit_weight_dist(make_curve(std::vector<double>(20, 1.0)), 0.0058, grid, 200);
    CHECK(fit.on_boundary);
    CHECK(!fit.warnings.empty());
}

TEST_CASE("biophysical curve is nondecreasing and deterministic") {
    MinPreNumOptions opt;
    opt.n_max = 20;
    opt.trials = 40;
    opt.seed = 5;
    const auto c = minprenum_curve(1, opt);
    CHECK(c.post_cell == 1);
    CHECK(c.n_max() == 20);
    CHECK(c.at(20) >= c.at(1));
    // Nested prefixes make every trial's firing monotone in n.
    for (int n = 1; n < 20; ++n) CHECK(c.at(n + 1) >= c.at(n));
    CHECK(minprenum_curve(1, opt).p_fire == c.p_fire);
}

TEST_CASE("curve json round trip") {
    auto c = step_at(4, 8);
    c.post_cell = 3;
    c.min_counts = {4, 4};
    const auto back = curve_from_json(to_json(c));
    CHECK(back.p_fire == c.p_fire);
    CHECK(back.min_counts == c.min_counts);
    CHECK(back.post_cell == 3);
    const NormalSpec s{0.0007, 0.0003};
    CHECK(normal_spec_from_json(to_json(s)) == s);
}
