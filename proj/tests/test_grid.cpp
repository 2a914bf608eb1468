#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "dsde/grid.hpp"

using namespace dsde;

TEST_CASE("grid index counts") {
    const TimeGrid a = make_time_grid(15.0, 5.0, 0.01);
    CHECK(a.lag_points == 1500);
    CHECK(a.step_count == 500);
    const TimeGrid b = make_time_grid(4.0, 365.0, 1.0);
    CHECK(b.lag_points == 4);
    CHECK(b.step_count == 365);
    const TimeGrid c = make_time_grid(0.0, 1.0, 0.5);
    CHECK(c.lag_points == 0);
    CHECK(c.step_count == 2);
    CHECK(c.time(-0) == 0.0);
    CHECK(c.total_points() == 3);
}

TEST_CASE("non-commensurate grids are rejected") {
    CHECK_THROWS_AS(make_time_grid(1.0, 1.0, 0.3), NonCommensurate);
    CHECK_THROWS_AS(make_time_grid(0.35, 1.0, 0.1), NonCommensurate);
    CHECK_THROWS_AS(make_time_grid(1.0, 0.0, 0.1), NonCommensurate);
    CHECK_THROWS_AS(make_time_grid(-1.0, 1.0, 0.1), NonCommensurate);
}

namespace {

Path constant_path(const TimeGrid& grid, std::vector<double> value) {
    Path p{grid, static_cast<int>(value.size()), {}};
    for (long k = -grid.lag_points; k <= grid.step_count; ++k)
        p.values.insert(p.values.end(), value.begin(), value.end());
    return p;
}

}  // namespace

TEST_CASE("projection of a constant path") {
    const TimeGrid grid = make_time_grid(4.0, 4.0, 1.0);
    const Path path = constant_path(grid, {3.25});
    const LagVector lv = project(path, 4, 2);
    REQUIRE(lv.entries.size() == 4);
    for (double v : lv.entries) CHECK(v == 3.25);
}

TEST_CASE("projection reads the values just before the reference index") {
    const TimeGrid grid = make_time_grid(3.0, 3.0, 1.0);
    Path path = constant_path(grid, {0.0});
    path.at(0)[0] = 1.0;
    path.at(1)[0] = 2.0;
    const LagVector lv = project(path, 2, 2);  // lags at k = 0, 1
    CHECK(lv.entries[0] == 1.0);
    CHECK(lv.entries[1] == 2.0);
}

TEST_CASE("lag offsets are the p most recent grid points") {
    // reference k with p = 4 lags covers t_k - 4dt .. t_k - dt
    const TimeGrid grid = make_time_grid(4.0, 2.0, 1.0);
    Path path = constant_path(grid, {0.0});
    for (long k = -4; k <= 2; ++k) path.at(k)[0] = static_cast<double>(k);
    const LagVector lv = project(path, 4, 0);
    CHECK(lv.entries[0] == -4.0);
    CHECK(lv.entries[1] == -3.0);
    CHECK(lv.entries[2] == -2.0);
    CHECK(lv.entries[3] == -1.0);
}

TEST_CASE("projection without history throws") {
    const TimeGrid grid = make_time_grid(2.0, 2.0, 1.0);
    const Path path = constant_path(grid, {1.0});
    CHECK_THROWS_AS(project(path, 4, 1), InsufficientHistory);
}

TEST_CASE("linear interpolation onto the initial segment") {
    const TimeGrid grid = make_time_grid(1.0, 1.0, 0.5);
    SUBCASE("samples already on the grid copy through") {
        const auto out = linearize_initial({{-1.0, 5.0}, {-0.5, 6.0}, {0.0, 7.0}}, grid);
        REQUIRE(out.size() == 3);
        CHECK(out[0] == 5.0);
        CHECK(out[1] == 6.0);
        CHECK(out[2] == 7.0);
    }
    SUBCASE("midpoint value") {
        const auto out = linearize_initial({{-1.0, 0.0}, {0.0, 2.0}}, grid);
        CHECK(out[0] == 0.0);
        CHECK(out[1] == doctest::Approx(1.0));
        CHECK(out[2] == 2.0);
    }
    SUBCASE("gap detection") {
        CHECK_THROWS_AS(linearize_initial({{-0.4, 0.0}, {0.0, 1.0}}, grid), GapTooLarge);
    }
}

TEST_CASE("interpolation error of a smooth function obeys the classical bound") {
    // eta(t) = t^2 sampled with spacing h: max grid error <= max|eta''| h^2 / 8
    const TimeGrid grid = make_time_grid(2.0, 1.0, 0.01);
    const double h = 0.25;
    std::vector<std::pair<double, double>> samples;
    for (double t = -2.0; t <= 1e-12; t += h) samples.emplace_back(t, t * t);
    samples.back().first = 0.0;
    const auto out = linearize_initial(samples, grid);
    double max_err = 0.0;
    for (long k = -grid.lag_points; k <= 0; ++k) {
        const double t = grid.time(k);
        max_err = std::max(max_err, std::abs(out[grid.offset(k)] - t * t));
    }
    CHECK(max_err <= 2.0 * h * h / 8.0 + 1e-12);
    CHECK(max_err > 0.0);
}
