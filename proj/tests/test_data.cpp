#include <doctest.h>

#include <cmath>
#include <fstream>

#include "support/fixtures.hpp"
#include "wdrc/data.hpp"

using namespace wdrc::data;
using Eigen::MatrixXd;

TEST_SUITE_BEGIN("data");

namespace {
std::string write_csv(const std::string& name, const std::string& body) {
    return fixtures::write_temp("data", name, body);
}
}  // namespace

TEST_CASE("load_csv parses a well-formed file") {
    auto path = write_csv("ok.csv",
                          "date,AAA,BBB,RF_ANNUAL\n"
                          "2024-01-02,100.0,50.0,0.05\n"
                          "2024-01-03,101.0,49.5,0.05\n"
                          "2024-01-04,102.5,49.0,0.051\n");
    auto panel = load_csv(path);
    CHECK(panel.days() == 3);
    CHECK(panel.assets() == 2);
    CHECK(panel.tickers[0] == "AAA");
    CHECK(panel.prices(2, 0) == doctest::Approx(102.5));
    CHECK(panel.riskfree_annual[2] == doctest::Approx(0.051));
}

TEST_CASE("load_csv rejects duplicates, bad numbers, bad prices, bad headers") {
    auto dup = write_csv("dup.csv",
                         "date,AAA,RF_ANNUAL\n"
                         "2024-01-02,100.0,0.05\n"
                         "2024-01-02,101.0,0.05\n");
    CHECK_THROWS_WITH_AS(load_csv(dup), doctest::Contains("duplicate date"), DataError);

    auto bad = write_csv("bad.csv",
                         "date,AAA,RF_ANNUAL\n"
                         "2024-01-02,1x0.0,0.05\n");
    CHECK_THROWS_WITH_AS(load_csv(bad), doctest::Contains("malformed number"), DataError);

    auto neg = write_csv("neg.csv",
                         "date,AAA,RF_ANNUAL\n"
                         "2024-01-02,-3.0,0.05\n");
    CHECK_THROWS_AS(load_csv(neg), DataError);

    auto noh = write_csv("noh.csv", "AAA,RF_ANNUAL\n2024-01-02,0.05\n");
    CHECK_THROWS_WITH_AS(load_csv(noh), doctest::Contains("missing column"), DataError);

    CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("rows with empty cells are dropped") {
    auto path = write_csv("gap.csv",
                          "date,AAA,RF_ANNUAL\n"
                          "2024-01-02,100.0,0.05\n"
                          "2024-01-03,,0.05\n"
                          "2024-01-04,101.0,0.05\n");
    auto panel = load_csv(path);
    CHECK(panel.days() == 2);
    CHECK(panel.dates[1] == "2024-01-04");
}

TEST_CASE("riskfree_n conversion") {
    CHECK(riskfree_n(0.0, 17) == 0.0);
    // Quoted targets carry 6 decimals, so compare at that print precision.
    CHECK(riskfree_n(0.0504, 21) == doctest::Approx(0.004209).epsilon(0).scale(1).epsilon(1e-6));
    CHECK(riskfree_n(0.05, 252) == doctest::Approx(0.051267).epsilon(0).scale(1).epsilon(2e-6));
    CHECK(riskfree_n(0.0504, 21) == doctest::Approx(std::pow(1.0 + 0.0504 / 252.0, 21) - 1.0));
}

TEST_CASE("compound_windows") {
    SUBCASE("constant prices give -r_fn everywhere") {
        std::string body = "date,AAA,RF_ANNUAL\n";
        for (int i = 2; i <= 20; ++i) {
            char buf[64];
            std::snprintf(buf, sizeof(buf), "2024-01-%02d,100.0,0.05\n", i);
            body += buf;
        }
        auto panel = load_csv(write_csv("const.csv", body));
        auto ws = compound_windows(panel, panel.days() - 1, 10, 3);
        CHECK(ws.count() == 8);
        for (int j = 0; j < ws.count(); ++j)
            CHECK(ws.samples(j, 0) == doctest::Approx(-ws.r_fn).epsilon(0).scale(1).epsilon(1e-14));
    }
    SUBCASE("two-day compounding example") {
        auto panel = load_csv(write_csv("two.csv",
                                        "date,AAA,RF_ANNUAL\n"
                                        "2024-01-02,100.0,0\n"
                                        "2024-01-03,110.0,0\n"
                                        "2024-01-04,104.5,0\n"));
        auto ws = compound_windows(panel, 2, 2, 2);
        CHECK(ws.count() == 1);
        CHECK(ws.samples(0, 0) == doctest::Approx(0.045).epsilon(0).scale(1).epsilon(1e-12));
    }
    SUBCASE("sample count is L - n + 1") {
        auto csv = fixtures::synthetic_panel_csv(5, 300, 2);
        auto panel = load_csv(write_csv("synth.csv", csv));
        auto ws = compound_windows(panel, panel.days() - 1, 252, 21);
        CHECK(ws.count() == 232);
    }
    SUBCASE("n = 1 reproduces daily excess returns") {
        auto csv = fixtures::synthetic_panel_csv(6, 60, 2);
        auto panel = load_csv(write_csv("synth1.csv", csv));
        auto ws = compound_windows(panel, panel.days() - 1, 30, 1);
        const MatrixXd daily = panel.daily_returns();
        const int offset = panel.days() - 1 - 30;
        for (int j = 0; j < ws.count(); ++j)
            CHECK(ws.samples(j, 0) ==
                  doctest::Approx(daily(offset + j, 0) - ws.r_fn).epsilon(0).scale(1).epsilon(1e-14));
    }
    SUBCASE("insufficient history") {
        auto csv = fixtures::synthetic_panel_csv(7, 40, 1);
        auto panel = load_csv(write_csv("short.csv", csv));
        CHECK_THROWS_AS(compound_windows(panel, panel.days() - 1, 60, 5), DataError);
    }
}

TEST_CASE("every sample lies inside the fitted support") {
    auto csv = fixtures::synthetic_panel_csv(9, 200, 3);
    auto panel = load_csv(write_csv("sup.csv", csv));
    for (int n : {1, 5, 21}) {
        auto ws = compound_windows(panel, panel.days() - 1, 120, n);
        for (int j = 0; j < ws.count(); ++j)
            CHECK(ws.support.contains(ws.samples.row(j).transpose(), 0.0));
    }
    auto inflated = compound_windows(panel, panel.days() - 1, 120, 5, 0.25);
    auto tight = compound_windows(panel, panel.days() - 1, 120, 5, 0.0);
    CHECK(inflated.support.diameter() == doctest::Approx(1.25 * tight.support.diameter()));
}

TEST_CASE("samples CSV round-trips bit-exactly") {
    auto csv = fixtures::synthetic_panel_csv(10, 120, 2);
    auto panel = load_csv(write_csv("rt.csv", csv));
    auto ws = compound_windows(panel, panel.days() - 1, 60, 5);
    auto path = fixtures::write_temp("data", "samples.csv", "");
    write_samples_csv(ws, path);
    auto back = read_samples_csv(path);
    CHECK(back.horizon == ws.horizon);
    CHECK(back.r_fn == ws.r_fn);  // bit-exact
    REQUIRE(back.samples.rows() == ws.samples.rows());
    for (int r = 0; r < ws.samples.rows(); ++r)
        for (int c = 0; c < ws.samples.cols(); ++c) CHECK(back.samples(r, c) == ws.samples(r, c));
}

TEST_SUITE_END();
