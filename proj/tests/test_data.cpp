#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hnmvts/data.hpp"
#include "hnmvts/error.hpp"

#include "oracles.hpp"

using namespace hnmvts;
namespace fs = std::filesystem;

namespace {

SeriesTable ramp_table(std::size_t t, std::size_t n) {
    SeriesTable table{Tensor({t, n}), {}, {}};
    for (std::size_t c = 0; c < n; ++c) table.channel_names.push_back("c" + std::to_string(c));
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t c = 0; c < n; ++c) table.values.at({i, c}) = static_cast<Real>(100 * c + i);
    return table;
}

SeriesTable random_table(Rng& rng, std::size_t t, std::size_t n) {
    SeriesTable table{oracle::random(rng, {t, n}), {}, {}};
    for (std::size_t c = 0; c < n; ++c) table.channel_names.push_back("c" + std::to_string(c));
    return table;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("hnmvts_test_" + name);
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST_SUITE("splits") {
    TEST_CASE("7:2:1 of 100 rows") {
        const Splits s = chrono_split(ramp_table(100, 2), SplitSpec{});
        CHECK(s.train.length() == 70);
        CHECK(s.val.length() == 20);
        CHECK(s.test.length() == 10);
    }

    TEST_CASE("ETT protocol 6:2:2 with truncation 57600") {
        const Splits s = chrono_split(ramp_table(69680, 1), SplitSpec{0.6, 0.2, 0.2, 57600});
        CHECK(s.train.length() == 34560);
        CHECK(s.val.length() == 11520);
        CHECK(s.test.length() == 11520);
        CHECK(s.test.at(11519, 0) == 57599);
    }

    TEST_CASE("ratios (1,0,0) put everything in train") {
        const Splits s = chrono_split(ramp_table(17, 2), SplitSpec{1, 0, 0, {}});
        CHECK(s.train.length() == 17);
        CHECK(s.val.length() == 0);
        CHECK(s.test.length() == 0);
    }

    TEST_CASE("concatenated splits reproduce the truncated table") {
        Rng rng(1);
        for (std::size_t t : {10, 33, 101, 257}) {
            const SeriesTable table = random_table(rng, t, 3);
            for (auto spec : {SplitSpec{}, SplitSpec{0.6, 0.2, 0.2, t - 3}, SplitSpec{0.5, 0.25, 0.25, {}}}) {
                const Splits s = chrono_split(table, spec);
                const std::size_t total = spec.truncate_to ? *spec.truncate_to : t;
                REQUIRE(s.train.length() + s.val.length() + s.test.length() == total);
                std::size_t row = 0;
                for (const SeriesTable* part : {&s.train, &s.val, &s.test})
                    for (std::size_t i = 0; i < part->length(); ++i, ++row)
                        for (std::size_t c = 0; c < 3; ++c) CHECK(part->at(i, c) == table.at(row, c));
            }
        }
    }

    TEST_CASE("invalid ratios are rejected") {
        CHECK_THROWS_AS(chrono_split(ramp_table(10, 1), SplitSpec{0.7, 0.2, 0.2, {}}), ContractError);
        CHECK_THROWS_AS(chrono_split(ramp_table(10, 1), SplitSpec{-0.1, 0.6, 0.5, {}}), ContractError);
    }
}

TEST_SUITE("windows") {
    TEST_CASE("t = T + H gives one window at origin 0") {
        const auto w = make_windows(ramp_table(5, 2), 3, 2);
        REQUIRE(w.size() == 1);
        CHECK(w[0].origin == 0);
    }

    TEST_CASE("t=10, T=3, H=2: six windows with channel-major layout") {
        const auto w = make_windows(ramp_table(10, 2), 3, 2);
        REQUIRE(w.size() == 6);
        CHECK(w[0].x.shape() == Shape{2, 3});
        CHECK(w[0].y.shape() == Shape{2, 2});
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(w[0].x.at({0, t}) == t);
            CHECK(w[0].x.at({1, t}) == 100 + t);
        }
        CHECK(w[0].y.at({0, 0}) == 3);
        CHECK(w[0].y.at({0, 1}) == 4);
        CHECK(w[5].origin == 5);
        CHECK(w[5].y.at({1, 1}) == 109);
    }

    TEST_CASE("t=446, T=336, H=96 gives 15 windows") { CHECK(window_count(446, 336, 96) == 15); }

    TEST_CASE("too-short series states the required length") {
        try {
            window_count(10, 8, 4);
            FAIL("expected WindowError");
        } catch (const WindowError& e) {
            CHECK(std::string(e.what()).find("12") != std::string::npos);
        }
    }

    TEST_CASE("count equals t - (T + H) + 1 for all valid triples") {
        for (std::size_t t = 2; t < 40; ++t)
            for (std::size_t T = 1; T < t; ++T)
                for (std::size_t H = 1; T + H <= t; ++H) CHECK(window_count(t, T, H) == t - (T + H) + 1);
    }

    TEST_CASE("WindowSet gather matches make_windows") {
        Rng rng(2);
        const SeriesTable table = random_table(rng, 40, 3);
        const auto all = make_windows(table, 7, 4);
        const WindowSet set(table, 7, 4);
        REQUIRE(set.size() == all.size());
        std::vector<std::size_t> origins{5, 0, 29};
        Tensor x, y;
        set.gather(origins, x, y);
        CHECK(x.shape() == Shape{3, 3, 7});
        CHECK(y.shape() == Shape{3, 3, 4});
        for (std::size_t b = 0; b < 3; ++b) {
            const auto& w = all[origins[b]];
            for (std::size_t i = 0; i < w.x.size(); ++i) CHECK(x[b * w.x.size() + i] == w.x[i]);
            for (std::size_t i = 0; i < w.y.size(); ++i) CHECK(y[b * w.y.size() + i] == w.y[i]);
        }
        CHECK(set.pair(29).x == all[29].x);
    }
}

TEST_SUITE("pearson") {
    TEST_CASE("duplicate and negated channels") {
        Rng rng(3);
        SeriesTable t = random_table(rng, 50, 3);
        for (std::size_t i = 0; i < 50; ++i) {
            t.values.at({i, 1}) = t.values.at({i, 0});
            t.values.at({i, 2}) = -t.values.at({i, 0});
        }
        const Tensor r = pearson_corr(t);
        CHECK(r.at({0, 1}) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r.at({0, 2}) == doctest::Approx(-1.0).epsilon(1e-14));
    }

    TEST_CASE("matches the two-pass formula oracle") {
        Rng rng(4);
        const SeriesTable t = random_table(rng, 200, 3);
        const Tensor r = pearson_corr(t);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(std::abs(r.at({i, j}) - oracle::pearson(oracle::column(t, i), oracle::column(t, j))) < 1e-12);
    }

    TEST_CASE("invariant to positive affine rescaling") {
        Rng rng(5);
        const SeriesTable t = random_table(rng, 120, 4);
        SeriesTable s = t;
        for (std::size_t i = 0; i < 120; ++i)
            for (std::size_t c = 0; c < 4; ++c) s.values.at({i, c}) = t.values.at({i, c}) * (c + 0.5) * 37 + 1000 * c;
        CHECK(max_abs_diff(pearson_corr(t), pearson_corr(s)) < 1e-9);
    }

    TEST_CASE("zero-variance channel: zero off-diagonal, unit diagonal, reported") {
        Rng rng(6);
        SeriesTable t = random_table(rng, 30, 3);
        for (std::size_t i = 0; i < 30; ++i) t.values.at({i, 1}) = 4.0;
        std::vector<std::string> flat;
        const Tensor r = pearson_corr(t, &flat);
        CHECK(r.at({1, 1}) == 1);
        CHECK(r.at({0, 1}) == 0);
        CHECK(r.at({1, 2}) == 0);
        CHECK(flat == std::vector<std::string>{"c1"});
    }
}

TEST_SUITE("standardizer") {
    TEST_CASE("fitted split becomes zero-mean unit-variance; others use the same statistics") {
        Rng rng(7);
        SeriesTable a = random_table(rng, 100, 2);
        for (auto& v : a.values.data()) v = v * 5 + 3;
        const Standardizer s = Standardizer::fit(a);
        const SeriesTable z = s.apply(a);
        for (std::size_t c = 0; c < 2; ++c) {
            double m = 0, v = 0;
            for (std::size_t i = 0; i < 100; ++i) m += z.at(i, c) / 100;
            for (std::size_t i = 0; i < 100; ++i) v += (z.at(i, c) - m) * (z.at(i, c) - m) / 100;
            CHECK(std::abs(m) < 1e-12);
            CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
        }
        SeriesTable b = a.rows(0, 3);
        const SeriesTable zb = s.apply(b);
        CHECK(zb.at(2, 1) == doctest::Approx((b.at(2, 1) - s.mean[1]) / s.stddev[1]));
    }
}

TEST_SUITE("csv") {
    TEST_CASE("3-row, 2-channel file with a timestamp column") {
        const auto p = write_file("ok.csv", "date,OT,HUFL\n2016-07-01 00:00:00,1.5,2\n2016-07-01 00:15:00,-3,4e-1\n"
                                            "2016-07-01 00:30:00,5,6\n");
        const SeriesTable t = load_csv(p, std::string("date"));
        CHECK(t.length() == 3);
        CHECK(t.channels() == 2);
        CHECK(t.channel_names == std::vector<std::string>{"OT", "HUFL"});
        CHECK(t.at(1, 1) == doctest::Approx(0.4));
    }

    TEST_CASE("round trip through write_csv is exact") {
        Rng rng(8);
        const SeriesTable t = random_table(rng, 20, 3);
        const auto p = fs::temp_directory_path() / "hnmvts_test_roundtrip.csv";
        write_csv(p, t);
        const SeriesTable back = load_csv(p);
        CHECK(back.values == t.values);
        CHECK(back.channel_names == t.channel_names);
    }

    TEST_CASE("blank cell is reported with its location") {
        const auto p = write_file("blank.csv", "a,b\n1,2\n3,\n4,5\n");
        try {
            load_csv(p);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("line 3") != std::string::npos);
            CHECK(msg.find("'b'") != std::string::npos);
        }
    }

    TEST_CASE("non-numeric cell, non-monotone timestamps, missing file") {
        CHECK_THROWS_AS(load_csv(write_file("text.csv", "a,b\n1,2\n3,x\n")), LoadError);
        CHECK_THROWS_AS(load_csv(write_file("ts.csv", "t,a\n1,2\n3,4\n2,5\n"), std::string("t")), LoadError);
        CHECK_THROWS_AS(load_csv(write_file("ts2.csv", "t,a\n1,2\n1,4\n"), std::string("t")), LoadError);
        CHECK_THROWS_AS(load_csv(fs::temp_directory_path() / "hnmvts_does_not_exist.csv"), LoadError);
        CHECK_THROWS_AS(load_csv(write_file("nocol.csv", "a,b\n1,2\n3,4\n"), std::string("date")), LoadError);
    }
}

TEST_SUITE("synthetic") {
    TEST_CASE("rho=1, noise=0 makes group members identical") {
        SyntheticSpec spec{6, 500, {0, 0, 1, 1, 2, 2}, 1.0, 0.0, 0.8};
        const SeriesTable t = gen_synthetic(spec, 1);
        for (std::size_t i = 0; i < 500; ++i) {
            CHECK(t.at(i, 0) == t.at(i, 1));
            CHECK(t.at(i, 4) == t.at(i, 5));
        }
        CHECK(t.at(10, 0) != t.at(10, 2));
    }

    TEST_CASE("rho=0 gives near-zero cross-correlation at t=4096") {
        SyntheticSpec spec{4, 4096, {0, 0, 0, 0}, 0.0, 0.1, 0.5};
        const Tensor r = pearson_corr(gen_synthetic(spec, 2));
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = i + 1; j < 4; ++j) CHECK(std::abs(r.at({i, j})) < 0.1);
    }

    TEST_CASE("two groups with rho=0.95 show block structure") {
        SyntheticSpec spec{8, 4096, {0, 0, 0, 0, 1, 1, 1, 1}, 0.95, 0.1, 0.8};
        const Tensor r = pearson_corr(gen_synthetic(spec, 3));
        double within = 0, between = 0;
        int nw = 0, nb = 0;
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = i + 1; j < 8; ++j) {
                if ((i < 4) == (j < 4)) {
                    within += r.at({i, j});
                    ++nw;
                } else {
                    between += r.at({i, j});
                    ++nb;
                }
            }
        CHECK(within / nw > between / nb + 0.5);
    }

    TEST_CASE("bit-reproducible per (spec, seed)") {
        SyntheticSpec spec;
        CHECK(gen_synthetic(spec, 9).values == gen_synthetic(spec, 9).values);
        CHECK_FALSE(gen_synthetic(spec, 9).values == gen_synthetic(spec, 10).values);
    }

    TEST_CASE("invalid parameters are contract errors") {
        CHECK_THROWS_AS(gen_synthetic(SyntheticSpec{4, 100, {}, 1.5, 0.1, 0.8}, 0), ContractError);
        CHECK_THROWS_AS(gen_synthetic(SyntheticSpec{4, 100, {}, -0.1, 0.1, 0.8}, 0), ContractError);
        CHECK_THROWS_AS(gen_synthetic(SyntheticSpec{4, 100, {0, 1}, 0.5, 0.1, 0.8}, 0), ContractError);
    }
}
