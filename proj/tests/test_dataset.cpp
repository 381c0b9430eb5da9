#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "discrim/dataset.hpp"
#include "test_util.hpp"

using namespace discrim;
using testutil::TempDir;
using testutil::write_file;

namespace {

// Alarm-style fixture: 20 TP and 11 FP base-positive rows, one informative
// feature (salary-like) that separates 10 of the 11 FP below the 20 TP.
std::string alarms_csv() {
    std::ostringstream out;
    out << "salary,noise,truth,pred\n";
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> jitter(0.0, 0.01);
    for (int i = 0; i < 20; ++i) // TP: salary high
        out << 0.9 + jitter(rng) << "," << i << ",1,1\n";
    for (int i = 0; i < 10; ++i) // FP: salary low
        out << 0.2 + jitter(rng) << "," << i << ",0,1\n";
    out << "0.95,3,0,1\n"; // the stubborn FP above the threshold
    return out.str();
}

} // namespace

TEST_CASE("load_dataset reads the alarm fixture and counts quadrants") {
    TempDir dir;
    const auto path = dir.file("alarms.csv");
    write_file(path, alarms_csv());

    const auto ds = load_dataset(path, CsvSchema{"truth", "pred", {}, {}});
    REQUIRE(ds.row_count() == 31);
    REQUIRE(ds.feature_count() == 2);
    REQUIRE(ds.feature_names == std::vector<std::string>{"salary", "noise"});
    REQUIRE(ds.rows_dropped == 0);

    const auto c = confusion_counts(ds);
    CHECK(c.tp == 20);
    CHECK(c.fp == 11);
    CHECK(c.tn == 0);
    CHECK(c.fn == 0);
    CHECK(c.total() == 31);
}

TEST_CASE("load_dataset drops rows with missing or non-numeric features") {
    TempDir dir;
    const auto path = dir.file("gaps.csv");
    write_file(path,
               "x,y,truth,pred\n"
               "1.0,2.0,1,1\n"
               "2.0,n/a,0,1\n"
               "3.0,4.0,positive,negative\n"
               "4.5,,1,0\n"
               "5.0,6.0,negative,0\n");

    const auto ds = load_dataset(path, CsvSchema{"truth", "pred", {}, {}});
    CHECK(ds.row_count() == 3);
    CHECK(ds.rows_dropped == 2);
    CHECK(ds.truth == std::vector<std::uint8_t>{1, 1, 0});
    CHECK(ds.base_pred == std::vector<std::uint8_t>{1, 0, 0});
}

TEST_CASE("load_dataset error paths") {
    TempDir dir;

    SECTION("missing file") {
        CHECK_THROWS_AS(load_dataset(dir.file("nope.csv"), CsvSchema{"t", "p", {}, {}}), IoError);
    }
    SECTION("empty file reports zero usable rows") {
        const auto path = dir.file("empty.csv");
        write_file(path, "");
        CHECK_THROWS_WITH(load_dataset(path, CsvSchema{"t", "p", {}, {}}),
                          Catch::Matchers::ContainsSubstring("zero usable rows"));
    }
    SECTION("header only reports zero usable rows") {
        const auto path = dir.file("headeronly.csv");
        write_file(path, "x,t,p\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"t", "p", {}, {}}), DataError);
    }
    SECTION("all rows dropped reports zero usable rows") {
        const auto path = dir.file("alldropped.csv");
        write_file(path, "x,t,p\nn/a,1,1\n,0,1\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"t", "p", {}, {}}), DataError);
    }
    SECTION("schema column absent") {
        const auto path = dir.file("cols.csv");
        write_file(path, "x,truth,pred\n1,1,1\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"label", "pred", {}, {}}), SchemaError);
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"truth", "pred", {"missing"}, {}}),
                        SchemaError);
    }
    SECTION("labels outside the accepted vocabulary are an error, not a coercion") {
        const auto path = dir.file("badlabel.csv");
        write_file(path, "x,truth,pred\n1,yes,1\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"truth", "pred", {}, {}}), SchemaError);
    }
    SECTION("ragged row") {
        const auto path = dir.file("ragged.csv");
        write_file(path, "x,y,truth,pred\n1,2,1,1\n3,0,1\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"truth", "pred", {}, {}}), SchemaError);
    }
    SECTION("truth and pred must differ") {
        const auto path = dir.file("same.csv");
        write_file(path, "x,truth\n1,1\n");
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"truth", "truth", {}, {}}), SchemaError);
    }
}

TEST_CASE("load_dataset honors RFC 4180 quoting and include/exclude lists") {
    TempDir dir;
    const auto path = dir.file("quoted.csv");
    write_file(path,
               "\"name, full\",amount,junk,truth,pred\r\n"
               "1.5,2.0,\"says \"\"hi\"\"\",1,1\r\n"
               "2.5,3.0,\"multi\nline\",0,1\r\n");

    SECTION("quoted headers and fields parse; non-numeric column excluded") {
        const auto ds =
            load_dataset(path, CsvSchema{"truth", "pred", {}, {"junk"}});
        REQUIRE(ds.row_count() == 2);
        REQUIRE(ds.feature_names == std::vector<std::string>{"name, full", "amount"});
        CHECK(ds.value(1, 0) == 2.5);
    }
    SECTION("include list keeps file column order") {
        const auto ds =
            load_dataset(path, CsvSchema{"truth", "pred", {"amount", "name, full"}, {}});
        REQUIRE(ds.feature_names == std::vector<std::string>{"name, full", "amount"});
    }
    SECTION("without exclusion the non-numeric junk column drops every row") {
        CHECK_THROWS_AS(load_dataset(path, CsvSchema{"truth", "pred", {}, {}}), DataError);
    }
}

TEST_CASE("confusion_counts matches a per-row tally on random data") {
    std::mt19937 rng(42);
    std::bernoulli_distribution coin(0.4);
    const std::size_t n = 1000;
    std::vector<std::uint8_t> truth(n), pred(n);
    std::vector<double> col(n);
    for (std::size_t i = 0; i < n; ++i) {
        truth[i] = coin(rng);
        pred[i] = coin(rng);
        col[i] = static_cast<double>(i);
    }
    const auto ds = testutil::make_dataset({col}, truth, pred);

    // independent tally
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (truth[i] == 1 && pred[i] == 1) ++tp;
        if (truth[i] == 0 && pred[i] == 1) ++fp;
        if (truth[i] == 0 && pred[i] == 0) ++tn;
        if (truth[i] == 1 && pred[i] == 0) ++fn;
    }
    const auto c = confusion_counts(ds);
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.tn == tn);
    CHECK(c.fn == fn);
    CHECK(c.total() == static_cast<std::int64_t>(n));

    SECTION("permutation invariance") {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<std::uint8_t> t2(n), p2(n);
        std::vector<double> c2(n);
        for (std::size_t i = 0; i < n; ++i) {
            t2[i] = truth[order[i]];
            p2[i] = pred[order[i]];
            c2[i] = col[order[i]];
        }
        const auto shuffled = testutil::make_dataset({c2}, t2, p2);
        const auto cs = confusion_counts(shuffled);
        CHECK(cs.tp == c.tp);
        CHECK(cs.fp == c.fp);
        CHECK(cs.tn == c.tn);
        CHECK(cs.fn == c.fn);
    }
}

TEST_CASE("confusion_counts on a single-quadrant dataset") {
    const std::size_t n = 17;
    const auto ds = testutil::make_dataset({std::vector<double>(n, 1.0)},
                                           std::vector<std::uint8_t>(n, 1),
                                           std::vector<std::uint8_t>(n, 1));
    const auto c = confusion_counts(ds);
    CHECK(c.tp == static_cast<std::int64_t>(n));
    CHECK(c.fp + c.tn + c.fn == 0);
}

TEST_CASE("working_subset selects the mode's flippable side") {
    // 83 base negatives: 37 TN + 46 FN, plus a few positives
    std::vector<std::uint8_t> truth, pred;
    for (int i = 0; i < 37; ++i) { truth.push_back(0); pred.push_back(0); } // TN
    for (int i = 0; i < 46; ++i) { truth.push_back(1); pred.push_back(0); } // FN
    for (int i = 0; i < 5; ++i) { truth.push_back(1); pred.push_back(1); }  // TP
    std::vector<double> col(truth.size());
    std::iota(col.begin(), col.end(), 0.0);
    const auto ds = testutil::make_dataset({col}, truth, pred);

    const auto c = confusion_counts(ds);
    CHECK(c.tn == 37);
    CHECK(c.fn == 46);

    const auto neg = working_subset(ds, Mode::ImproveTP);
    REQUIRE(neg.rows.size() == 83);
    std::int64_t primaries = 0;
    for (auto p : neg.is_primary) primaries += p;
    CHECK(primaries == 46); // FN are the flip targets

    const auto pos = working_subset(ds, Mode::ReduceFP);
    REQUIRE(pos.rows.size() == 5);

    SECTION("the two subsets partition the rows") {
        std::vector<bool> seen(ds.row_count(), false);
        for (auto r : neg.rows) seen[r] = true;
        for (auto r : pos.rows) {
            CHECK(!seen[r]);
            seen[r] = true;
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }));
    }
}

TEST_CASE("working_subset rejects a vacuous mode") {
    const auto ds = testutil::make_dataset({{1.0, 2.0}}, {1, 0}, {0, 0});
    CHECK_THROWS_AS(working_subset(ds, Mode::ReduceFP), DataError);
    CHECK(working_subset(ds, Mode::ImproveTP).rows.size() == 2);
}

TEST_CASE("load_dataset is deterministic over identical bytes") {
    TempDir dir;
    const auto path = dir.file("det.csv");
    write_file(path, alarms_csv());
    const auto a = load_dataset(path, CsvSchema{"truth", "pred", {}, {}});
    const auto b = load_dataset(path, CsvSchema{"truth", "pred", {}, {}});
    CHECK(a.columns == b.columns);
    CHECK(a.truth == b.truth);
    CHECK(a.base_pred == b.base_pred);
}
