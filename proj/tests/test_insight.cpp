#include <doctest.h>

#include <cmath>

#include "xai/insight.hpp"
#include "xai/rng.hpp"

using namespace xai;

namespace {

TabularBatch two_cont(const std::vector<double>& a, const std::vector<double>& b) {
    TabularSchema schema;
    schema.columns.push_back({"a", ColumnKind::Continuous, {}});
    schema.columns.push_back({"b", ColumnKind::Continuous, {}});
    TabularBatch batch;
    batch.schema = schema;
    for (std::size_t i = 0; i < a.size(); ++i) batch.rows.push_back({Cell{a[i]}, Cell{b[i]}});
    return batch;
}

}  // namespace

TEST_CASE("correlation diagonal is 1 and y = -x gives -1") {
    std::vector<double> a, b;
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const double v = rng.normal();
        a.push_back(v);
        b.push_back(-v);
    }
    const auto r = correlation_matrix(two_cont(a, b));
    CHECK(r.matrix.at(0, 0) == doctest::Approx(1.0));
    CHECK(r.matrix.at(1, 1) == doctest::Approx(1.0));
    CHECK(r.matrix.at(0, 1) == doctest::Approx(-1.0));
    CHECK(r.matrix.at(1, 0) == doctest::Approx(-1.0));
}

TEST_CASE("correlation matrix is symmetric with entries in range") {
    TabularSchema schema;
    schema.columns.push_back({"x", ColumnKind::Continuous, {}});
    schema.columns.push_back({"c", ColumnKind::Categorical, {"u", "v", "w"}});
    schema.columns.push_back({"d", ColumnKind::Categorical, {"p", "q"}});
    TabularBatch batch;
    batch.schema = schema;
    Rng rng(2);
    const char* cs[] = {"u", "v", "w"};
    const char* ds[] = {"p", "q"};
    for (int i = 0; i < 200; ++i)
        batch.rows.push_back({Cell{rng.normal()}, Cell{std::string(cs[rng.index(3)])},
                              Cell{std::string(ds[rng.index(2)])}});
    const auto r = correlation_matrix(batch);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(r.matrix.at(i, j) == r.matrix.at(j, i));
            CHECK(r.matrix.at(i, j) >= -1.0 - 1e-12);
            CHECK(r.matrix.at(i, j) <= 1.0 + 1e-12);
        }
}

TEST_CASE("independent categorical columns have near-zero Cramér's V") {
    TabularSchema schema;
    schema.columns.push_back({"c1", ColumnKind::Categorical, {"a", "b", "c"}});
    schema.columns.push_back({"c2", ColumnKind::Categorical, {"x", "y", "z"}});
    TabularBatch batch;
    batch.schema = schema;
    Rng rng(3);
    const char* l1[] = {"a", "b", "c"};
    const char* l2[] = {"x", "y", "z"};
    for (int i = 0; i < 10000; ++i)
        batch.rows.push_back(
            {Cell{std::string(l1[rng.index(3)])}, Cell{std::string(l2[rng.index(3)])}});
    const auto r = correlation_matrix(batch);
    CHECK(r.matrix.at(0, 1) <= 0.05);
    CHECK(r.matrix.at(0, 1) >= 0.0);
}

TEST_CASE("constant column is flagged and zeroed") {
    const auto r = correlation_matrix(two_cont({1, 1, 1, 1}, {1, 2, 3, 4}));
    CHECK(r.constant_column[0]);
    CHECK(r.matrix.at(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("class imbalance") {
    TabularSchema schema;
    schema.columns.push_back({"y", ColumnKind::Categorical, {"0", "1"}});
    schema.target = "y";
    TabularBatch batch;
    batch.schema = schema;

    SUBCASE("50/50 labels") {
        for (int i = 0; i < 10; ++i)
            batch.rows.push_back({Cell{std::string(i % 2 ? "1" : "0")}});
        const auto r = class_imbalance(batch, "y");
        CHECK(r.frequencies[0] == doctest::Approx(0.5));
        CHECK(r.frequencies[1] == doctest::Approx(0.5));
        CHECK(r.counts[0] + r.counts[1] == batch.n_rows());
    }
    SUBCASE("90/10 split") {
        for (int i = 0; i < 100; ++i)
            batch.rows.push_back({Cell{std::string(i < 90 ? "0" : "1")}});
        const auto r = class_imbalance(batch, "y");
        CHECK(r.frequencies[0] == doctest::Approx(0.9));
        CHECK(r.frequencies[1] == doctest::Approx(0.1));
    }
}

TEST_CASE("cross-tab matches a hand count") {
    TabularSchema schema;
    schema.columns.push_back({"g", ColumnKind::Categorical, {"m", "f"}});
    schema.columns.push_back({"y", ColumnKind::Categorical, {"0", "1"}});
    schema.target = "y";
    TabularBatch batch;
    batch.schema = schema;
    // hand-counted: (m,0)x3 (m,1)x2 (f,0)x1 (f,1)x4
    const std::vector<std::pair<const char*, const char*>> data = {
        {"m", "0"}, {"m", "0"}, {"m", "0"}, {"m", "1"}, {"m", "1"},
        {"f", "0"}, {"f", "1"}, {"f", "1"}, {"f", "1"}, {"f", "1"}};
    for (const auto& [g, y] : data)
        batch.rows.push_back({Cell{std::string(g)}, Cell{std::string(y)}});
    const auto r = class_imbalance(batch, "y", std::string("g"));
    REQUIRE(r.cross_counts.size() == 2);  // classes 0,1
    REQUIRE(r.by_categories == std::vector<std::string>{"m", "f"});
    CHECK(r.cross_counts[0][0] == 3);
    CHECK(r.cross_counts[0][1] == 1);
    CHECK(r.cross_counts[1][0] == 2);
    CHECK(r.cross_counts[1][1] == 4);
}

TEST_CASE("feature identical to a balanced binary target has MI near ln 2") {
    TabularSchema schema;
    schema.columns.push_back({"copy", ColumnKind::Categorical, {"0", "1"}});
    schema.columns.push_back({"noise", ColumnKind::Continuous, {}});
    schema.columns.push_back({"y", ColumnKind::Categorical, {"0", "1"}});
    schema.target = "y";
    TabularBatch batch;
    batch.schema = schema;
    Rng rng(4);
    for (int i = 0; i < 2000; ++i) {
        const std::string label = i % 2 ? "1" : "0";
        batch.rows.push_back({Cell{label}, Cell{rng.normal()}, Cell{label}});
    }
    const auto r = select_features(batch, "y", 1);
    REQUIRE(r.ranked.size() == 2);
    CHECK(r.ranked[0].first == "copy");
    CHECK(std::fabs(r.ranked[0].second - std::log(2.0)) <= 2e-2);
    CHECK(r.selected == std::vector<std::string>{"copy"});
}

TEST_CASE("noise feature has near-zero MI and k = all selects all") {
    TabularSchema schema;
    schema.columns.push_back({"noise", ColumnKind::Continuous, {}});
    schema.columns.push_back({"y", ColumnKind::Categorical, {"0", "1"}});
    schema.target = "y";
    TabularBatch batch;
    batch.schema = schema;
    Rng rng(5);
    for (int i = 0; i < 10000; ++i)
        batch.rows.push_back({Cell{rng.normal()}, Cell{std::string(rng.index(2) ? "1" : "0")}});
    const auto r = select_features(batch, "y", 1);
    CHECK(r.ranked[0].second <= 0.02);
    CHECK(r.selected.size() == 1);
    // scores sorted non-increasing
    for (std::size_t i = 1; i < r.ranked.size(); ++i)
        CHECK(r.ranked[i - 1].second >= r.ranked[i].second);
}
