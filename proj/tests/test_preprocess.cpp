#include <doctest.h>

#include <cmath>

#include "xai/preprocess.hpp"

using namespace xai;

namespace {

TabularBatch cont_batch(const std::string& name, const std::vector<double>& values) {
    TabularSchema schema;
    schema.columns.push_back({name, ColumnKind::Continuous, {}});
    TabularBatch b;
    b.schema = schema;
    for (double v : values) b.rows.push_back({Cell{v}});
    return b;
}

}  // namespace

TEST_CASE("standardize uses population std") {
    auto spec = TransformSpec::standard();
    const auto batch = cont_batch("v", {0.0, 2.0});
    const auto ft = fit_transform_spec(spec, batch);
    CHECK(ft.columns[0].mean == doctest::Approx(1.0));
    CHECK(ft.columns[0].stdev == doctest::Approx(1.0));
    const auto m = transform(ft, batch);
    CHECK(m.at(0, 0) == doctest::Approx(-1.0));
    CHECK(m.at(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("zero-variance column falls back to identity with flag") {
    const auto ft = fit_transform_spec(TransformSpec::standard(), cont_batch("v", {5.0, 5.0}));
    CHECK(ft.columns[0].zero_variance);
    const auto m = transform(ft, cont_batch("v", {5.0}));
    CHECK(m.at(0, 0) == doctest::Approx(5.0));
}

TEST_CASE("one-hot gives one slot per category") {
    TabularSchema schema;
    schema.columns.push_back({"c", ColumnKind::Categorical, {"a", "b", "c"}});
    TabularBatch b;
    b.schema = schema;
    b.rows.push_back({Cell{std::string("b")}});
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    CHECK(ft.output_width() == 3);
    const auto v = transform_row(ft, b.rows[0]);
    CHECK(v == std::vector<double>{0.0, 1.0, 0.0});
}

TEST_CASE("unseen category encodes as all-zero one-hot") {
    TabularSchema schema;
    schema.columns.push_back({"c", ColumnKind::Categorical, {"a", "b"}});
    TabularBatch b;
    b.schema = schema;
    b.rows.push_back({Cell{std::string("a")}});
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    const auto v = transform_row(ft, {Cell{std::string("zz")}});
    CHECK(v == std::vector<double>{0.0, 0.0});
}

TEST_CASE("ordinal encoding indexes categories") {
    TransformSpec spec;
    spec.defaults.categorical = CategoricalEncoding::Ordinal;
    TabularSchema schema;
    schema.columns.push_back({"c", ColumnKind::Categorical, {"x", "y"}});
    TabularBatch b;
    b.schema = schema;
    b.rows.push_back({Cell{std::string("y")}});
    const auto ft = fit_transform_spec(spec, b);
    CHECK(transform_row(ft, b.rows[0]) == std::vector<double>{1.0});
}

TEST_CASE("min-max maps the train range to [0,1]") {
    TransformSpec spec;
    spec.defaults.continuous = ContinuousScaling::MinMax;
    const auto ft = fit_transform_spec(spec, cont_batch("v", {0.0, 10.0}));
    CHECK(transform_row(ft, {Cell{5.0}}) == std::vector<double>{0.5});
}

TEST_CASE("identity spec keeps raw values") {
    TransformSpec spec;  // identity defaults
    const auto batch = cont_batch("v", {1.0, -3.5, 7.0});
    const auto ft = fit_transform_spec(spec, batch);
    const auto m = transform(ft, batch);
    CHECK(m.at(0, 0) == 1.0);
    CHECK(m.at(1, 0) == -3.5);
    CHECK(m.at(2, 0) == 7.0);
}

TEST_CASE("kbins(2) puts one interior edge at the median") {
    TransformSpec spec;
    spec.defaults.continuous = ContinuousScaling::KBins;
    spec.defaults.kbins_n_bins = 2;
    const auto ft = fit_transform_spec(spec, cont_batch("v", {1.0, 2.0, 3.0, 4.0}));
    REQUIRE(ft.columns[0].bin_edges.size() == 3);
    CHECK(ft.columns[0].bin_edges[1] == doctest::Approx(2.5));
}

TEST_CASE("kbins inverse reconstructs the bin center") {
    TransformSpec spec;
    spec.defaults.continuous = ContinuousScaling::KBins;
    spec.defaults.kbins_n_bins = 2;
    const auto ft = fit_transform_spec(spec, cont_batch("v", {1.0, 3.0}));
    // bin [1,2) has center 1.5 if edges are 1,2,3; check inverse lies inside its bin
    const auto row = inverse_transform_row(ft, std::vector<double>{0.0});
    const double v = std::get<double>(row[0]);
    CHECK(v >= ft.columns[0].bin_edges[0]);
    CHECK(v <= ft.columns[0].bin_edges[1]);
    CHECK(v == doctest::Approx((ft.columns[0].bin_edges[0] + ft.columns[0].bin_edges[1]) / 2));
}

TEST_CASE("transform/inverse round-trip without kbins") {
    TabularSchema schema;
    schema.columns.push_back({"v", ColumnKind::Continuous, {}});
    schema.columns.push_back({"c", ColumnKind::Categorical, {"a", "b", "c"}});
    TabularBatch b;
    b.schema = schema;
    b.rows = {{Cell{1.5}, Cell{std::string("b")}},
              {Cell{-2.0}, Cell{std::string("a")}},
              {Cell{4.0}, Cell{std::string("c")}}};
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    const auto back = inverse_transform(ft, transform(ft, b));
    for (std::size_t r = 0; r < b.n_rows(); ++r) {
        CHECK(std::fabs(std::get<double>(back.rows[r][0]) - std::get<double>(b.rows[r][0])) <
              1e-9);
        CHECK(std::get<std::string>(back.rows[r][1]) == std::get<std::string>(b.rows[r][1]));
    }
}

TEST_CASE("one-hot inverse picks the argmax slot") {
    TabularSchema schema;
    schema.columns.push_back({"c", ColumnKind::Categorical, {"a", "b", "c"}});
    TabularBatch b;
    b.schema = schema;
    b.rows.push_back({Cell{std::string("a")}});
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    const auto row = inverse_transform_row(ft, std::vector<double>{0.1, 0.7, 0.2});
    CHECK(std::get<std::string>(row[0]) == "b");
}

TEST_CASE("missing continuous cells are filled with the train mean") {
    TabularSchema schema;
    schema.columns.push_back({"v", ColumnKind::Continuous, {}});
    TabularBatch b;
    b.schema = schema;
    b.rows = {{Cell{0.0}}, {Cell{MissingCell{}}}, {Cell{4.0}}};
    TransformSpec spec;  // identity scaling, mean fill
    const auto ft = fit_transform_spec(spec, b);
    const auto m = transform(ft, b);
    CHECK(m.at(1, 0) == doctest::Approx(2.0));
}

TEST_CASE("target column is excluded from the feature layout") {
    TabularSchema schema;
    schema.columns.push_back({"x", ColumnKind::Continuous, {}});
    schema.columns.push_back({"y", ColumnKind::Categorical, {"0", "1"}});
    schema.target = "y";
    TabularBatch b;
    b.schema = schema;
    b.rows = {{Cell{1.0}, Cell{std::string("0")}}};
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    CHECK(ft.output_width() == 1);
    CHECK(target_vector(b) == std::vector<double>{0.0});
}

TEST_CASE("fitted transform JSON round-trip") {
    TabularSchema schema;
    schema.columns.push_back({"v", ColumnKind::Continuous, {}});
    schema.columns.push_back({"c", ColumnKind::Categorical, {"a", "b"}});
    TabularBatch b;
    b.schema = schema;
    b.rows = {{Cell{1.0}, Cell{std::string("a")}}, {Cell{3.0}, Cell{std::string("b")}}};
    const auto ft = fit_transform_spec(TransformSpec::standard(), b);
    const auto back = transform_from_json(transform_to_json(ft));
    CHECK(transform_row(back, b.rows[0]) == transform_row(ft, b.rows[0]));
    CHECK(transform_row(back, b.rows[1]) == transform_row(ft, b.rows[1]));
    CHECK(back.output_width() == ft.output_width());
}
