#include <doctest.h>

#include <cmath>

#include "xai/counterfactual.hpp"
#include "xai/model.hpp"
#include "xai/preprocess.hpp"
#include "xai/rng.hpp"

using namespace xai;

namespace {

// 1-D logistic p(y=1) = sigma(w (x - c))
ModelHandle logistic_1d(double w, double c) {
    ModelHandle h;
    h.task = Task::Classification;
    h.n_outputs = 2;
    h.input_dim = 1;
    h.kind = "test-logistic";
    h.predict_fn = [w, c](const Matrix& x) {
        Matrix out(x.rows, 2);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double p = 1.0 / (1.0 + std::exp(-w * (x.at(r, 0) - c)));
            out.at(r, 0) = 1.0 - p;
            out.at(r, 1) = p;
        }
        return out;
    };
    return h;
}

TabularBatch one_cont(const std::vector<double>& values) {
    TabularSchema schema;
    schema.columns.push_back({"x", ColumnKind::Continuous, {}});
    TabularBatch b;
    b.schema = schema;
    for (double v : values) b.rows.push_back({Cell{v}});
    return b;
}

ModelHandle majority_vote() {
    ModelHandle h;
    h.task = Task::Classification;
    h.n_outputs = 2;
    h.input_dim = 3;
    h.kind = "test-majority";
    h.predict_fn = [](const Matrix& x) {
        Matrix out(x.rows, 2);
        for (std::size_t r = 0; r < x.rows; ++r) {
            int ones = 0;
            for (std::size_t j = 0; j < 3; ++j) ones += x.at(r, j) >= 0.5;
            out.at(r, 1) = ones >= 2 ? 1.0 : 0.0;
            out.at(r, 0) = 1.0 - out.at(r, 1);
        }
        return out;
    };
    return h;
}

}  // namespace

TEST_CASE("wachter: already in the target class is a zero-distance solution") {
    const auto model = logistic_1d(4.0, 0.0);
    const auto train = one_cont({-2, -1, 0, 1, 2});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{1.5}};
    p.target_class = 1;
    const auto r = wachter_ce(predictor, p, WachterConfig{});
    REQUIRE(r.found);
    CHECK(r.examples[0].l1_distance == doctest::Approx(0.0));
    CHECK(r.examples[0].changed.empty());
    CHECK(r.examples[0].valid);
}

TEST_CASE("wachter approaches the 1-D grid-search oracle") {
    const double w = 3.0, c = 1.0;
    const auto model = logistic_1d(w, c);
    std::vector<double> train_vals;
    Rng rng(1);
    for (int i = 0; i < 200; ++i) train_vals.push_back(rng.uniform(-4.0, 6.0));
    const auto train = one_cont(train_vals);
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};

    CFProblem p;
    p.instance = {Cell{-2.0}};
    p.target_class = 1;
    const auto r = wachter_ce(predictor, p, WachterConfig{});
    REQUIRE(r.found);
    REQUIRE(r.examples[0].valid);
    const double got = std::get<double>(r.examples[0].values[0]);

    // dense grid-search oracle: minimal |x' - x| with p(1) > 0.5
    double oracle = 1e18;
    for (double x = -2.0; x <= 6.0; x += 1e-4) {
        const double prob = 1.0 / (1.0 + std::exp(-w * (x - c)));
        if (prob > 0.5) {
            oracle = std::fabs(x - (-2.0));
            break;
        }
    }
    const double dist = std::fabs(got - (-2.0));
    CHECK(dist <= oracle * 1.05);
    CHECK(dist >= oracle * 0.95);
    // the valid flag re-verifies under predict
    Matrix probe = Matrix::from_row({got});
    CHECK(model.predict(probe).at(0, 1) > 0.5);
}

TEST_CASE("wachter keeps immutable coordinates bit-identical") {
    TabularSchema schema;
    schema.columns.push_back({"a", ColumnKind::Continuous, {}});
    schema.columns.push_back({"b", ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    Rng rng(2);
    for (int i = 0; i < 50; ++i) train.rows.push_back({Cell{rng.normal()}, Cell{rng.normal()}});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    ModelHandle model;
    model.task = Task::Classification;
    model.n_outputs = 2;
    model.input_dim = 2;
    model.predict_fn = [](const Matrix& x) {
        Matrix out(x.rows, 2);
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double p = 1.0 / (1.0 + std::exp(-(x.at(r, 0) + x.at(r, 1))));
            out.at(r, 0) = 1 - p;
            out.at(r, 1) = p;
        }
        return out;
    };
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{-1.0}, Cell{-1.0}};
    p.target_class = 1;
    p.immutable = {"b"};
    const auto r = wachter_ce(predictor, p, WachterConfig{});
    REQUIRE(r.found);
    CHECK(std::get<double>(r.examples[0].values[1]) == -1.0);
}

TEST_CASE("mace finds the minimal pair flip for the majority vote") {
    TabularSchema schema;
    for (const char* n : {"a", "b", "c"})
        schema.columns.push_back({n, ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    for (int mask = 0; mask < 8; ++mask)
        train.rows.push_back({Cell{double(mask & 1)}, Cell{double((mask >> 1) & 1)},
                              Cell{double((mask >> 2) & 1)}});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const auto model = majority_vote();
    const TabularPredictor predictor{&model, &ft};

    CFProblem p;
    p.instance = {Cell{0.0}, Cell{0.0}, Cell{0.0}};
    p.target_class = 1;
    const auto r = mace_cf(predictor, train, p, MaceConfig{});
    REQUIRE(r.found);
    REQUIRE_FALSE(r.examples.empty());
    CHECK(r.examples[0].changed.size() == 2);  // L0 minimum found by exhaustive search
    CHECK(r.examples[0].valid);
}

TEST_CASE("mace with an instance already in the target class changes nothing") {
    const auto model = logistic_1d(4.0, 0.0);
    const auto train = one_cont({-2, -1, 0, 1, 2});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{1.0}};
    p.target_class = 1;
    const auto r = mace_cf(predictor, train, p, MaceConfig{});
    REQUIRE(r.found);
    CHECK(r.examples[0].changed.empty());
    CHECK(r.examples[0].valid);
}

TEST_CASE("mace changes only capital_gain on a threshold model") {
    TabularSchema schema;
    schema.columns.push_back({"age", ColumnKind::Continuous, {}});
    schema.columns.push_back({"capital_gain", ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
        const double age = 20 + 40 * rng.uniform();
        const double gain = rng.uniform() < 0.5 ? 0.0 : 12000 * rng.uniform();
        train.rows.push_back({Cell{age}, Cell{gain}});
    }
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    ModelHandle model;
    model.task = Task::Classification;
    model.n_outputs = 2;
    model.input_dim = 2;
    model.predict_fn = [](const Matrix& x) {
        Matrix out(x.rows, 2);
        for (std::size_t r = 0; r < x.rows; ++r) {
            out.at(r, 1) = x.at(r, 1) > 5000 ? 1.0 : 0.0;
            out.at(r, 0) = 1 - out.at(r, 1);
        }
        return out;
    };
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{40.0}, Cell{0.0}};
    p.target_class = 1;
    const auto r = mace_cf(predictor, train, p, MaceConfig{});
    REQUIRE(r.found);
    REQUIRE(r.examples[0].changed.size() == 1);
    CHECK(r.examples[0].changed[0].feature == "capital_gain");
    CHECK(std::get<double>(r.examples[0].changed[0].new_value) > 5000);
}

TEST_CASE("mace respects immutable features") {
    const auto model = majority_vote();
    TabularSchema schema;
    for (const char* n : {"a", "b", "c"})
        schema.columns.push_back({n, ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    for (int mask = 0; mask < 8; ++mask)
        train.rows.push_back({Cell{double(mask & 1)}, Cell{double((mask >> 1) & 1)},
                              Cell{double((mask >> 2) & 1)}});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{0.0}, Cell{0.0}, Cell{0.0}};
    p.target_class = 1;
    p.immutable = {"a"};
    const auto r = mace_cf(predictor, train, p, MaceConfig{});
    REQUIRE(r.found);
    for (const auto& ch : r.examples[0].changed) CHECK(ch.feature != "a");
    CHECK(std::get<double>(r.examples[0].values[0]) == 0.0);
}

TEST_CASE("mace diversity returns distinct change sets") {
    const auto model = majority_vote();
    TabularSchema schema;
    for (const char* n : {"a", "b", "c"})
        schema.columns.push_back({n, ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    for (int mask = 0; mask < 8; ++mask)
        train.rows.push_back({Cell{double(mask & 1)}, Cell{double((mask >> 1) & 1)},
                              Cell{double((mask >> 2) & 1)}});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{0.0}, Cell{0.0}, Cell{0.0}};
    p.target_class = 1;
    MaceConfig cfg;
    cfg.n_examples = 2;
    const auto r = mace_cf(predictor, train, p, cfg);
    REQUIRE(r.found);
    REQUIRE(r.examples.size() >= 2);
    CHECK(r.examples[0].changed[0].feature != r.examples[1].changed[0].feature);
    for (const auto& ex : r.examples) CHECK(ex.valid);
}

TEST_CASE("mace respects the evaluation budget") {
    const auto model = majority_vote();
    TabularSchema schema;
    for (const char* n : {"a", "b", "c"})
        schema.columns.push_back({n, ColumnKind::Continuous, {}});
    TabularBatch train;
    train.schema = schema;
    for (int mask = 0; mask < 8; ++mask)
        train.rows.push_back({Cell{double(mask & 1)}, Cell{double((mask >> 1) & 1)},
                              Cell{double((mask >> 2) & 1)}});
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    // tiny budget: the search must stop gracefully
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{0.0}, Cell{0.0}, Cell{0.0}};
    p.target_class = 1;
    MaceConfig cfg;
    cfg.eval_budget = 3;
    const auto r = mace_cf(predictor, train, p, cfg);
    CHECK_FALSE(r.found);  // not enough evaluations to reach a flip
}

TEST_CASE("valid examples re-verify under predict") {
    const auto model = logistic_1d(2.0, 0.5);
    std::vector<double> vals;
    Rng rng(4);
    for (int i = 0; i < 100; ++i) vals.push_back(rng.uniform(-3.0, 3.0));
    const auto train = one_cont(vals);
    const auto ft = fit_transform_spec(TransformSpec{}, train);
    const TabularPredictor predictor{&model, &ft};
    CFProblem p;
    p.instance = {Cell{-1.0}};
    p.target_class = 1;
    for (int variant = 0; variant < 2; ++variant) {
        const auto r = variant == 0 ? wachter_ce(predictor, p, WachterConfig{})
                                    : mace_cf(predictor, train, p, MaceConfig{});
        for (const auto& ex : r.examples) {
            if (!ex.valid) continue;
            Matrix probe = Matrix::from_row({std::get<double>(ex.values[0])});
            const auto out = model.predict(probe);
            CHECK(out.at(0, 1) > out.at(0, 0));
        }
    }
}
