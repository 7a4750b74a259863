#include <doctest.h>

#include <cmath>

#include "xai/model.hpp"
#include "xai/rng.hpp"
#include "xai/subprocess_model.hpp"

using namespace xai;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
    Matrix m(n, d);
    Rng rng(seed);
    for (double& v : m.data) v = rng.normal();
    return m;
}

}  // namespace

TEST_CASE("linear training recovers exact coefficients") {
    Matrix x(0, 2);
    std::vector<double> y;
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        const double a = rng.normal(), b = rng.normal();
        x.push_row({a, b});
        y.push_back(2 * a + 3 * b + 1);
    }
    TrainConfig cfg;
    cfg.task = Task::Regression;
    const auto h = train_builtin("linear", x, y, cfg);
    REQUIRE(h.linear);
    CHECK(h.linear->weights.at(0, 0) == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(h.linear->weights.at(0, 1) == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(h.linear->bias[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("linear handle evaluates the dot product") {
    LinearModel m;
    m.weights = Matrix::from_row({2.0, 3.0});
    m.bias = {1.0};
    const auto h = make_linear_handle(m, Task::Regression, false);
    const auto out = h.predict(Matrix::from_row({1.0, 1.0}));
    CHECK(out.at(0, 0) == doctest::Approx(6.0));
}

TEST_CASE("empty batch predicts an empty output") {
    LinearModel m;
    m.weights = Matrix::from_row({2.0, 3.0});
    m.bias = {1.0};
    const auto h = make_linear_handle(m, Task::Regression, false);
    const auto out = h.predict(Matrix(0, 2));
    CHECK(out.rows == 0);
}

TEST_CASE("logistic probabilities are normalized") {
    Matrix x(0, 2);
    std::vector<double> y;
    Rng rng(2);
    for (int i = 0; i < 60; ++i) {
        const double a = rng.normal(), b = rng.normal();
        x.push_row({a, b});
        y.push_back(a + b > 0 ? 1.0 : 0.0);
    }
    const auto h = train_builtin("logistic", x, y, TrainConfig{});
    const auto p = h.predict(x);
    for (std::size_t r = 0; r < p.rows; ++r) {
        double s = 0;
        for (std::size_t c = 0; c < p.cols; ++c) {
            CHECK(p.at(r, c) >= 0.0);
            CHECK(p.at(r, c) <= 1.0);
            s += p.at(r, c);
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
    // separable data: high training accuracy
    std::size_t correct = 0;
    for (std::size_t r = 0; r < p.rows; ++r)
        correct += (p.at(r, 1) > 0.5) == (y[r] == 1.0);
    CHECK(correct >= 55);
}

TEST_CASE("tree learns XOR exactly") {
    Matrix x(0, 2);
    std::vector<double> y;
    for (int a = 0; a <= 1; ++a)
        for (int b = 0; b <= 1; ++b)
            for (int rep = 0; rep < 4; ++rep) {
                x.push_row({double(a), double(b)});
                y.push_back(double(a ^ b));
            }
    TrainConfig cfg;
    cfg.max_depth = 3;
    const auto h = train_builtin("tree", x, y, cfg);
    REQUIRE(h.tree);
    CHECK(h.tree->max_depth >= 2);
    const auto p = h.predict(x);
    for (std::size_t r = 0; r < x.rows; ++r)
        CHECK((p.at(r, 1) > 0.5) == (y[r] == 1.0));
}

TEST_CASE("tree routing sends the threshold value right") {
    TreeModel t;
    t.n_features = 1;
    t.nodes.resize(3);
    t.nodes[0] = {0, 1.0, 1, 2, 1.0, {}};
    t.nodes[1] = {-1, 0, -1, -1, 0.5, {0.0}};
    t.nodes[2] = {-1, 0, -1, -1, 0.5, {1.0}};
    const std::vector<double> at_threshold = {1.0};
    CHECK(t.route(at_threshold) == 2);
    const std::vector<double> below = {0.999};
    CHECK(t.route(below) == 1);
}

TEST_CASE("single-class target yields a constant warner") {
    Matrix x = random_matrix(10, 2, 3);
    std::vector<double> y(10, 1.0);
    const auto h = train_builtin("logistic", x, y, TrainConfig{});
    CHECK(h.constant_warning);
    const auto p = h.predict(x);
    for (std::size_t r = 0; r < p.rows; ++r)
        CHECK(p.at(r, p.cols - 1) == doctest::Approx(1.0));
}

TEST_CASE("linear gradient is the weight vector everywhere") {
    LinearModel m;
    m.weights = Matrix::from_row({2.0, 3.0});
    m.bias = {0.0};
    const auto h = make_linear_handle(m, Task::Regression, false);
    const std::vector<double> x = {5.0, -1.0};
    const auto g = h.gradient(x, 0);
    CHECK(g[0] == doctest::Approx(2.0));
    CHECK(g[1] == doctest::Approx(3.0));
}

TEST_CASE("analytic gradients match finite differences") {
    Matrix xt = random_matrix(80, 3, 4);
    std::vector<double> y;
    for (std::size_t r = 0; r < xt.rows; ++r)
        y.push_back(xt.at(r, 0) * xt.at(r, 1) > xt.at(r, 2) ? 1.0 : 0.0);
    TrainConfig cfg;
    cfg.seed = 5;
    cfg.max_iters = 300;
    for (const char* kind : {"logistic", "mlp"}) {
        const auto h = train_builtin(kind, xt, y, cfg);
        REQUIRE(h.differentiable);
        Rng rng(6);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> pt = {rng.normal(), rng.normal(), rng.normal()};
            const std::size_t k = trial % h.n_outputs;
            const auto g = h.gradient(pt, k);
            const double eps = 1e-5;
            for (std::size_t j = 0; j < pt.size(); ++j) {
                auto lo = pt, hi = pt;
                lo[j] -= eps;
                hi[j] += eps;
                Matrix probe(0, pt.size());
                probe.push_row(hi);
                probe.push_row(lo);
                const auto out = h.predict(probe);
                const double fd = (out.at(0, k) - out.at(1, k)) / (2 * eps);
                CHECK(std::fabs(g[j] - fd) <= 1e-4);
            }
        }
    }
}

TEST_CASE("softmax two-class gradients are opposite at any point") {
    LinearModel m;
    m.weights = Matrix(2, 2);
    m.weights.at(0, 0) = 1.0;
    m.weights.at(1, 1) = 1.0;
    m.bias = {0.0, 0.0};
    const auto h = make_linear_handle(m, Task::Classification, true);
    const std::vector<double> x = {0.3, 0.3};  // decision boundary
    const auto g0 = h.gradient(x, 0);
    const auto g1 = h.gradient(x, 1);
    for (std::size_t j = 0; j < 2; ++j) CHECK(g0[j] == doctest::Approx(-g1[j]));
}

TEST_CASE("batch consistency: concatenated = concatenation of parts") {
    Matrix xt = random_matrix(30, 3, 7);
    std::vector<double> y;
    for (std::size_t r = 0; r < xt.rows; ++r) y.push_back(xt.at(r, 0) > 0 ? 1.0 : 0.0);
    TrainConfig cfg;
    cfg.seed = 8;
    for (const char* kind : {"linear", "logistic", "tree", "mlp"}) {
        TrainConfig c = cfg;
        c.task = std::string(kind) == "linear" ? Task::Regression : Task::Classification;
        const auto h = train_builtin(kind, xt, y, c);
        const auto whole = h.predict(xt);
        Matrix top(0, 3), bottom(0, 3);
        for (std::size_t r = 0; r < 10; ++r) top.push_row(xt.row_vec(r));
        for (std::size_t r = 10; r < 30; ++r) bottom.push_row(xt.row_vec(r));
        const auto p1 = h.predict(top);
        const auto p2 = h.predict(bottom);
        for (std::size_t r = 0; r < whole.rows; ++r)
            for (std::size_t c2 = 0; c2 < whole.cols; ++c2) {
                const double part = r < 10 ? p1.at(r, c2) : p2.at(r - 10, c2);
                CHECK(whole.at(r, c2) == part);  // bitwise for built-ins
            }
    }
}

TEST_CASE("model persistence reproduces predictions bit-exactly") {
    Matrix xt = random_matrix(40, 3, 9);
    std::vector<double> y;
    for (std::size_t r = 0; r < xt.rows; ++r)
        y.push_back(std::sin(xt.at(r, 0)) + xt.at(r, 1));
    TrainConfig cfg;
    cfg.seed = 10;
    cfg.task = Task::Regression;
    for (const char* kind : {"linear", "tree", "mlp"}) {
        const auto h = train_builtin(kind, xt, y, cfg);
        const auto h2 = model_from_json(model_to_json(h));
        const auto a = h.predict(xt);
        const auto b = h2.predict(xt);
        for (std::size_t i = 0; i < a.data.size(); ++i) CHECK(a.data[i] == b.data[i]);
    }
}

TEST_CASE("training is deterministic under a fixed seed") {
    Matrix xt = random_matrix(40, 3, 11);
    std::vector<double> y;
    for (std::size_t r = 0; r < xt.rows; ++r) y.push_back(xt.at(r, 2) > 0 ? 1.0 : 0.0);
    TrainConfig cfg;
    cfg.seed = 12;
    const auto a = train_builtin("mlp", xt, y, cfg);
    const auto b = train_builtin("mlp", xt, y, cfg);
    CHECK(model_to_json(a).dump() == model_to_json(b).dump());
}

TEST_CASE("threshold detector") {
    SUBCASE("constant training series gives zero score") {
        const auto train = make_timeseries({0, 1, 2}, {2.0, 2.0, 2.0});
        const auto d = fit_detector(train, 3.0);
        const auto r = detect(d, make_timeseries({5, 6}, {2.0, 2.0}));
        CHECK(r.score == doctest::Approx(0.0));
        CHECK_FALSE(r.is_anomaly);
    }
    SUBCASE("unit-variance training flags a 5-sigma point") {
        const auto train = make_timeseries({0, 1, 2, 3}, {1.0, -1.0, 1.0, -1.0});
        const auto d = fit_detector(train, 3.0);
        CHECK(d.train_mean == doctest::Approx(0.0));
        CHECK(d.train_std == doctest::Approx(1.0));
        const auto r = detect(d, make_timeseries({5, 6}, {0.0, 5.0}));
        CHECK(r.score == doctest::Approx(5.0));
        CHECK(r.is_anomaly);
    }
    SUBCASE("the comparison is strictly greater-than") {
        const auto train = make_timeseries({0, 1, 2, 3}, {1.0, -1.0, 1.0, -1.0});
        const auto d = fit_detector(train, 3.0);
        const auto r = detect(d, make_timeseries({5}, {3.0}));
        CHECK(r.score == doctest::Approx(3.0));
        CHECK_FALSE(r.is_anomaly);
    }
}

TEST_CASE("subprocess model protocol") {
    SUBCASE("echo child round-trips a 3x2 batch") {
        // outputs = first input column, via an inline shell child
        const std::string cmd =
            "python3 -c \"\n"
            "import sys, json\n"
            "for line in sys.stdin:\n"
            "    m = json.loads(line)\n"
            "    if m['type'] == 'spec':\n"
            "        print(json.dumps({'type':'spec','task':'regression','n_outputs':1}), flush=True)\n"
            "    elif m['type'] == 'predict':\n"
            "        outs = [[row[0]] for row in m['inputs']]\n"
            "        print(json.dumps({'type':'predict','id':m['id'],'outputs':outs}), flush=True)\n"
            "    else:\n"
            "        break\n"
            "\"";
        const auto h = spawn_external(cmd);
        Matrix x(0, 2);
        x.push_row({1.0, 9.0});
        x.push_row({2.0, 8.0});
        x.push_row({3.0, 7.0});
        const auto out = h.predict(x);
        REQUIRE(out.rows == 3);
        CHECK(out.at(0, 0) == 1.0);
        CHECK(out.at(1, 0) == 2.0);
        CHECK(out.at(2, 0) == 3.0);
    }
    SUBCASE("invalid JSON reply names the offending request id") {
        const std::string cmd =
            "python3 -c \"\n"
            "import sys, json\n"
            "for line in sys.stdin:\n"
            "    m = json.loads(line)\n"
            "    if m['type'] == 'spec':\n"
            "        print(json.dumps({'type':'spec','task':'regression','n_outputs':1}), flush=True)\n"
            "    elif m['type'] == 'predict':\n"
            "        print('this is not json', flush=True)\n"
            "    else:\n"
            "        break\n"
            "\"";
        const auto h = spawn_external(cmd);
        Matrix x = Matrix::from_row({1.0});
        try {
            (void)h.predict(x);
            FAIL("expected a protocol error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Model);
            CHECK(std::string(e.what()).find("id 1") != std::string::npos);
        }
    }
    SUBCASE("one request line per batch") {
        // The child reports how many predict requests it has seen as the output.
        const std::string cmd =
            "python3 -c \"\n"
            "import sys, json\n"
            "seen = 0\n"
            "for line in sys.stdin:\n"
            "    m = json.loads(line)\n"
            "    if m['type'] == 'spec':\n"
            "        print(json.dumps({'type':'spec','task':'regression','n_outputs':1}), flush=True)\n"
            "    elif m['type'] == 'predict':\n"
            "        seen += 1\n"
            "        outs = [[seen] for _ in m['inputs']]\n"
            "        print(json.dumps({'type':'predict','id':m['id'],'outputs':outs}), flush=True)\n"
            "    else:\n"
            "        break\n"
            "\"";
        const auto h = spawn_external(cmd);
        Matrix x(0, 4);
        for (int r = 0; r < 5; ++r) x.push_row({1.0, 2.0, 3.0, 4.0});
        const auto out = h.predict(x);
        for (std::size_t r = 0; r < out.rows; ++r) CHECK(out.at(r, 0) == 1.0);
        const auto out2 = h.predict(x);
        for (std::size_t r = 0; r < out2.rows; ++r) CHECK(out2.at(r, 0) == 2.0);
    }
}
