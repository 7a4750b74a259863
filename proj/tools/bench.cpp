// Compares the serial reference path against the OpenMP path on the two
// hottest kernels: exact kernel SHAP and PDP grid evaluation.
#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "xai/global_explainers.hpp"
#include "xai/local_attribution.hpp"
#include "xai/model.hpp"
#include "xai/parallel.hpp"
#include "xai/preprocess.hpp"
#include "xai/rng.hpp"

using namespace xai;

namespace {

TabularBatch synth_batch(std::size_t n_rows, std::size_t d, std::uint64_t seed) {
    TabularSchema schema;
    for (std::size_t j = 0; j < d; ++j)
        schema.columns.push_back({"f" + std::to_string(j), ColumnKind::Continuous, {}});
    TabularBatch batch;
    batch.schema = schema;
    Rng rng(seed);
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<Cell> row;
        for (std::size_t j = 0; j < d; ++j) row.emplace_back(rng.normal());
        batch.rows.push_back(std::move(row));
    }
    return batch;
}

ModelHandle synth_mlp(std::size_t d, std::uint64_t seed) {
    const auto batch = synth_batch(256, d, seed);
    TabularSchema schema = batch.schema;
    const auto ft = fit_transform_spec(TransformSpec::standard(), batch);
    Matrix x = transform(ft, batch);
    Rng rng(seed + 1);
    std::vector<double> y;
    for (std::size_t i = 0; i < x.rows; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < x.cols; ++j) s += x.at(i, j) * (j % 2 ? 1.0 : -0.5);
        y.push_back(s + 0.1 * rng.normal());
    }
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.task = Task::Regression;
    cfg.hidden_sizes = {32, 32};
    cfg.max_iters = 200;
    return train_builtin("mlp", x, y, cfg);
}

template <typename F>
double time_ms(F&& fn, int reps) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) fn();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

}  // namespace

int main() {
    const std::size_t d = 8;
    const auto train = synth_batch(200, d, 7);
    const auto ft = fit_transform_spec(TransformSpec::standard(), train);
    const auto model = synth_mlp(d, 7);
    const TabularPredictor predictor{&model, &ft};
    const auto instance = train.rows.front();

    auto shap_run = [&] {
        (void)kernel_shap(predictor, train, instance, 0, 1u << d, 11);
    };
    auto pdp_run = [&] {
        for (std::size_t j = 0; j < d; ++j)
            (void)pdp(predictor, train, "f" + std::to_string(j), 20);
    };

    std::printf("%-28s %12s %12s %8s\n", "kernel", "serial ms", "parallel ms", "speedup");
    struct Case {
        const char* name;
        std::function<void()> run;
        int reps;
    };
    const std::vector<Case> cases = {{"kernel_shap exact d=8", shap_run, 5},
                                     {"pdp 8 features grid=20", pdp_run, 5}};
    for (const auto& c : cases) {
        set_parallel(false);
        c.run();  // warm-up
        const double serial = time_ms(c.run, c.reps);
        set_parallel(true);
        c.run();
        const double parallel = time_ms(c.run, c.reps);
        std::printf("%-28s %12.2f %12.2f %7.2fx\n", c.name, serial, parallel,
                    serial / std::max(parallel, 1e-9));
    }
    set_parallel(true);
    return 0;
}
