#include "xai/counterfactual.hpp"

#include <algorithm>
#include <cmath>

namespace xai {

namespace {

std::size_t argmax_row(std::span<const double> row) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < row.size(); ++i)
        if (row[i] > row[best]) best = i;
    return best;
}

// Target-class score: probability of the target class, or of the best
// non-original class when no target is set.
double target_score(std::span<const double> probs, std::size_t original,
                    const std::optional<std::size_t>& target) {
    if (target) return probs[*target];
    double best = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i)
        if (i != original) best = std::max(best, probs[i]);
    return best;
}

bool is_valid(std::span<const double> probs, std::size_t original,
              const std::optional<std::size_t>& target) {
    const std::size_t pred = argmax_row(probs);
    return target ? pred == *target : pred != original;
}

// Standardized L1: continuous deltas divided by train std, categorical
// changes count 1 each.
double standardized_l1(const FittedTransform& ft, const std::vector<Cell>& a,
                       const std::vector<Cell>& b) {
    double dist = 0.0;
    for (std::size_t j = 0; j < ft.columns.size(); ++j) {
        const auto& fc = ft.columns[j];
        if (fc.kind == ColumnKind::Continuous) {
            const double va = cell_is_missing(a[j]) ? fc.fill_value : std::get<double>(a[j]);
            const double vb = cell_is_missing(b[j]) ? fc.fill_value : std::get<double>(b[j]);
            dist += std::fabs(va - vb) / std::max(fc.stdev, 1e-12);
        } else if (!(a[j] == b[j])) {
            dist += 1.0;
        }
    }
    return dist;
}

CFExample make_example(const FittedTransform& ft, const std::vector<Cell>& original,
                       const std::vector<Cell>& values, std::span<const double> probs,
                       std::size_t original_class, const std::optional<std::size_t>& target) {
    CFExample ex;
    ex.values = values;
    for (std::size_t j = 0; j < ft.columns.size(); ++j)
        if (!(values[j] == original[j]))
            ex.changed.push_back({ft.columns[j].name, original[j], values[j]});
    ex.predicted_class = argmax_row(probs);
    ex.probability = probs[ex.predicted_class];
    ex.l1_distance = standardized_l1(ft, original, values);
    ex.valid = is_valid(probs, original_class, target);
    return ex;
}

}  // namespace

CounterfactualResult wachter_ce(const TabularPredictor& predictor, const CFProblem& problem,
                                const WachterConfig& config) {
    const FittedTransform& ft = *predictor.transform;
    const std::size_t d = ft.columns.size();
    if (ft.output_width() != d)
        throw data_error("wachter_ce: one-hot encodings are unsupported; use mace-greedy");

    std::vector<bool> mutable_flag(d, true);
    for (std::size_t j = 0; j < d; ++j) {
        mutable_flag[j] = !problem.immutable.contains(ft.columns[j].name);
        if (mutable_flag[j] && ft.columns[j].kind != ColumnKind::Continuous)
            throw data_error("wachter_ce: mutable feature '" + ft.columns[j].name +
                             "' is categorical; use mace-greedy");
    }

    const auto x0 = transform_row(ft, problem.instance);
    const auto p0 = predictor.model->predict(Matrix::from_row(x0)).row_vec(0);
    const std::size_t y = argmax_row(p0);

    CounterfactualResult res;
    res.explainer = "ce";
    res.original_class = y;
    res.best_probability = target_score(p0, y, problem.target_class);

    if (is_valid(p0, y, problem.target_class)) {
        res.found = true;
        res.examples.push_back(
            make_example(ft, problem.instance, problem.instance, p0, y, problem.target_class));
        return res;
    }

    // bounds in transformed space from the fitted train min/max
    std::vector<std::pair<double, double>> bounds(d);
    for (std::size_t j = 0; j < d; ++j) {
        const double lo = ft.columns[j].min, hi = ft.columns[j].max;
        // scale through the same per-column map as transform_row
        std::vector<Cell> probe = problem.instance;
        probe[j] = Cell{lo};
        const double tlo = transform_row(ft, probe)[j];
        probe[j] = Cell{hi};
        const double thi = transform_row(ft, probe)[j];
        bounds[j] = {std::min(tlo, thi), std::max(tlo, thi)};
    }

    // hinge margin: f_y - f_target (or best other class)
    auto hinge_input = [&](std::span<const double> probs) {
        double other;
        if (problem.target_class) {
            other = probs[*problem.target_class];
        } else {
            other = 0.0;
            for (std::size_t i = 0; i < probs.size(); ++i)
                if (i != y) other = std::max(other, probs[i]);
        }
        return probs[y] - other;
    };

    const bool analytic = predictor.model->differentiable;
    auto hinge_gradient = [&](const std::vector<double>& x) {
        std::vector<double> g(d, 0.0);
        if (analytic) {
            const auto probs = predictor.model->predict(Matrix::from_row(x)).row_vec(0);
            std::size_t other = problem.target_class ? *problem.target_class : y;
            if (!problem.target_class) {
                double best = -1.0;
                for (std::size_t i = 0; i < probs.size(); ++i)
                    if (i != y && probs[i] > best) { best = probs[i]; other = i; }
            }
            const auto gy = predictor.model->gradient(x, y);
            const auto go = predictor.model->gradient(x, other);
            for (std::size_t j = 0; j < d; ++j) g[j] = gy[j] - go[j];
        } else {
            Matrix points(2 * d, d);
            for (std::size_t j = 0; j < d; ++j) {
                for (std::size_t c = 0; c < d; ++c) {
                    points.at(2 * j, c) = x[c];
                    points.at(2 * j + 1, c) = x[c];
                }
                points.at(2 * j, j) += config.fd_step;
                points.at(2 * j + 1, j) -= config.fd_step;
            }
            const Matrix out = predictor.model->predict(points);
            for (std::size_t j = 0; j < d; ++j) {
                const double hi = hinge_input(out.row(2 * j));
                const double lo = hinge_input(out.row(2 * j + 1));
                g[j] = (hi - lo) / (2.0 * config.fd_step);
            }
        }
        return g;
    };

    std::vector<double> best_x;
    double best_dist = 0.0;
    std::vector<double> x = x0;
    const double lr = config.learning_rate;

    for (double lambda = problem.lambda0; lambda <= problem.lambda_cap; lambda *= 2.0) {
        for (int step = 0; step < config.steps; ++step) {
            const auto probs = predictor.model->predict(Matrix::from_row(x)).row_vec(0);
            const double margin = hinge_input(probs) + problem.hinge_margin;
            if (margin > 0.0) {
                const auto g = hinge_gradient(x);
                for (std::size_t j = 0; j < d; ++j)
                    if (mutable_flag[j]) x[j] -= lr * lambda * g[j];
            }
            // proximal soft-threshold toward x0 for the L1 term
            for (std::size_t j = 0; j < d; ++j) {
                if (!mutable_flag[j]) { x[j] = x0[j]; continue; }
                const double delta = x[j] - x0[j];
                if (delta > lr) x[j] = x0[j] + delta - lr;
                else if (delta < -lr) x[j] = x0[j] + delta + lr;
                else x[j] = x0[j];
                x[j] = std::clamp(x[j], bounds[j].first, bounds[j].second);
            }
            const auto p = predictor.model->predict(Matrix::from_row(x)).row_vec(0);
            res.best_probability = std::max(res.best_probability,
                                            target_score(p, y, problem.target_class));
            if (is_valid(p, y, problem.target_class)) {
                double dist = 0.0;
                for (std::size_t j = 0; j < d; ++j) dist += std::fabs(x[j] - x0[j]);
                if (best_x.empty() || dist < best_dist) { best_x = x; best_dist = dist; }
            }
        }
        if (!best_x.empty()) break;
    }

    if (best_x.empty()) {
        res.found = false;
        return res;
    }
    res.found = true;
    auto cells = inverse_transform_row(ft, best_x);
    // immutable coordinates stay bit-identical to the instance
    for (std::size_t j = 0; j < d; ++j)
        if (!mutable_flag[j]) cells[j] = problem.instance[j];
    const auto probs = predictor.predict_row(cells);
    res.examples.push_back(make_example(ft, problem.instance, cells, probs, y,
                                        problem.target_class));
    return res;
}

// ---------------------------------------------------------------------------
// MACE-style greedy search

namespace {

struct EvalCounter {
    const TabularPredictor* predictor;
    std::size_t budget;
    std::size_t used = 0;

    Matrix predict(const std::vector<std::vector<Cell>>& rows) {
        used += rows.size();
        return predictor->predict_rows(rows);
    }
    bool exhausted() const { return used >= budget; }
};

std::vector<double> decile_values(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    for (int i = 1; i <= 9; ++i) {
        const double pos = static_cast<double>(i) / 10.0 * static_cast<double>(values.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const double frac = pos - static_cast<double>(lo);
        const double v = values[lo] * (1.0 - frac) +
                         values[std::min(lo + 1, values.size() - 1)] * frac;
        if (out.empty() || v > out.back()) out.push_back(v);
    }
    return out;
}

struct GreedyOutcome {
    std::vector<Cell> values;
    std::vector<double> probs;
    std::set<std::size_t> changed;
    bool flipped = false;
    std::size_t first_changed = 0;
};

}  // namespace

CounterfactualResult mace_cf(const TabularPredictor& predictor, const TabularBatch& train,
                             const CFProblem& problem, const MaceConfig& config) {
    const FittedTransform& ft = *predictor.transform;
    const std::size_t d = ft.columns.size();

    EvalCounter evals{&predictor, config.eval_budget};

    const auto p0 = evals.predict({problem.instance}).row_vec(0);
    const std::size_t y = argmax_row(p0);

    CounterfactualResult res;
    res.explainer = "mace-greedy";
    res.original_class = y;
    res.best_probability = target_score(p0, y, problem.target_class);

    if (is_valid(p0, y, problem.target_class)) {
        res.found = true;
        res.examples.push_back(
            make_example(ft, problem.instance, problem.instance, p0, y, problem.target_class));
        return res;
    }

    // candidate pool per mutable feature
    const auto train_rows = feature_rows(ft, train);
    const Matrix train_out = evals.predict(train_rows);
    std::vector<std::vector<Cell>> candidates(d);
    for (std::size_t j = 0; j < d; ++j) {
        const auto& fc = ft.columns[j];
        if (problem.immutable.contains(fc.name)) continue;
        if (fc.kind == ColumnKind::Categorical) {
            for (const auto& cat : fc.categories)
                if (!(Cell{cat} == problem.instance[j])) candidates[j].emplace_back(cat);
        } else {
            // deciles of the column restricted to target-class rows, falling
            // back to the full column
            std::vector<double> target_vals, all_vals;
            for (std::size_t r = 0; r < train_rows.size(); ++r) {
                const Cell& c = train_rows[r][j];
                if (cell_is_missing(c)) continue;
                const double v = std::get<double>(c);
                all_vals.push_back(v);
                if (is_valid(train_out.row(r), y, problem.target_class)) target_vals.push_back(v);
            }
            const auto& pool = target_vals.empty() ? all_vals : target_vals;
            if (pool.empty()) continue;
            for (double v : decile_values(pool))
                if (!(Cell{v} == problem.instance[j])) candidates[j].emplace_back(v);
        }
    }

    auto run_greedy = [&](std::optional<std::size_t> excluded_feature) -> GreedyOutcome {
        GreedyOutcome out;
        out.values = problem.instance;
        out.probs = std::vector<double>(p0.begin(), p0.end());
        double current = target_score(out.probs, y, problem.target_class);
        std::size_t total_candidates = 0;
        for (const auto& c : candidates) total_candidates += c.size();
        const std::size_t max_iters =
            std::max(config.max_changed_features * 4 + 8, total_candidates + 4);
        std::set<std::pair<std::size_t, std::size_t>> tried;
        for (std::size_t iter = 0; iter < max_iters; ++iter) {
            if (out.flipped || evals.exhausted()) break;
            // batched evaluation of every applicable substitution
            std::vector<std::pair<std::size_t, std::size_t>> slots;  // (feature, candidate)
            std::vector<std::vector<Cell>> rows;
            for (std::size_t j = 0; j < d; ++j) {
                if (excluded_feature && *excluded_feature == j) continue;
                const bool is_new = !out.changed.contains(j);
                if (is_new && out.changed.size() >= config.max_changed_features) continue;
                for (std::size_t c = 0; c < candidates[j].size(); ++c) {
                    if (candidates[j][c] == out.values[j]) continue;
                    auto row = out.values;
                    row[j] = candidates[j][c];
                    slots.emplace_back(j, c);
                    rows.push_back(std::move(row));
                }
            }
            if (rows.empty()) break;
            const Matrix scores = evals.predict(rows);
            // best substitution; ties by feature order then candidate order
            std::size_t best = 0;
            double best_score = -1.0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const double s = target_score(scores.row(i), y, problem.target_class);
                if (s > best_score + 1e-15) { best_score = s; best = i; }
            }
            res.best_probability = std::max(res.best_probability, best_score);
            // On a plateau (no score gain anywhere) fall back to the first
            // substitution not yet explored; hard 0/1 models give no gradient
            // until enough features have moved, so ties must still make
            // deterministic progress instead of cycling.
            if (best_score <= current) {
                bool picked = false;
                for (std::size_t i = 0; i < slots.size(); ++i) {
                    if (tried.contains(slots[i])) continue;
                    best = i;
                    best_score = target_score(scores.row(i), y, problem.target_class);
                    picked = true;
                    break;
                }
                if (!picked) break;  // every substitution explored, no progress
            }
            tried.insert(slots[best]);
            const auto [j, c] = slots[best];
            if (out.changed.empty()) out.first_changed = j;
            // reverting to the original value removes the feature from the set
            out.values[j] = candidates[j][c];
            if (out.values[j] == problem.instance[j]) out.changed.erase(j);
            else out.changed.insert(j);
            out.probs = scores.row_vec(best);
            if (is_valid(out.probs, y, problem.target_class)) out.flipped = true;
            current = std::max(current, best_score);
        }
        return out;
    };

    auto prune = [&](GreedyOutcome& out) {
        // try reverting each changed feature; keep reverts preserving validity
        std::vector<std::size_t> changed(out.changed.begin(), out.changed.end());
        for (std::size_t j : changed) {
            auto trial = out.values;
            trial[j] = problem.instance[j];
            const auto probs = evals.predict({trial}).row_vec(0);
            if (is_valid(probs, y, problem.target_class)) {
                out.values = std::move(trial);
                out.probs = std::vector<double>(probs.begin(), probs.end());
                out.changed.erase(j);
            }
        }
    };

    std::vector<GreedyOutcome> solutions;
    GreedyOutcome first = run_greedy(std::nullopt);
    if (first.flipped) {
        prune(first);
        solutions.push_back(first);
        for (std::size_t extra = 1; extra < config.n_examples; ++extra) {
            GreedyOutcome alt = run_greedy(first.first_changed);
            if (!alt.flipped) break;
            prune(alt);
            const bool duplicate = std::any_of(
                solutions.begin(), solutions.end(),
                [&](const GreedyOutcome& s) { return s.values == alt.values; });
            if (!duplicate) solutions.push_back(std::move(alt));
        }
    }

    if (solutions.empty()) {
        res.found = false;
        return res;
    }
    res.found = true;
    for (const auto& s : solutions)
        res.examples.push_back(
            make_example(ft, problem.instance, s.values, s.probs, y, problem.target_class));
    return res;
}

nlohmann::json counterfactual_to_json(const CounterfactualResult& r) {
    nlohmann::json j;
    j["explainer"] = r.explainer;
    j["original_class"] = r.original_class;
    j["found"] = r.found;
    j["best_probability"] = r.best_probability;
    nlohmann::json examples = nlohmann::json::array();
    for (const auto& ex : r.examples) {
        nlohmann::json je;
        nlohmann::json values = nlohmann::json::array();
        for (const auto& v : ex.values) values.push_back(cell_to_string(v));
        je["values"] = values;
        nlohmann::json changed = nlohmann::json::array();
        for (const auto& ch : ex.changed)
            changed.push_back(nlohmann::json{{"feature", ch.feature},
                                             {"old", cell_to_string(ch.old_value)},
                                             {"new", cell_to_string(ch.new_value)}});
        je["changed"] = changed;
        je["predicted_class"] = ex.predicted_class;
        je["probability"] = ex.probability;
        je["l1_distance"] = ex.l1_distance;
        je["valid"] = ex.valid;
        examples.push_back(je);
    }
    j["examples"] = examples;
    return j;
}

}  // namespace xai
