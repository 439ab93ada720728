#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "taxrewire/errors.hpp"
#include "taxrewire/learner.hpp"
#include "taxrewire/random.hpp"
#include "taxrewire/rewire.hpp"
#include "taxrewire/synthbench.hpp"

using namespace taxrewire;

namespace {

struct OwnedProblem {
    std::vector<SparseVector> xs;
    BinaryProblem p;
};

OwnedProblem random_problem(Rng& rng, std::size_t n, FeatureIndex dims, bool bias, bool costs)
{
    OwnedProblem o;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Feature> f;
        for (FeatureIndex j = 1; j <= dims; ++j)
            if (uniform01(rng) < 0.5) f.push_back({j, uniform(rng, -1.0, 1.0)});
        o.xs.emplace_back(std::move(f));
    }
    for (const auto& x : o.xs) o.p.x.push_back(&x);
    for (std::size_t i = 0; i < n; ++i) o.p.y.push_back(uniform01(rng) < 0.5 ? 1 : -1);
    if (costs)
        for (std::size_t i = 0; i < n; ++i) o.p.cost.push_back(uniform(rng, 0.1, 3.0));
    o.p.dimensionality = dims;
    o.p.bias = bias;
    return o;
}

Dataset planted_data(const Taxonomy& h, std::size_t per_class, double noise, std::uint64_t seed)
{
    synth::DataConfig dc;
    dc.dims = 40;
    dc.instances_min = dc.instances_max = per_class;
    dc.noise = noise;
    Rng rng(seed);
    return synth::sample_hierarchical_data(h, dc, rng);
}

} // namespace

TEST_SUITE("learner")
{
    TEST_CASE("objective and gradient at zero")
    {
        Rng rng(1);
        auto o = random_problem(rng, 12, 6, false, false);
        const double C = 2.5;
        const std::vector<double> zero(o.p.weight_size(), 0.0);
        const auto fg = lr_objective_gradient(zero, o.p, C);
        CHECK(fg.objective == doctest::Approx(C * 12 * std::log(2.0)).epsilon(1e-14));
        std::vector<double> expect(o.p.weight_size(), 0.0);
        for (std::size_t i = 0; i < o.p.size(); ++i)
            for (const auto& f : o.p.x[i]->entries()) expect[f.index] += -(C / 2.0) * o.p.y[i] * f.value;
        for (std::size_t j = 0; j < expect.size(); ++j) CHECK(fg.gradient[j] == doctest::Approx(expect[j]).epsilon(1e-12));
    }

    TEST_CASE("gradient matches central differences")
    {
        Rng rng(2);
        for (int trial = 0; trial < 10; ++trial) {
            auto o = random_problem(rng, 15, 8, trial % 2 == 0, trial % 3 == 0);
            const double C = uniform(rng, 0.1, 5.0);
            std::vector<double> theta(o.p.weight_size());
            for (auto& t : theta) t = uniform(rng, -1.0, 1.0);
            if (!o.p.bias) theta[0] = 0.0;
            const auto fg = lr_objective_gradient(theta, o.p, C);
            double diff2 = 0.0;
            double ref2 = 0.0;
            for (std::size_t j = 0; j < theta.size(); ++j) {
                const double h = 1e-5;
                auto plus = theta;
                auto minus = theta;
                plus[j] += h;
                minus[j] -= h;
                const double num = (lr_objective_gradient(plus, o.p, C).objective -
                                    lr_objective_gradient(minus, o.p, C).objective) /
                                   (2 * h);
                diff2 += (fg.gradient[j] - num) * (fg.gradient[j] - num);
                ref2 += num * num;
            }
            CHECK(std::sqrt(diff2) / (std::sqrt(ref2) + 1e-12) <= 1e-5);
        }
    }

    TEST_CASE("unit costs equal no costs")
    {
        Rng rng(3);
        auto o = random_problem(rng, 20, 5, true, false);
        std::vector<double> theta(o.p.weight_size());
        for (auto& t : theta) t = uniform(rng, -2.0, 2.0);
        auto weighted = o.p;
        weighted.cost.assign(o.p.size(), 1.0);
        const auto a = lr_objective_gradient(theta, o.p, 1.7);
        const auto b = lr_objective_gradient(theta, weighted, 1.7);
        CHECK(std::abs(a.objective - b.objective) <= 1e-12);
        CHECK(a.gradient == b.gradient);
    }

    TEST_CASE("argument checks")
    {
        Rng rng(4);
        auto o = random_problem(rng, 5, 3, false, false);
        std::vector<double> theta(o.p.weight_size(), 0.0);
        CHECK_THROWS_AS(lr_objective_gradient(theta, o.p, 0.0), DataError);
        CHECK_THROWS_AS(lr_objective_gradient(std::vector<double>(2, 0.0), o.p, 1.0), DataError);
        o.p.cost = {1.0};
        CHECK_THROWS_AS(lr_objective_gradient(theta, o.p, 1.0), DataError);
    }

    TEST_CASE("stable logistic helpers")
    {
        CHECK(sigmoid(0.0) == 0.5);
        CHECK(sigmoid(1e6) == 1.0);
        CHECK(sigmoid(-1e6) == 0.0);
        CHECK(sigmoid(std::log(3.0)) == doctest::Approx(0.75).epsilon(1e-15));
        CHECK(logistic_loss(0.0) == doctest::Approx(std::log(2.0)));
        CHECK(std::isfinite(logistic_loss(-1e6)));
        CHECK(logistic_loss(-1e6) == doctest::Approx(1e6));
        NodeModel m;
        m.theta = {0.0, std::log(3.0)};
        CHECK(predict_proba(m, SparseVector{{1, 1.0}}) == doctest::Approx(0.75));
        CHECK(predict_proba(m, SparseVector{}) == 0.5);
        m.theta = {0.0, 1e300};
        CHECK(predict_proba(m, SparseVector{{1, 10.0}}) == 1.0);
    }

    TEST_CASE("solver: monotone objective, never worse than zero, converges")
    {
        Rng rng(5);
        for (int trial = 0; trial < 10; ++trial) {
            auto o = random_problem(rng, 40, 10, trial % 2 == 0, trial % 2 == 1);
            SolverOptions opt;
            opt.trace = true;
            const double C = uniform(rng, 0.01, 10.0);
            const auto res = minimize_lr(o.p, C, opt);
            CHECK(res.converged);
            for (std::size_t k = 1; k < res.objective_trace.size(); ++k)
                CHECK(res.objective_trace[k] <= res.objective_trace[k - 1]);
            double bound = 0.0;
            for (std::size_t i = 0; i < o.p.size(); ++i) bound += o.p.cost.empty() ? 1.0 : o.p.cost[i];
            CHECK(res.objective <= C * bound * std::log(2.0) + 1e-9);
        }
    }

    TEST_CASE("separable toy set is fit exactly at large C")
    {
        std::vector<SparseVector> xs{SparseVector{{1, 1.0}}, SparseVector{{1, 0.8}, {2, 0.2}},
                                     SparseVector{{2, 1.0}}, SparseVector{{1, 0.1}, {2, 0.9}}};
        BinaryProblem p;
        for (const auto& x : xs) p.x.push_back(&x);
        p.y = {1, 1, -1, -1};
        p.dimensionality = 2;
        const auto res = minimize_lr(p, 1000.0);
        for (std::size_t i = 0; i < xs.size(); ++i) CHECK((decision_value(res.theta, xs[i], false) > 0) == (p.y[i] > 0));
    }

    TEST_CASE("node labels follow subtrees")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 5, 0.05, 1);
        CHECK(train_node(3, d, h, {}).positives == 5);
        CHECK(train_node(fixtures::B, d, h, {}).positives == 15);
        CHECK_THROWS_AS(train_node(fixtures::A, d, h, {}), TaxonomyError);
    }

    TEST_CASE("one model per non-root node; leaves and labels are checked")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 5, 0.05, 1);
        const auto m = train_topdown(h, d, {});
        CHECK(m.models.size() == 8);
        CHECK(m.taxonomy_fingerprint == fingerprint(h));

        Dataset missing;
        for (const auto& inst : d.instances)
            if (inst.label != 8) missing.add(inst);
        Diagnostics diag;
        train_topdown(h, missing, {}, &diag);
        CHECK(diag.warnings.size() >= 1);

        Dataset bad = d;
        bad.instances[0].label = fixtures::B;
        CHECK_THROWS_AS(train_topdown(h, bad, {}), DataError);
    }

    TEST_CASE("flat hierarchy: top-down equals flat")
    {
        const std::vector<NodeId> leaves{2, 5, 7, 9};
        const auto h = flat_taxonomy(leaves, 0);
        const auto d = planted_data(h, 12, 0.3, 7);
        const auto td = train_topdown(h, d, {});
        const auto flat = train_flat(leaves, d, {});
        CHECK(td.models.size() == 4);
        CHECK(predict_all(td, h, d) == predict_all(flat, h, d));
    }

    TEST_CASE("prediction: always a leaf, evaluation count, tie-break")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 6, 0.05, 3);
        const auto m = train_topdown(h, d, {});
        const TopDownPredictor pred(m, h);
        std::size_t evals = 0;
        const NodeId out = pred.predict(SparseVector{}, evals);
        CHECK(h.is_leaf(out));
        CHECK(evals == 5);
        for (const auto& inst : d.instances) CHECK(h.is_leaf(pred.predict(inst.features)));

        // All-zero weights tie everywhere: the smallest id wins each level.
        ModelSet zero = m;
        for (auto& [n, nm] : zero.models) std::fill(nm.theta.begin(), nm.theta.end(), 0.0);
        CHECK(predict_topdown(zero, h, d.instances[0].features) == 3);
        const FlatPredictor fp(train_flat(h.leaves(), d, {}));
        std::size_t flat_evals = 0;
        fp.predict(SparseVector{}, flat_evals);
        CHECK(flat_evals == 6);
    }

    TEST_CASE("fingerprint mismatch")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 4, 0.05, 3);
        const auto m = train_topdown(h, d, {});
        const auto moved = pc_rewire(h, 6, fixtures::B);
        CHECK_THROWS_AS(TopDownPredictor(m, moved), FingerprintMismatch);
        auto flat = train_flat(h.leaves(), d, {});
        CHECK_THROWS_AS(TopDownPredictor(flat, h), ConfigError);
    }

    TEST_CASE("training is deterministic across worker counts")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 8, 0.2, 5);
        TrainOptions one;
        TrainOptions many;
        many.workers = 6;
        const auto a = serialize_model_set(train_topdown(h, d, one));
        CHECK(a == serialize_model_set(train_topdown(h, d, one)));
        CHECK(a == serialize_model_set(train_topdown(h, d, many)));
    }

    TEST_CASE("model file round trip")
    {
        const auto h = fixtures::two_branch_tree();
        auto d = planted_data(h, 5, 0.1, 9);
        TrainOptions opt;
        opt.bias = true;
        opt.C = 0.5;
        auto m = train_topdown(h, d, opt);
        m.transform = TfidfModel::fit(d);
        m.provenance = "{\"seed\":1}";
        const auto text = serialize_model_set(m);
        const auto back = parse_model_set(text);
        CHECK(serialize_model_set(back) == text);
        CHECK(back.bias);
        CHECK(back.provenance == m.provenance);
        CHECK(predict_all(back, h, d) == predict_all(m, h, d));
        CHECK_THROWS_AS(parse_model_set("garbage\n"), ParseError);
    }

    TEST_CASE("C tuning")
    {
        const auto h = fixtures::two_branch_tree();
        const auto d = planted_data(h, 10, 0.3, 11);
        auto [tr, va] = split_train_validation(d, 0.7, 1);
        const auto single = tune_C(h, tr, va, {0.5}, ModelMode::TopDown, {});
        CHECK(single.best_C == 0.5);
        const auto full = tune_C(h, tr, va, default_C_grid(), ModelMode::TopDown, {});
        CHECK(full.scores.size() == 7);
        CHECK(default_C_grid() == std::vector<double>{0.001, 0.01, 0.1, 1, 10, 100, 1000});

        // Class 8 only in training: tuning still completes.
        Dataset va_missing;
        for (const auto& inst : va.instances)
            if (inst.label != 8) va_missing.add(inst);
        CHECK_NOTHROW(tune_C(h, tr, va_missing, default_C_grid(), ModelMode::Flat, {}));

        Diagnostics diag;
        CHECK(tune_C(h, tr, Dataset{}, default_C_grid(), ModelMode::TopDown, {}, &diag).best_C == 1.0);
        CHECK(diag.warnings.size() == 1);

        const auto per_node = tune_C_per_node(h, tr, va, {0.1, 10}, ModelMode::TopDown, {});
        CHECK(per_node.size() == 8);
    }

    TEST_CASE("cost file")
    {
        CHECK(parse_cost_file("1\n0.5\n\n2.25\n") == std::vector<double>{1.0, 0.5, 2.25});
        CHECK_THROWS_AS(parse_cost_file("1\nx\n"), ParseError);
    }
}
