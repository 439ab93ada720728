#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "taxrewire/corpus.hpp"
#include "taxrewire/errors.hpp"
#include "taxrewire/taxonomy.hpp"

namespace taxrewire {

// ---------------------------------------------------------------------------
// Binary l2-regularized logistic regression

/// Weight vectors are dense and indexed by feature index. Slot 0 holds the
/// bias weight, which only takes part when the problem enables `bias`.
using Weights = std::vector<double>;

/// A one-vs-rest subproblem over shared instance vectors.
struct BinaryProblem {
    std::vector<const SparseVector*> x;
    /// +1 or -1 per instance.
    std::vector<signed char> y;
    /// Per-instance cost sigma_i; empty means all ones.
    std::vector<double> cost;
    FeatureIndex dimensionality = 0;
    bool bias = false;

    std::size_t size() const noexcept { return x.size(); }
    std::size_t weight_size() const noexcept { return static_cast<std::size_t>(dimensionality) + 1; }
};

/// Raw score theta . x, plus the bias weight when enabled.
double decision_value(std::span<const double> theta, const SparseVector& x, bool bias);

struct ObjectiveGradient {
    double objective;
    std::vector<double> gradient;
};

/// f(theta) = C * sum_i sigma_i log(1 + exp(-y_i theta.x_i)) + 0.5 |theta|^2
/// and its gradient.
ObjectiveGradient lr_objective_gradient(std::span<const double> theta, const BinaryProblem& problem, double C);

/// log(1 + exp(-margin)) without overflow.
double logistic_loss(double margin);
/// 1 / (1 + exp(-z)) without overflow.
double sigmoid(double z);

struct SolverOptions {
    /// Stop once |grad| <= tolerance * |grad at theta = 0|.
    double tolerance = 1e-6;
    std::size_t max_iterations = 1000;
    std::size_t history = 10;
    /// Record the objective after every accepted step.
    bool trace = false;
};

struct SolverResult {
    Weights theta;
    double objective = 0.0;
    double gradient_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> objective_trace;
};

/// Deterministic L-BFGS with a backtracking Armijo line search, started from
/// theta = 0. Accepted iterates never increase the objective.
SolverResult minimize_lr(const BinaryProblem& problem, double C, const SolverOptions& options = {});

// ---------------------------------------------------------------------------
// Per-node models

struct NodeModel {
    NodeId node = 0;
    Weights theta;
    /// Objective value at the returned weights on the training problem.
    double final_objective = 0.0;
    double c_used = 1.0;
    bool converged = true;
    std::size_t positives = 0;
};

/// P(positive | x) for a node model.
double predict_proba(const NodeModel& model, const SparseVector& x, bool bias = false);

enum class ModelMode { TopDown, Flat };

std::string to_string(ModelMode mode);
ModelMode parse_model_mode(std::string_view name);

struct ModelSet {
    ModelMode mode = ModelMode::TopDown;
    /// fingerprint() of the training hierarchy (top-down) or of the flat
    /// hierarchy over the leaf classes (flat).
    std::uint64_t taxonomy_fingerprint = 0;
    FeatureIndex dimensionality = 0;
    /// Global C; per-node values live in each NodeModel.
    double C = 1.0;
    bool bias = false;
    std::map<NodeId, NodeModel> models;
    /// Feature transform to apply to raw inputs before scoring.
    std::optional<TfidfModel> transform;
    /// Free-form provenance (JSON text, single line).
    std::string provenance;
};

struct TrainOptions {
    double C = 1.0;
    /// Overrides C for individual nodes.
    std::map<NodeId, double> per_node_C;
    bool bias = false;
    /// Per-instance costs aligned with the training set; empty means ones.
    std::vector<double> costs;
    unsigned workers = 1;
    SolverOptions solver;
};

/// Trains the one-vs-rest model of `node`: positives are instances whose
/// label lies in the subtree of `node`, negatives are all others.
NodeModel train_node(NodeId node, const Dataset& train, const Taxonomy& h, const TrainOptions& options,
                     Diagnostics* diag = nullptr);

/// One model per non-root node.
ModelSet train_topdown(const Taxonomy& h, const Dataset& train, const TrainOptions& options,
                       Diagnostics* diag = nullptr);

/// One model per leaf class, ignoring any hierarchy.
ModelSet train_flat(const std::vector<NodeId>& leaves, const Dataset& train, const TrainOptions& options,
                    Diagnostics* diag = nullptr);

/// The one-level hierarchy root -> leaves used to fingerprint flat models.
Taxonomy flat_taxonomy(const std::vector<NodeId>& leaves, NodeId root);

/// Descends from the root taking the best-scoring child until a leaf.
/// Checks the fingerprint once at construction.
class TopDownPredictor {
public:
    TopDownPredictor(const ModelSet& models, const Taxonomy& h);

    /// `x` must already be in the model's feature space.
    NodeId predict(const SparseVector& x) const;
    /// Same, also returning how many node models were scored.
    NodeId predict(const SparseVector& x, std::size_t& evaluations) const;

private:
    struct Child {
        NodeId id;
        const Weights* theta;
    };
    NodeId root_;
    bool bias_;
    std::map<NodeId, std::vector<Child>> children_;
};

NodeId predict_topdown(const ModelSet& models, const Taxonomy& h, const SparseVector& x);

/// Argmax over leaf models; ties go to the smallest id.
class FlatPredictor {
public:
    explicit FlatPredictor(const ModelSet& models);
    NodeId predict(const SparseVector& x) const;
    NodeId predict(const SparseVector& x, std::size_t& evaluations) const;

private:
    bool bias_;
    std::vector<std::pair<NodeId, const Weights*>> leaves_;
};

NodeId predict_flat(const ModelSet& models, const SparseVector& x);

/// Predicts every instance of `d` (already transformed).
std::vector<NodeId> predict_all(const ModelSet& models, const Taxonomy& h, const Dataset& d);

// ---------------------------------------------------------------------------
// Regularization tuning

/// The C values swept by default.
std::vector<double> default_C_grid();

struct TuneResult {
    double best_C = 1.0;
    /// (C, validation micro-F1) for every grid value, in grid order.
    std::vector<std::pair<double, double>> scores;
};

/// Trains the full pipeline once per grid value and keeps the C with the
/// highest validation micro-F1; ties go to the smaller C.
TuneResult tune_C(const Taxonomy& h, const Dataset& train, const Dataset& validation, const std::vector<double>& grid,
                  ModelMode mode, const TrainOptions& options, Diagnostics* diag = nullptr);

/// Per-node variant: each node keeps the C with the best binary validation
/// accuracy; ties go to the smaller C.
std::map<NodeId, double> tune_C_per_node(const Taxonomy& h, const Dataset& train, const Dataset& validation,
                                         const std::vector<double>& grid, ModelMode mode,
                                         const TrainOptions& options, Diagnostics* diag = nullptr);

// ---------------------------------------------------------------------------
// Model files

std::string serialize_model_set(const ModelSet& models);
ModelSet parse_model_set(std::string_view text);

/// Per-instance costs, one value per line.
std::vector<double> parse_cost_file(std::string_view text);

} // namespace taxrewire
