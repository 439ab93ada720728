#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "taxrewire/taxonomy.hpp"

namespace taxrewire {

struct EvalPair {
    NodeId truth;
    NodeId predicted;
};

std::vector<EvalPair> make_eval_pairs(const std::vector<NodeId>& truth, const std::vector<NodeId>& predicted);

/// Pooled precision/recall F1. Equals accuracy for single-label data.
double micro_f1(std::span<const EvalPair> pairs);

/// Mean per-class F1 over `classes`.
double macro_f1(std::span<const EvalPair> pairs, std::span<const NodeId> classes);
/// Averaged over the classes present in the truth labels.
double macro_f1(std::span<const EvalPair> pairs);

/// Hierarchical F1 from ancestor sets that include the label and exclude
/// the root.
double hier_f1(std::span<const EvalPair> pairs, const Taxonomy& h);

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;
};

std::map<NodeId, ClassScores> per_class_scores(std::span<const EvalPair> pairs, std::span<const NodeId> classes);

struct RareCategoryReport {
    std::size_t threshold = 10;
    /// Classes with fewer than `threshold` training examples.
    std::map<NodeId, ClassScores> slice;
};

RareCategoryReport rare_category_report(std::span<const EvalPair> pairs,
                                        const std::map<NodeId, std::size_t>& train_counts,
                                        std::size_t threshold = 10);

/// Percentage of rare classes on which system A's class F1 is strictly
/// higher than system B's. 0 when there are no rare classes.
double rare_improvement_percentage(std::span<const EvalPair> system_a, std::span<const EvalPair> system_b,
                                   const std::map<NodeId, std::size_t>& train_counts, std::size_t threshold = 10);

struct MetricsOptions {
    std::size_t rare_threshold = 10;
    /// Average MF1 over all training classes instead of the test truth set.
    bool macro_over_train_classes = false;
};

struct MetricsReport {
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
    double hier_f1 = 0.0;
    std::size_t instances = 0;
    std::map<NodeId, ClassScores> per_class;
    RareCategoryReport rare;
    std::map<NodeId, std::size_t> train_counts;
};

/// `eval_hierarchy` is the tree hF1 is measured on.
MetricsReport evaluate(std::span<const EvalPair> pairs, const Taxonomy& eval_hierarchy,
                       const std::map<NodeId, std::size_t>& train_counts, const MetricsOptions& options = {});

/// JSON document; `provenance_json` (may be empty) is embedded verbatim.
std::string metrics_report_json(const MetricsReport& report, const std::string& provenance_json = {});

/// "class,precision,recall,f1,support,train_count".
std::string per_class_csv(const MetricsReport& report);

} // namespace taxrewire
