#include "taxrewire/metrics.hpp"

#include <set>

#include <json.hpp>

#include "taxrewire/errors.hpp"
#include "taxrewire/text.hpp"

namespace taxrewire {

namespace {

struct Counts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
};

// F1 = 2TP / (2TP + FP + FN), algebraically equal to 2PR / (P + R) and
// exact for the single-label case.
double f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn)
{
    const std::size_t denom = 2 * tp + fp + fn;
    return denom == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(denom);
}

std::map<NodeId, Counts> confusion(std::span<const EvalPair> pairs)
{
    std::map<NodeId, Counts> counts;
    for (const auto& p : pairs) {
        if (p.truth == p.predicted) {
            ++counts[p.truth].tp;
        } else {
            ++counts[p.predicted].fp;
            ++counts[p.truth].fn;
        }
    }
    return counts;
}

std::vector<NodeId> truth_classes(std::span<const EvalPair> pairs)
{
    std::set<NodeId> s;
    for (const auto& p : pairs) s.insert(p.truth);
    return {s.begin(), s.end()};
}

} // namespace

std::vector<EvalPair> make_eval_pairs(const std::vector<NodeId>& truth, const std::vector<NodeId>& predicted)
{
    if (truth.size() != predicted.size()) throw DataError("truth and prediction counts differ");
    std::vector<EvalPair> out(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) out[i] = {truth[i], predicted[i]};
    return out;
}

double micro_f1(std::span<const EvalPair> pairs)
{
    if (pairs.empty()) throw DataError("micro F1 of an empty evaluation set");
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    for (const auto& [cls, c] : confusion(pairs)) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
    }
    return f1_from_counts(tp, fp, fn);
}

std::map<NodeId, ClassScores> per_class_scores(std::span<const EvalPair> pairs, std::span<const NodeId> classes)
{
    const auto counts = confusion(pairs);
    std::map<NodeId, ClassScores> out;
    for (NodeId cls : classes) {
        Counts c;
        if (auto it = counts.find(cls); it != counts.end()) c = it->second;
        ClassScores s;
        s.precision = c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
        s.recall = c.tp + c.fn == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
        s.f1 = f1_from_counts(c.tp, c.fp, c.fn);
        s.support = c.tp + c.fn;
        out[cls] = s;
    }
    return out;
}

double macro_f1(std::span<const EvalPair> pairs, std::span<const NodeId> classes)
{
    if (classes.empty()) throw DataError("macro F1 over an empty class set");
    const auto scores = per_class_scores(pairs, classes);
    double sum = 0.0;
    for (const auto& [cls, s] : scores) sum += s.f1;
    return sum / static_cast<double>(scores.size());
}

double macro_f1(std::span<const EvalPair> pairs)
{
    const auto classes = truth_classes(pairs);
    return macro_f1(pairs, classes);
}

double hier_f1(std::span<const EvalPair> pairs, const Taxonomy& h)
{
    // |A(y)| is the depth of y, and the ancestor sets of two nodes overlap
    // exactly on the path from their lca to (not including) the root.
    std::size_t overlap = 0;
    std::size_t predicted_total = 0;
    std::size_t truth_total = 0;
    for (const auto& p : pairs) {
        if (!h.contains(p.truth) || !h.contains(p.predicted))
            throw TaxonomyError("label not in evaluation hierarchy: " +
                                std::to_string(h.contains(p.truth) ? p.predicted : p.truth));
        overlap += h.depth(lca(h, p.truth, p.predicted));
        predicted_total += h.depth(p.predicted);
        truth_total += h.depth(p.truth);
    }
    if (predicted_total == 0 || truth_total == 0) return 0.0;
    const double hp = static_cast<double>(overlap) / static_cast<double>(predicted_total);
    const double hr = static_cast<double>(overlap) / static_cast<double>(truth_total);
    if (hp + hr == 0.0) return 0.0;
    return 2.0 * hp * hr / (hp + hr);
}

RareCategoryReport rare_category_report(std::span<const EvalPair> pairs,
                                        const std::map<NodeId, std::size_t>& train_counts, std::size_t threshold)
{
    RareCategoryReport report;
    report.threshold = threshold;
    std::vector<NodeId> rare;
    for (const auto& [cls, n] : train_counts)
        if (n < threshold) rare.push_back(cls);
    report.slice = per_class_scores(pairs, rare);
    return report;
}

double rare_improvement_percentage(std::span<const EvalPair> system_a, std::span<const EvalPair> system_b,
                                   const std::map<NodeId, std::size_t>& train_counts, std::size_t threshold)
{
    const auto a = rare_category_report(system_a, train_counts, threshold).slice;
    const auto b = rare_category_report(system_b, train_counts, threshold).slice;
    if (a.empty()) return 0.0;
    std::size_t improved = 0;
    for (const auto& [cls, s] : a)
        if (s.f1 > b.at(cls).f1) ++improved;
    return 100.0 * static_cast<double>(improved) / static_cast<double>(a.size());
}

MetricsReport evaluate(std::span<const EvalPair> pairs, const Taxonomy& eval_hierarchy,
                       const std::map<NodeId, std::size_t>& train_counts, const MetricsOptions& options)
{
    MetricsReport r;
    r.instances = pairs.size();
    r.micro_f1 = micro_f1(pairs);
    std::vector<NodeId> classes;
    if (options.macro_over_train_classes && !train_counts.empty()) {
        for (const auto& [cls, n] : train_counts) classes.push_back(cls);
    } else {
        classes = truth_classes(pairs);
    }
    r.macro_f1 = macro_f1(pairs, classes);
    r.hier_f1 = hier_f1(pairs, eval_hierarchy);

    std::set<NodeId> all(classes.begin(), classes.end());
    for (const auto& p : pairs) all.insert(p.predicted);
    for (const auto& [cls, n] : train_counts) all.insert(cls);
    const std::vector<NodeId> report_classes(all.begin(), all.end());
    r.per_class = per_class_scores(pairs, report_classes);
    r.rare = rare_category_report(pairs, train_counts, options.rare_threshold);
    r.train_counts = train_counts;
    return r;
}

std::string metrics_report_json(const MetricsReport& report, const std::string& provenance_json)
{
    using json = nlohmann::json;
    auto class_json = [&](const std::map<NodeId, ClassScores>& m) {
        json arr = json::array();
        for (const auto& [cls, s] : m) {
            const auto it = report.train_counts.find(cls);
            arr.push_back({{"class", cls},
                           {"precision", s.precision},
                           {"recall", s.recall},
                           {"f1", s.f1},
                           {"support", s.support},
                           {"train_count", it == report.train_counts.end() ? 0 : it->second}});
        }
        return arr;
    };
    json j;
    j["micro_f1"] = report.micro_f1;
    j["macro_f1"] = report.macro_f1;
    j["hier_f1"] = report.hier_f1;
    j["instances"] = report.instances;
    j["per_class"] = class_json(report.per_class);
    j["rare"] = {{"threshold", report.rare.threshold},
                 {"classes", report.rare.slice.size()},
                 {"per_class", class_json(report.rare.slice)}};
    if (!provenance_json.empty()) j["provenance"] = json::parse(provenance_json);
    return j.dump(2) + "\n";
}

std::string per_class_csv(const MetricsReport& report)
{
    std::string out = "class,precision,recall,f1,support,train_count\n";
    for (const auto& [cls, s] : report.per_class) {
        const auto it = report.train_counts.find(cls);
        out += std::to_string(cls) + ',' + text::format_double(s.precision) + ',' + text::format_double(s.recall) +
               ',' + text::format_double(s.f1) + ',' + std::to_string(s.support) + ',' +
               std::to_string(it == report.train_counts.end() ? 0 : it->second) + '\n';
    }
    return out;
}

} // namespace taxrewire
