#include "taxrewire/learner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "taxrewire/metrics.hpp"
#include "taxrewire/text.hpp"

namespace taxrewire {

// ---------------------------------------------------------------------------
// Objective

double logistic_loss(double margin)
{
    return margin > 0.0 ? std::log1p(std::exp(-margin)) : -margin + std::log1p(std::exp(margin));
}

double sigmoid(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double decision_value(std::span<const double> theta, const SparseVector& x, bool bias)
{
    double s = x.dot(theta);
    if (bias && !theta.empty()) s += theta[0];
    return s;
}

namespace {

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot_dense(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void check_problem(std::span<const double> theta, const BinaryProblem& p, double C)
{
    if (!(C > 0.0) || !std::isfinite(C)) throw DataError("C must be a positive finite number");
    if (theta.size() != p.weight_size())
        throw DataError("weight vector has " + std::to_string(theta.size()) + " entries, expected " +
                        std::to_string(p.weight_size()));
    if (p.y.size() != p.x.size()) throw DataError("label count does not match example count");
    if (!p.cost.empty() && p.cost.size() != p.x.size()) throw DataError("cost count does not match example count");
    for (double t : theta)
        if (!std::isfinite(t)) throw DataError("non-finite weight");
}

} // namespace

ObjectiveGradient lr_objective_gradient(std::span<const double> theta, const BinaryProblem& p, double C)
{
    check_problem(theta, p, C);
    ObjectiveGradient out{0.0, std::vector<double>(theta.begin(), theta.end())};
    double loss = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double y = p.y[i];
        const double sigma = p.cost.empty() ? 1.0 : p.cost[i];
        const double margin = y * decision_value(theta, *p.x[i], p.bias);
        loss += sigma * logistic_loss(margin);
        // d/dtheta log(1 + exp(-m)) = -y x s(-m)
        const double coef = -C * sigma * y * sigmoid(-margin);
        for (const auto& f : p.x[i]->entries()) out.gradient[f.index] += coef * f.value;
        if (p.bias) out.gradient[0] += coef;
    }
    out.objective = C * loss + 0.5 * dot_dense(theta, theta);
    return out;
}

SolverResult minimize_lr(const BinaryProblem& problem, double C, const SolverOptions& options)
{
    const std::size_t n = problem.weight_size();
    SolverResult res;
    res.theta.assign(n, 0.0);
    auto fg = lr_objective_gradient(res.theta, problem, C);
    const double g0 = norm2(fg.gradient);
    if (options.trace) res.objective_trace.push_back(fg.objective);

    std::deque<std::vector<double>> s_hist;
    std::deque<std::vector<double>> y_hist;
    std::deque<double> rho_hist;
    std::vector<double> dir(n);
    std::vector<double> trial(n);
    std::vector<double> alpha(options.history);

    double gnorm = g0;
    while (true) {
        if (gnorm <= options.tolerance * g0) {
            res.converged = true;
            break;
        }
        if (res.iterations >= options.max_iterations) break;

        // Two-loop recursion: dir = -H g.
        for (std::size_t i = 0; i < n; ++i) dir[i] = -fg.gradient[i];
        const std::size_t m = s_hist.size();
        for (std::size_t k = m; k-- > 0;) {
            alpha[k] = rho_hist[k] * dot_dense(s_hist[k], dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] -= alpha[k] * y_hist[k][i];
        }
        if (m > 0) {
            const double gamma = dot_dense(s_hist.back(), y_hist.back()) / dot_dense(y_hist.back(), y_hist.back());
            for (double& d : dir) d *= gamma;
        }
        for (std::size_t k = 0; k < m; ++k) {
            const double beta = rho_hist[k] * dot_dense(y_hist[k], dir);
            for (std::size_t i = 0; i < n; ++i) dir[i] += (alpha[k] - beta) * s_hist[k][i];
        }

        double slope = dot_dense(fg.gradient, dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t i = 0; i < n; ++i) dir[i] = -fg.gradient[i];
            slope = -gnorm * gnorm;
        }

        // Backtracking Armijo search.
        double step = s_hist.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
        bool accepted = false;
        ObjectiveGradient next;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = res.theta[i] + step * dir[i];
            next = lr_objective_gradient(trial, problem, C);
            if (next.objective <= fg.objective + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (s_hist.empty()) break;
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            continue;
        }

        std::vector<double> s(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = trial[i] - res.theta[i];
            y[i] = next.gradient[i] - fg.gradient[i];
        }
        const double sy = dot_dense(s, y);
        if (sy > 1e-12 * norm2(s) * norm2(y)) {
            if (s_hist.size() == options.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }

        res.theta.swap(trial);
        fg = std::move(next);
        gnorm = norm2(fg.gradient);
        ++res.iterations;
        if (options.trace) res.objective_trace.push_back(fg.objective);
    }
    res.objective = fg.objective;
    res.gradient_norm = gnorm;
    return res;
}

// ---------------------------------------------------------------------------
// Node models

double predict_proba(const NodeModel& model, const SparseVector& x, bool bias)
{
    return sigmoid(decision_value(model.theta, x, bias));
}

std::string to_string(ModelMode mode) { return mode == ModelMode::TopDown ? "td-lr" : "flat"; }

ModelMode parse_model_mode(std::string_view name)
{
    if (name == "td-lr") return ModelMode::TopDown;
    if (name == "flat") return ModelMode::Flat;
    throw ConfigError("unknown method \"" + std::string(name) + "\" (expected td-lr or flat)");
}

namespace {

/// Shared instance pointers for all nodes of one training run.
BinaryProblem base_problem(const Dataset& train, const TrainOptions& options)
{
    if (train.empty()) throw DataError("training set is empty");
    if (!options.costs.empty()) {
        if (options.costs.size() != train.size())
            throw DataError("cost vector has " + std::to_string(options.costs.size()) + " entries for " +
                            std::to_string(train.size()) + " training instances");
        for (double c : options.costs)
            if (!(c > 0.0) || !std::isfinite(c)) throw DataError("instance costs must be positive");
    }
    BinaryProblem p;
    p.x.reserve(train.size());
    for (const auto& inst : train.instances) p.x.push_back(&inst.features);
    p.y.assign(train.size(), -1);
    p.cost = options.costs;
    p.dimensionality = train.dimensionality;
    p.bias = options.bias;
    return p;
}

NodeModel fit_node(NodeId node, BinaryProblem problem, const std::set<NodeId>& positive_labels,
                   const Dataset& train, const TrainOptions& options, Diagnostics* diag)
{
    std::size_t positives = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
        const bool pos = positive_labels.count(train.instances[i].label) != 0;
        problem.y[i] = pos ? 1 : -1;
        positives += pos ? 1 : 0;
    }
    const auto it = options.per_node_C.find(node);
    const double C = it == options.per_node_C.end() ? options.C : it->second;
    if (positives == 0) warn(diag, "node " + std::to_string(node) + " has no positive training instances");

    auto sol = minimize_lr(problem, C, options.solver);
    if (!sol.converged)
        warn(diag, "node " + std::to_string(node) + ": solver stopped after " + std::to_string(sol.iterations) +
                       " iterations without reaching the tolerance");
    NodeModel m;
    m.node = node;
    m.theta = std::move(sol.theta);
    m.final_objective = sol.objective;
    m.c_used = C;
    m.converged = sol.converged;
    m.positives = positives;
    return m;
}

void check_labels(const Dataset& train, const std::set<NodeId>& leaves, Diagnostics* diag)
{
    std::set<NodeId> seen;
    for (const auto& inst : train.instances) {
        if (leaves.count(inst.label) == 0)
            throw DataError("training label " + std::to_string(inst.label) + " is not a leaf of the hierarchy");
        seen.insert(inst.label);
    }
    for (NodeId leaf : leaves)
        if (seen.count(leaf) == 0) warn(diag, "leaf " + std::to_string(leaf) + " has no training instances");
}

/// Trains each (node, positive label set) job, possibly in parallel. Results
/// are stored by job index, so the worker count never changes the output.
std::map<NodeId, NodeModel> fit_all(const std::vector<std::pair<NodeId, std::set<NodeId>>>& jobs, const Dataset& train,
                                    const TrainOptions& options, Diagnostics* diag)
{
    const BinaryProblem base = base_problem(train, options);
    std::vector<NodeModel> results(jobs.size());
    std::vector<Diagnostics> job_diag(jobs.size());

    const unsigned workers = std::max(1u, std::min<unsigned>(options.workers, static_cast<unsigned>(jobs.size())));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                results[j] = fit_node(jobs[j].first, base, jobs[j].second, train, options, &job_diag[j]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    std::map<NodeId, NodeModel> models;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        if (diag != nullptr)
            for (auto& w : job_diag[j].warnings) diag->warn(std::move(w));
        models.emplace(jobs[j].first, std::move(results[j]));
    }
    return models;
}

std::uint64_t flat_fingerprint(std::vector<NodeId> leaves)
{
    std::sort(leaves.begin(), leaves.end());
    std::string key = "flat\n";
    for (NodeId l : leaves) key += std::to_string(l) + '\n';
    return text::fnv1a(key);
}

} // namespace

NodeModel train_node(NodeId node, const Dataset& train, const Taxonomy& h, const TrainOptions& options, Diagnostics* diag)
{
    if (!h.contains(node) || h.is_root(node)) throw TaxonomyError("cannot train a model for node " + std::to_string(node));
    const auto leaves = h.subtree_leaves(node);
    return fit_node(node, base_problem(train, options), std::set<NodeId>(leaves.begin(), leaves.end()), train, options,
                    diag);
}

ModelSet train_topdown(const Taxonomy& h, const Dataset& train, const TrainOptions& options, Diagnostics* diag)
{
    const auto leaves = h.leaves();
    check_labels(train, std::set<NodeId>(leaves.begin(), leaves.end()), diag);

    std::vector<std::pair<NodeId, std::set<NodeId>>> jobs;
    for (NodeId n : h.non_root_nodes()) {
        const auto sub = h.subtree_leaves(n);
        jobs.emplace_back(n, std::set<NodeId>(sub.begin(), sub.end()));
    }

    ModelSet ms;
    ms.mode = ModelMode::TopDown;
    ms.taxonomy_fingerprint = fingerprint(h);
    ms.dimensionality = train.dimensionality;
    ms.C = options.C;
    ms.bias = options.bias;
    ms.models = fit_all(jobs, train, options, diag);
    return ms;
}

ModelSet train_flat(const std::vector<NodeId>& leaves, const Dataset& train, const TrainOptions& options,
                    Diagnostics* diag)
{
    if (leaves.empty()) throw DataError("no leaf classes to train");
    const std::set<NodeId> leaf_set(leaves.begin(), leaves.end());
    check_labels(train, leaf_set, diag);

    std::vector<std::pair<NodeId, std::set<NodeId>>> jobs;
    for (NodeId l : leaf_set) jobs.emplace_back(l, std::set<NodeId>{l});

    ModelSet ms;
    ms.mode = ModelMode::Flat;
    ms.taxonomy_fingerprint = flat_fingerprint(leaves);
    ms.dimensionality = train.dimensionality;
    ms.C = options.C;
    ms.bias = options.bias;
    ms.models = fit_all(jobs, train, options, diag);
    return ms;
}

Taxonomy flat_taxonomy(const std::vector<NodeId>& leaves, NodeId root)
{
    Taxonomy t(root);
    for (NodeId l : leaves) t.add_node(l, root);
    return t;
}

TopDownPredictor::TopDownPredictor(const ModelSet& models, const Taxonomy& h) : root_(h.root()), bias_(models.bias)
{
    if (models.mode != ModelMode::TopDown) throw ConfigError("model set is not a top-down model");
    if (models.taxonomy_fingerprint != fingerprint(h))
        throw FingerprintMismatch("model fingerprint " + text::to_hex(models.taxonomy_fingerprint) +
                                  " does not match hierarchy fingerprint " + text::to_hex(fingerprint(h)));
    for (NodeId n : h.nodes()) {
        const auto& kids = h.children(n);
        if (kids.empty()) continue;
        auto& out = children_[n];
        for (NodeId c : kids) {
            const auto it = models.models.find(c);
            if (it == models.models.end()) throw ConfigError("no model for node " + std::to_string(c));
            out.push_back({c, &it->second.theta});
        }
    }
}

NodeId TopDownPredictor::predict(const SparseVector& x) const
{
    std::size_t ignored = 0;
    return predict(x, ignored);
}

NodeId TopDownPredictor::predict(const SparseVector& x, std::size_t& evaluations) const
{
    evaluations = 0;
    NodeId p = root_;
    for (auto it = children_.find(p); it != children_.end(); it = children_.find(p)) {
        // Children are ascending, so strict '>' sends ties to the smallest id.
        double best = -std::numeric_limits<double>::infinity();
        NodeId best_id = it->second.front().id;
        for (const auto& c : it->second) {
            const double s = decision_value(*c.theta, x, bias_);
            ++evaluations;
            if (s > best) {
                best = s;
                best_id = c.id;
            }
        }
        p = best_id;
    }
    return p;
}

NodeId predict_topdown(const ModelSet& models, const Taxonomy& h, const SparseVector& x)
{
    return TopDownPredictor(models, h).predict(x);
}

FlatPredictor::FlatPredictor(const ModelSet& models) : bias_(models.bias)
{
    if (models.mode != ModelMode::Flat) throw ConfigError("model set is not a flat model");
    if (models.models.empty()) throw ConfigError("flat model set is empty");
    for (const auto& [id, m] : models.models) leaves_.emplace_back(id, &m.theta);
}

NodeId FlatPredictor::predict(const SparseVector& x) const
{
    std::size_t ignored = 0;
    return predict(x, ignored);
}

NodeId FlatPredictor::predict(const SparseVector& x, std::size_t& evaluations) const
{
    double best = -std::numeric_limits<double>::infinity();
    NodeId best_id = leaves_.front().first;
    for (const auto& [id, theta] : leaves_) {
        const double s = decision_value(*theta, x, bias_);
        if (s > best) {
            best = s;
            best_id = id;
        }
    }
    evaluations = leaves_.size();
    return best_id;
}

NodeId predict_flat(const ModelSet& models, const SparseVector& x) { return FlatPredictor(models).predict(x); }

std::vector<NodeId> predict_all(const ModelSet& models, const Taxonomy& h, const Dataset& d)
{
    std::vector<NodeId> out;
    out.reserve(d.size());
    if (models.mode == ModelMode::TopDown) {
        const TopDownPredictor pred(models, h);
        for (const auto& inst : d.instances) out.push_back(pred.predict(inst.features));
    } else {
        const FlatPredictor pred(models);
        for (const auto& inst : d.instances) out.push_back(pred.predict(inst.features));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tuning

std::vector<double> default_C_grid() { return {0.001, 0.01, 0.1, 1, 10, 100, 1000}; }

namespace {

ModelSet train_mode(const Taxonomy& h, const Dataset& train, ModelMode mode, const TrainOptions& options,
                    Diagnostics* diag)
{
    return mode == ModelMode::TopDown ? train_topdown(h, train, options, diag)
                                      : train_flat(h.leaves(), train, options, diag);
}

std::vector<NodeId> truth_of(const Dataset& d)
{
    std::vector<NodeId> out;
    out.reserve(d.size());
    for (const auto& inst : d.instances) out.push_back(inst.label);
    return out;
}

} // namespace

TuneResult tune_C(const Taxonomy& h, const Dataset& train, const Dataset& validation, const std::vector<double>& grid,
                  ModelMode mode, const TrainOptions& options, Diagnostics* diag)
{
    if (grid.empty()) throw ConfigError("C grid is empty");
    TuneResult res;
    if (validation.empty()) {
        warn(diag, "validation set is empty; using C = 1");
        res.best_C = 1.0;
        return res;
    }
    const auto truth = truth_of(validation);
    double best_score = -1.0;
    for (double C : grid) {
        TrainOptions opt = options;
        opt.C = C;
        opt.per_node_C.clear();
        const auto models = train_mode(h, train, mode, opt, diag);
        const auto pairs = make_eval_pairs(truth, predict_all(models, h, validation));
        const double score = micro_f1(pairs);
        res.scores.emplace_back(C, score);
        if (score > best_score || (score == best_score && C < res.best_C)) {
            best_score = score;
            res.best_C = C;
        }
    }
    return res;
}

std::map<NodeId, double> tune_C_per_node(const Taxonomy& h, const Dataset& train, const Dataset& validation,
                                         const std::vector<double>& grid, ModelMode mode,
                                         const TrainOptions& options, Diagnostics* diag)
{
    if (grid.empty()) throw ConfigError("C grid is empty");
    std::map<NodeId, double> best_C;
    std::map<NodeId, double> best_acc;
    const std::vector<NodeId> nodes = mode == ModelMode::TopDown ? h.non_root_nodes() : h.leaves();
    if (validation.empty()) {
        warn(diag, "validation set is empty; using C = 1 for every node");
        for (NodeId n : nodes) best_C[n] = 1.0;
        return best_C;
    }

    std::map<NodeId, std::set<NodeId>> positive_labels;
    for (NodeId n : nodes) {
        const auto sub = h.subtree_leaves(n);
        positive_labels[n] = std::set<NodeId>(sub.begin(), sub.end());
    }
    for (double C : grid) {
        TrainOptions opt = options;
        opt.C = C;
        opt.per_node_C.clear();
        const auto models = train_mode(h, train, mode, opt, diag);
        for (NodeId n : nodes) {
            const auto& m = models.models.at(n);
            std::size_t correct = 0;
            for (const auto& inst : validation.instances) {
                const bool truth = positive_labels[n].count(inst.label) != 0;
                const bool pred = decision_value(m.theta, inst.features, models.bias) >= 0.0;
                correct += truth == pred ? 1 : 0;
            }
            const double acc = static_cast<double>(correct) / static_cast<double>(validation.size());
            auto it = best_acc.find(n);
            if (it == best_acc.end() || acc > it->second || (acc == it->second && C < best_C[n])) {
                best_acc[n] = acc;
                best_C[n] = C;
            }
        }
    }
    return best_C;
}

// ---------------------------------------------------------------------------
// Model files

std::string serialize_model_set(const ModelSet& ms)
{
    std::string out = "# taxrewire model\n";
    out += "mode " + to_string(ms.mode) + '\n';
    out += "fingerprint " + text::to_hex(ms.taxonomy_fingerprint) + '\n';
    out += "dimensionality " + std::to_string(ms.dimensionality) + '\n';
    out += "C " + text::format_double(ms.C) + '\n';
    out += "bias " + std::string(ms.bias ? "1" : "0") + '\n';
    if (!ms.provenance.empty()) out += "provenance " + ms.provenance + '\n';
    if (ms.transform) {
        out += "transform tfidf\n";
        out += "idf_documents " + std::to_string(ms.transform->documents()) + '\n';
        out += "idf";
        const auto idf = ms.transform->idf();
        for (std::size_t j = 1; j < idf.size(); ++j)
            if (idf[j] != 0.0) out += ' ' + std::to_string(j) + ':' + text::format_double(idf[j]);
        out += '\n';
    } else {
        out += "transform none\n";
    }
    out += "nodes " + std::to_string(ms.models.size()) + '\n';
    for (const auto& [id, m] : ms.models)
        out += "objective " + std::to_string(id) + ' ' + text::format_double(m.final_objective) + ' ' +
               text::format_double(m.c_used) + ' ' + (m.converged ? "1" : "0") + ' ' + std::to_string(m.positives) +
               '\n';
    out += "end\n";
    for (const auto& [id, m] : ms.models) {
        out += std::to_string(id);
        for (std::size_t j = 0; j < m.theta.size(); ++j)
            if (m.theta[j] != 0.0) out += ' ' + std::to_string(j) + ':' + text::format_double(m.theta[j]);
        out += '\n';
    }
    return out;
}

namespace {

std::vector<std::pair<std::uint64_t, double>> parse_index_values(const std::vector<std::string_view>& tok,
                                                                 std::size_t from, std::size_t line)
{
    std::vector<std::pair<std::uint64_t, double>> out;
    for (std::size_t k = from; k < tok.size(); ++k) {
        const auto colon = tok[k].find(':');
        std::uint64_t idx = 0;
        double v = 0.0;
        if (colon == std::string_view::npos || !text::parse_u64(tok[k].substr(0, colon), idx) ||
            !text::parse_double(tok[k].substr(colon + 1), v))
            throw ParseError(line, "invalid index:value token \"" + std::string(tok[k]) + "\"");
        out.emplace_back(idx, v);
    }
    return out;
}

} // namespace

ModelSet parse_model_set(std::string_view text_in)
{
    ModelSet ms;
    const auto lines = text::split_lines(text_in);
    std::size_t i = 0;
    bool ended = false;
    bool seen_mode = false;
    bool seen_fp = false;
    std::size_t declared_nodes = 0;
    std::size_t idf_docs = 0;
    std::vector<double> idf;
    bool tfidf = false;
    std::map<NodeId, NodeModel> meta;

    for (; i < lines.size() && !ended; ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto sp = line.find(' ');
        const auto key = line.substr(0, sp);
        const auto rest = sp == std::string_view::npos ? std::string_view{} : text::trim(line.substr(sp + 1));
        const auto tok = text::split_ws(line);
        const std::size_t ln = i + 1;
        std::uint64_t u = 0;
        if (key == "end") {
            ended = true;
        } else if (key == "mode") {
            ms.mode = parse_model_mode(rest);
            seen_mode = true;
        } else if (key == "fingerprint") {
            if (rest.size() != 16) throw ParseError(ln, "fingerprint must be 16 hex digits");
            const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), ms.taxonomy_fingerprint, 16);
            if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) throw ParseError(ln, "invalid fingerprint");
            seen_fp = true;
        } else if (key == "dimensionality") {
            if (!text::parse_u64(rest, u) || u > std::numeric_limits<FeatureIndex>::max())
                throw ParseError(ln, "invalid dimensionality");
            ms.dimensionality = static_cast<FeatureIndex>(u);
        } else if (key == "C") {
            if (!text::parse_double(rest, ms.C)) throw ParseError(ln, "invalid C");
        } else if (key == "bias") {
            ms.bias = rest == "1";
        } else if (key == "provenance") {
            ms.provenance = std::string(rest);
        } else if (key == "transform") {
            if (rest != "tfidf" && rest != "none") throw ParseError(ln, "unknown transform");
            tfidf = rest == "tfidf";
        } else if (key == "idf_documents") {
            if (!text::parse_u64(rest, u)) throw ParseError(ln, "invalid idf_documents");
            idf_docs = u;
        } else if (key == "idf") {
            for (const auto& [j, v] : parse_index_values(tok, 1, ln)) {
                if (j == 0 || j > std::numeric_limits<FeatureIndex>::max()) throw ParseError(ln, "idf index out of range");
                if (idf.size() <= j) idf.resize(j + 1, 0.0);
                idf[j] = v;
            }
        } else if (key == "nodes") {
            if (!text::parse_u64(rest, u)) throw ParseError(ln, "invalid node count");
            declared_nodes = u;
        } else if (key == "objective") {
            std::uint64_t id = 0;
            std::uint64_t pos = 0;
            NodeModel m;
            if (tok.size() != 6 || !text::parse_u64(tok[1], id) || id > std::numeric_limits<NodeId>::max() ||
                !text::parse_double(tok[2], m.final_objective) || !text::parse_double(tok[3], m.c_used) ||
                (tok[4] != "0" && tok[4] != "1") || !text::parse_u64(tok[5], pos))
                throw ParseError(ln, "expected \"objective node value C converged positives\"");
            m.node = static_cast<NodeId>(id);
            m.converged = tok[4] == "1";
            m.positives = pos;
            meta[m.node] = m;
        } else {
            throw ParseError(ln, "unknown header key \"" + std::string(key) + "\"");
        }
    }
    if (!ended) throw ParseError(0, "model header not terminated by \"end\"");
    if (!seen_mode || !seen_fp) throw ParseError(0, "model header lacks mode or fingerprint");
    if (tfidf) {
        if (idf.size() < static_cast<std::size_t>(ms.dimensionality) + 1) idf.resize(ms.dimensionality + 1, 0.0);
        ms.transform = TfidfModel(std::move(idf), idf_docs);
    }

    const std::size_t wsize = static_cast<std::size_t>(ms.dimensionality) + 1;
    for (; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty()) continue;
        const auto tok = text::split_ws(line);
        std::uint64_t id = 0;
        if (!text::parse_u64(tok[0], id) || id > std::numeric_limits<NodeId>::max())
            throw ParseError(i + 1, "invalid node id");
        auto it = meta.find(static_cast<NodeId>(id));
        if (it == meta.end()) throw ParseError(i + 1, "weights for node " + std::to_string(id) + " without header entry");
        NodeModel m = it->second;
        m.theta.assign(wsize, 0.0);
        for (const auto& [j, v] : parse_index_values(tok, 1, i + 1)) {
            if (j >= wsize) throw ParseError(i + 1, "weight index exceeds dimensionality");
            m.theta[j] = v;
        }
        if (!ms.models.emplace(m.node, std::move(m)).second)
            throw ParseError(i + 1, "duplicate node " + std::to_string(id));
    }
    if (ms.models.size() != declared_nodes || ms.models.size() != meta.size())
        throw ParseError(0, "model declares " + std::to_string(declared_nodes) + " nodes but holds " +
                                std::to_string(ms.models.size()));
    return ms;
}

std::vector<double> parse_cost_file(std::string_view text_in)
{
    std::vector<double> costs;
    const auto lines = text::split_lines(text_in);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        double v = 0.0;
        if (!text::parse_double(line, v) || !(v > 0.0)) throw ParseError(i + 1, "cost must be a positive number");
        costs.push_back(v);
    }
    return costs;
}

} // namespace taxrewire
