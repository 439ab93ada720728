#include "taxrewire/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <map>
#include <sstream>

#include "taxrewire/corpus.hpp"
#include "taxrewire/errors.hpp"
#include "taxrewire/learner.hpp"
#include "taxrewire/metrics.hpp"
#include "taxrewire/rewire.hpp"
#include "taxrewire/simgraph.hpp"
#include "taxrewire/synthbench.hpp"
#include "taxrewire/taxonomy.hpp"
#include "taxrewire/text.hpp"

namespace taxrewire::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

/// The settings that shape a subcommand's output. Paths and the worker
/// count are left out so that relocated or parallel runs produce identical
/// artifacts; inputs are identified by file name and content hash instead.
json config_json(const std::string& command, const RunConfig& c)
{
    json j = json::object();
    const bool similarity = command == "similarity" || command == "bench" || (command == "rewire" && c.pairs.empty());
    if (similarity)
        j["threshold"] = c.tau     ? json{{"tau", *c.tau}}
                         : c.top_k ? json{{"top_k", *c.top_k}}
                                   : json{{"auto", true}};
    if (command == "similarity" || command == "rewire" || command == "train") j["tfidf"] = !c.no_tfidf;
    if (command == "rewire" || command == "bench") j["collapse_chains"] = c.collapse_chains;
    if (command == "train") {
        j["method"] = c.method;
        j["grid"] = c.grid;
        j["per_node_C"] = c.per_node_C;
        j["bias"] = c.bias;
        if (!c.grid.empty()) j["split"] = c.split;
    }
    if (command == "train" || command == "bench") j["C"] = c.C ? json(*c.C) : json(nullptr);
    if (command == "evaluate") {
        j["eval_hierarchy"] = c.eval_hierarchy;
        j["rare_threshold"] = c.rare_threshold;
        j["macro_over_train"] = c.macro_over_train;
    }
    if (command == "bench") {
        j["split"] = c.split;
        j["fanout"] = c.fanout;
        j["leaves"] = c.leaves;
        j["dims"] = c.dims;
        j["instances"] = c.instances;
        j["instances_max"] = c.instances_max;
        j["misplaced"] = c.misplaced;
        j["noise"] = c.noise;
    }
    return j;
}

class Run {
public:
    Run(std::string command, const RunConfig& cfg, std::ostream& log) : command_(std::move(command)), cfg_(cfg), log_(log)
    {
        if (cfg_.out.empty()) throw ConfigError("--out is required");
        std::error_code ec;
        fs::create_directories(cfg_.out, ec);
        if (ec) throw IoError("cannot create output directory " + cfg_.out + ": " + ec.message());
    }

    /// Reads an input file and records it in the provenance.
    std::string input(const std::string& role, const std::string& path)
    {
        if (path.empty()) throw ConfigError("--" + role + " is required for " + command_);
        auto contents = text::read_file(path);
        inputs_[role] = {{"file", fs::path(path).filename().string()},
                         {"fnv1a", text::to_hex(text::fnv1a(contents))}};
        return contents;
    }

    json provenance() const
    {
        return {{"tool", "taxrewire"}, {"version", kVersion}, {"command", command_},
                {"seed", cfg_.seed},   {"config", config_json(command_, cfg_)}, {"inputs", inputs_}};
    }

    std::string provenance_line() const { return provenance().dump(); }

    std::string path(const std::string& name) const { return (fs::path(cfg_.out) / name).string(); }

    void write(const std::string& name, std::string_view contents) const { text::write_file(path(name), contents); }

    /// For formats without comment syntax, provenance goes to a sidecar.
    void write_with_sidecar(const std::string& name, std::string_view contents, json extra = json::object()) const
    {
        write(name, contents);
        json meta{{"artifact", name}, {"provenance", provenance()}};
        for (auto& [k, v] : extra.items()) meta[k] = v;
        write(name + ".meta.json", meta.dump(2) + "\n");
    }

    void write_json(const std::string& name, json body) const
    {
        json doc{{"provenance", provenance()}};
        for (auto& [k, v] : body.items()) doc[k] = v;
        write(name, doc.dump(2) + "\n");
    }

    void write_hierarchy(const std::string& name, const Taxonomy& h) const
    {
        write(name, "# provenance " + provenance_line() + "\n" + serialize_taxonomy(h));
    }

    /// Flushes collected warnings to the log and returns them for reports.
    json warnings()
    {
        for (const auto& w : diag.warnings) log_ << "warning: " << w << '\n';
        json out = diag.warnings;
        diag.warnings.clear();
        return out;
    }

    const RunConfig& cfg() const { return cfg_; }
    std::ostream& log() const { return log_; }

    Diagnostics diag;

private:
    std::string command_;
    const RunConfig& cfg_;
    std::ostream& log_;
    json inputs_ = json::object();
};

void check_threshold_modes(const RunConfig& c)
{
    const int modes = (c.tau ? 1 : 0) + (c.top_k ? 1 : 0) + (c.auto_tau ? 1 : 0);
    if (modes > 1) throw ConfigError("--tau, --top-k and --auto-tau are mutually exclusive");
}

struct SimilarityOutcome {
    std::vector<PairScore> scores;
    Knee knee;
    SimilarPairSet selected;
    json selection;
};

SimilarityOutcome similarity_stage(Run& run, const Dataset& train, const Taxonomy& h)
{
    const auto& c = run.cfg();
    check_threshold_modes(c);
    SimilarityOutcome s;
    const auto centroids = class_centroids(train, h.leaves(), &run.diag);
    s.scores = all_pairs_scores(centroids.centroids, c.workers);
    if (s.scores.size() >= 3) {
        s.knee = auto_threshold(s.scores, &run.diag);
    } else {
        s.knee = {1, s.scores.front().score, false};
        run.diag.warn("too few class pairs for knee detection");
    }

    PairSelection mode = TopK{s.knee.rank};
    if (c.tau) {
        mode = TauThreshold{*c.tau};
        s.selection = {{"mode", "tau"}, {"value", *c.tau}};
    } else if (c.top_k) {
        mode = TopK{*c.top_k};
        s.selection = {{"mode", "top_k"}, {"value", *c.top_k}};
    } else {
        s.selection = {{"mode", "auto"}, {"value", s.knee.rank}};
    }
    s.selected = select_pairs(s.scores, mode, &run.diag);
    s.selection["tau"] = s.selected.tau();
    s.selection["pairs"] = s.selected.size();
    return s;
}

void write_similarity(Run& run, const SimilarityOutcome& s, std::size_t classes)
{
    run.write_with_sidecar("similarity_curve.csv", similarity_curve_csv(s.scores));
    run.write("similar_pairs.txt", "# provenance " + run.provenance_line() + "\n" + serialize_pair_set(s.selected));
    run.write_json("similarity.json", {{"classes", classes},
                                       {"pairs_total", s.scores.size()},
                                       {"knee", {{"rank", s.knee.rank}, {"score", s.knee.score}, {"found", s.knee.found}}},
                                       {"suggested_tau", s.knee.score},
                                       {"selection", s.selection},
                                       {"warnings", run.warnings()}});
}

Dataset load_dataset(Run& run, const std::string& role, const std::string& path)
{
    return parse_dataset(run.input(role, path));
}

Taxonomy load_hierarchy(Run& run, const std::string& role, const std::string& path)
{
    return parse_taxonomy(run.input(role, path));
}

json rewire_counts(const RewireLog& log)
{
    std::size_t nc = 0;
    std::size_t pc = 0;
    std::size_t nd = 0;
    for (const auto& step : log) {
        if (std::holds_alternative<NodeCreation>(step.op))
            ++nc;
        else if (std::holds_alternative<LeafRewire>(step.op))
            ++pc;
        else
            ++nd;
    }
    return {{"NC", nc}, {"PCRewire", pc}, {"ND", nd}};
}

std::string rewire_log_text(const Run& run, const RewireLog& log)
{
    return json{{"provenance", run.provenance()}}.dump() + "\n" + serialize_rewire_log(log);
}

int cmd_similarity(Run& run)
{
    const auto& c = run.cfg();
    auto train = load_dataset(run, "data", c.data);
    const auto h = load_hierarchy(run, "hierarchy", c.hierarchy);
    if (!c.no_tfidf) train = tfidf_normalize(train);
    const auto s = similarity_stage(run, train, h);
    write_similarity(run, s, h.leaves().size());
    run.log() << "pairs: " << s.scores.size() << ", selected: " << s.selected.size()
              << ", suggested tau: " << text::format_double(s.knee.score) << '\n';
    return kOk;
}

int cmd_rewire(Run& run)
{
    const auto& c = run.cfg();
    const auto h = load_hierarchy(run, "hierarchy", c.hierarchy);
    SimilarPairSet pairs;
    if (!c.pairs.empty()) {
        if (c.tau || c.top_k || c.auto_tau) throw ConfigError("--pairs cannot be combined with a threshold flag");
        pairs = parse_pair_set(run.input("pairs", c.pairs));
    } else {
        auto train = load_dataset(run, "data", c.data);
        if (!c.no_tfidf) train = tfidf_normalize(train);
        auto s = similarity_stage(run, train, h);
        write_similarity(run, s, h.leaves().size());
        pairs = std::move(s.selected);
    }

    RewireOptions options;
    options.collapse_chains = c.collapse_chains;
    const auto result = rewhier(h, pairs, options, &run.diag);
    run.write_hierarchy("hierarchy_modified.txt", result.modified);
    run.write("rewire_log.jsonl", rewire_log_text(run, result.log));
    run.write_json("rewire_summary.json", {{"pairs", pairs.size()},
                                           {"tau", pairs.tau()},
                                           {"operations", rewire_counts(result.log)},
                                           {"fingerprint_original", text::to_hex(fingerprint(h))},
                                           {"fingerprint_modified", text::to_hex(fingerprint(result.modified))},
                                           {"warnings", run.warnings()}});
    run.log() << "rewired with " << pairs.size() << " pairs, " << result.log.size() << " operations\n";
    return kOk;
}

TrainOptions train_options(const RunConfig& c)
{
    TrainOptions o;
    o.C = c.C.value_or(1.0);
    o.bias = c.bias;
    o.workers = c.workers;
    return o;
}

template <class T>
std::vector<T> pick(const std::vector<T>& v, const std::vector<std::size_t>& idx)
{
    std::vector<T> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(v[i]);
    return out;
}

Dataset pick(const Dataset& d, const std::vector<std::size_t>& idx)
{
    Dataset out;
    for (std::size_t i : idx) out.add(d.instances[i]);
    out.dimensionality = d.dimensionality;
    return out;
}

int cmd_train(Run& run)
{
    const auto& c = run.cfg();
    const auto mode = parse_model_mode(c.method);
    auto train = load_dataset(run, "data", c.data);
    const auto h = load_hierarchy(run, "hierarchy", c.hierarchy);
    if (c.C && !c.grid.empty()) throw ConfigError("--C and --grid are mutually exclusive");
    if (c.per_node_C && c.grid.empty()) throw ConfigError("--per-node-C needs --grid");

    auto options = train_options(c);
    if (!c.cost_file.empty()) {
        options.costs = parse_cost_file(run.input("cost_file", c.cost_file));
        if (options.costs.size() != train.size())
            throw DataError("cost file has " + std::to_string(options.costs.size()) + " values for " +
                            std::to_string(train.size()) + " instances");
    }

    std::optional<TfidfModel> transform;
    if (!c.no_tfidf) {
        transform = TfidfModel::fit(train);
        train = transform->transform(train);
    }

    json tuning = nullptr;
    if (!c.grid.empty()) {
        const auto grid = parse_grid(c.grid);
        const auto idx = split_indices(train.size(), c.split, c.seed);
        const auto fit_part = pick(train, idx.train);
        const auto val_part = pick(train, idx.validation);
        auto fit_options = options;
        if (!options.costs.empty()) fit_options.costs = pick(options.costs, idx.train);
        if (c.per_node_C) {
            options.per_node_C = tune_C_per_node(h, fit_part, val_part, grid, mode, fit_options, &run.diag);
            json per_node = json::object();
            for (const auto& [n, C] : options.per_node_C) per_node[std::to_string(n)] = C;
            tuning = {{"grid", grid}, {"per_node_C", per_node}};
        } else {
            const auto tuned = tune_C(h, fit_part, val_part, grid, mode, fit_options, &run.diag);
            options.C = tuned.best_C;
            json scores = json::array();
            for (const auto& [C, f1] : tuned.scores) scores.push_back({{"C", C}, {"micro_f1", f1}});
            tuning = {{"grid", grid}, {"scores", scores}, {"best_C", tuned.best_C}};
        }
    }

    auto models = mode == ModelMode::TopDown ? train_topdown(h, train, options, &run.diag)
                                             : train_flat(h.leaves(), train, options, &run.diag);
    models.transform = std::move(transform);
    models.provenance = run.provenance_line();
    run.write("model.txt", serialize_model_set(models));
    run.write_json("train_summary.json", {{"method", to_string(mode)},
                                          {"C", options.C},
                                          {"models", models.models.size()},
                                          {"tuning", tuning},
                                          {"warnings", run.warnings()}});
    run.log() << "trained " << models.models.size() << " node models\n";
    return kOk;
}

std::string predictions_text(const std::vector<NodeId>& predicted)
{
    std::string out;
    for (std::size_t i = 0; i < predicted.size(); ++i) out += std::to_string(i) + ' ' + std::to_string(predicted[i]) + '\n';
    return out;
}

std::vector<NodeId> parse_predictions(std::string_view contents)
{
    std::vector<NodeId> out;
    const auto lines = text::split_lines(contents);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const auto line = text::trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        const auto tok = text::split_ws(line);
        std::uint64_t index = 0;
        std::uint64_t label = 0;
        if (tok.size() != 2 || !text::parse_u64(tok[0], index) || !text::parse_u64(tok[1], label) ||
            label > std::numeric_limits<NodeId>::max())
            throw ParseError(i + 1, "expected \"instance_index predicted_label\"");
        if (index != out.size()) throw ParseError(i + 1, "instance indices must run 0, 1, 2, ...");
        out.push_back(static_cast<NodeId>(label));
    }
    return out;
}

Dataset apply_transform(const ModelSet& models, const Dataset& d)
{
    return models.transform ? models.transform->transform(d) : d;
}

int cmd_predict(Run& run)
{
    const auto& c = run.cfg();
    const auto models = parse_model_set(run.input("model", c.model));
    const auto test = apply_transform(models, load_dataset(run, "data", c.data));
    Taxonomy h;
    if (models.mode == ModelMode::TopDown) h = load_hierarchy(run, "hierarchy", c.hierarchy);
    const auto predicted = predict_all(models, h, test);
    run.write_with_sidecar("predictions.txt", predictions_text(predicted),
                           {{"instances", predicted.size()},
                            {"model_fingerprint", text::to_hex(models.taxonomy_fingerprint)}});
    run.log() << "predicted " << predicted.size() << " instances\n";
    return kOk;
}

std::map<NodeId, std::size_t> train_counts(const Dataset& d)
{
    const auto hist = label_histogram(d);
    return {hist.begin(), hist.end()};
}

int cmd_evaluate(Run& run)
{
    const auto& c = run.cfg();
    const auto test = load_dataset(run, "data", c.data);
    const auto predicted = parse_predictions(run.input("predictions", c.predictions));
    if (predicted.size() != test.size())
        throw DataError(std::to_string(predicted.size()) + " predictions for " + std::to_string(test.size()) +
                        " test instances");

    Taxonomy h;
    if (c.eval_hierarchy == "original")
        h = load_hierarchy(run, "hierarchy", c.hierarchy);
    else if (c.eval_hierarchy == "modified")
        h = load_hierarchy(run, "modified_hierarchy", c.modified_hierarchy);
    else
        throw ConfigError("--eval-hierarchy must be original or modified");

    std::map<NodeId, std::size_t> counts;
    if (!c.train_data.empty()) counts = train_counts(load_dataset(run, "train_data", c.train_data));

    std::vector<NodeId> truth;
    for (const auto& inst : test.instances) truth.push_back(inst.label);
    const auto pairs = make_eval_pairs(truth, predicted);

    MetricsOptions options;
    options.rare_threshold = c.rare_threshold;
    options.macro_over_train_classes = c.macro_over_train;
    if (c.macro_over_train && counts.empty()) throw ConfigError("--macro-over-train needs --train-data");

    std::optional<double> rare_improvement;
    if (!c.baseline_predictions.empty()) {
        const auto baseline = parse_predictions(run.input("baseline_predictions", c.baseline_predictions));
        if (baseline.size() != test.size()) throw DataError("baseline prediction count does not match the test set");
        const auto base_pairs = make_eval_pairs(truth, baseline);
        rare_improvement = rare_improvement_percentage(pairs, base_pairs, counts, c.rare_threshold);
    }

    const auto report = evaluate(pairs, h, counts, options);
    auto doc = json::parse(metrics_report_json(report, run.provenance().dump()));
    doc["eval_hierarchy"] = c.eval_hierarchy;
    if (rare_improvement) doc["rare_improvement_percent"] = *rare_improvement;
    run.write("metrics.json", doc.dump(2) + "\n");
    run.write_with_sidecar("per_class.csv", per_class_csv(report));
    run.log() << "micro-F1 " << text::format_double(report.micro_f1) << ", macro-F1 "
              << text::format_double(report.macro_f1) << ", hier-F1 " << text::format_double(report.hier_f1) << '\n';
    return kOk;
}

json system_metrics(const std::vector<EvalPair>& pairs, const Taxonomy& truth)
{
    return {{"micro_f1", micro_f1(pairs)}, {"macro_f1", macro_f1(pairs)}, {"hier_f1", hier_f1(pairs, truth)}};
}

int cmd_bench(Run& run)
{
    const auto& c = run.cfg();
    synth::PlantConfig pc;
    pc.fanout = c.fanout;
    pc.n_leaves = c.leaves;
    pc.dims = c.dims;
    pc.instances_per_leaf = c.instances;
    pc.instances_max = c.instances_max;
    pc.n_misplaced = c.misplaced;
    pc.noise = c.noise;
    pc.seed = c.seed;
    const auto planted = synth::gen_planted(pc);

    const auto idx = split_indices(planted.data.size(), c.split, c.seed);
    const auto train = pick(planted.data, idx.train);
    const auto test = pick(planted.data, idx.validation);

    run.write_hierarchy("hierarchy_true.txt", planted.truth);
    run.write_hierarchy("hierarchy.txt", planted.corrupted);
    run.write("train.svm", "# provenance " + run.provenance_line() + "\n" + serialize_dataset(train));
    run.write("test.svm", "# provenance " + run.provenance_line() + "\n" + serialize_dataset(test));

    // Synthetic features are dense reals, so no tf-idf weighting here.
    auto s = similarity_stage(run, train, planted.corrupted);
    write_similarity(run, s, planted.corrupted.leaves().size());
    RewireOptions ro;
    ro.collapse_chains = c.collapse_chains;
    const auto rewired = rewhier(planted.corrupted, s.selected, ro, &run.diag);
    run.write_hierarchy("hierarchy_modified.txt", rewired.modified);
    run.write("rewire_log.jsonl", rewire_log_text(run, rewired.log));

    const auto options = train_options(c);
    std::vector<NodeId> truth;
    for (const auto& inst : test.instances) truth.push_back(inst.label);

    json systems = json::object();
    auto score = [&](const std::string& name, const ModelSet& models, const Taxonomy& h) {
        const auto predicted = predict_all(models, h, test);
        run.write_with_sidecar("predictions_" + name + ".txt", predictions_text(predicted));
        systems[name] = system_metrics(make_eval_pairs(truth, predicted), planted.truth);
    };
    score("topdown_original", train_topdown(planted.corrupted, train, options, &run.diag), planted.corrupted);
    score("topdown_modified", train_topdown(rewired.modified, train, options, &run.diag), rewired.modified);
    const auto leaves = planted.truth.leaves();
    score("flat", train_flat(leaves, train, options, &run.diag), flat_taxonomy(leaves, planted.truth.root()));

    const bool recovered = synth::sibling_groups(rewired.modified) == synth::sibling_groups(planted.truth);
    json misplaced = planted.misplaced;
    run.write_json("summary.json", {{"classes", leaves.size()},
                                    {"train_instances", train.size()},
                                    {"test_instances", test.size()},
                                    {"misplaced", misplaced},
                                    {"selection", s.selection},
                                    {"operations", rewire_counts(rewired.log)},
                                    {"sibling_groups_recovered", recovered},
                                    {"metrics_on_true_hierarchy", systems},
                                    {"warnings", run.warnings()}});
    run.log() << "recovered sibling groups: " << (recovered ? "yes" : "no") << ", top-down micro-F1 original "
              << text::format_double(systems["topdown_original"]["micro_f1"].get<double>()) << " vs modified "
              << text::format_double(systems["topdown_modified"]["micro_f1"].get<double>()) << '\n';
    return kOk;
}

} // namespace

std::vector<double> parse_grid(const std::string& spec)
{
    if (spec == "default") return default_C_grid();
    std::vector<double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!text::parse_double(text::trim(item), v) || !(v > 0.0))
            throw ConfigError("invalid grid value \"" + item + "\"");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty grid");
    return out;
}

int run(const std::string& subcommand, const RunConfig& config, std::ostream& log)
{
    try {
        if (config.workers == 0) throw ConfigError("--workers must be positive");
        Run r(subcommand, config, log);
        if (subcommand == "similarity") return cmd_similarity(r);
        if (subcommand == "rewire") return cmd_rewire(r);
        if (subcommand == "train") return cmd_train(r);
        if (subcommand == "predict") return cmd_predict(r);
        if (subcommand == "evaluate") return cmd_evaluate(r);
        if (subcommand == "bench") return cmd_bench(r);
        throw ConfigError("unknown subcommand \"" + subcommand + "\"");
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const IoError& e) {
        log << "error: " << e.what() << '\n';
        return kIo;
    } catch (const ParseError& e) {
        log << "error: " << e.what() << '\n';
        return kParse;
    } catch (const FingerprintMismatch& e) {
        log << "error: " << e.what() << '\n';
        return kFingerprint;
    } catch (const DataError& e) {
        log << "error: " << e.what() << '\n';
        return kData;
    } catch (const TaxonomyError& e) {
        log << "error: " << e.what() << '\n';
        return kData;
    } catch (const std::exception& e) {
        log << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Similarity-driven taxonomy rewiring and hierarchical classification"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    RunConfig cfg;
    double tau = 0.0;
    std::size_t top_k = 0;
    double C = 1.0;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.out, "Output directory")->required();
        sub->add_option("--seed", cfg.seed, "Seed for every random choice");
        sub->add_option("--workers", cfg.workers, "Worker threads; results do not depend on it")
            ->check(CLI::PositiveNumber);
    };
    auto threshold = [&](CLI::App* sub) {
        auto* t = sub->add_option("--tau", tau, "Keep pairs scoring at or above this");
        auto* k = sub->add_option("--top-k", top_k, "Keep the k most similar pairs")->check(CLI::PositiveNumber);
        auto* a = sub->add_flag("--auto-tau", cfg.auto_tau, "Cut the sorted curve at its knee (default)");
        t->excludes(k)->excludes(a);
        k->excludes(a);
        sub->add_flag("--no-tfidf", cfg.no_tfidf, "Use features as given (pre-vectorized data)");
    };

    auto* sim = app.add_subcommand("similarity", "Score class pairs and suggest a threshold");
    common(sim);
    sim->add_option("--data", cfg.data, "Training data (SVMlight)")->required();
    sim->add_option("--hierarchy", cfg.hierarchy, "Hierarchy edge list")->required();
    threshold(sim);

    auto* rew = app.add_subcommand("rewire", "Rewire the hierarchy from similar pairs");
    common(rew);
    rew->add_option("--data", cfg.data, "Training data (SVMlight)");
    rew->add_option("--hierarchy", cfg.hierarchy, "Hierarchy edge list")->required();
    rew->add_option("--pairs", cfg.pairs, "Precomputed similar pairs instead of --data");
    rew->add_flag("--collapse-chains", cfg.collapse_chains, "Also remove single-child internal nodes");
    threshold(rew);

    auto* trn = app.add_subcommand("train", "Train node models");
    common(trn);
    trn->add_option("--data", cfg.data, "Training data (SVMlight)")->required();
    trn->add_option("--hierarchy", cfg.hierarchy, "Hierarchy edge list")->required();
    trn->add_option("--method", cfg.method, "td-lr or flat")->check(CLI::IsMember({"td-lr", "flat"}));
    auto* c_opt = trn->add_option("--C", C, "Regularization constant")->check(CLI::PositiveNumber);
    auto* g_opt = trn->add_option("--grid", cfg.grid, "Tune C over 'default' or a comma list");
    c_opt->excludes(g_opt);
    trn->add_flag("--per-node-C", cfg.per_node_C, "Tune C separately for every node");
    trn->add_option("--cost-file", cfg.cost_file, "Per-instance costs, one per line");
    trn->add_option("--split", cfg.split, "Training share of the tuning split")->check(CLI::Range(0.0, 1.0));
    trn->add_flag("--bias", cfg.bias, "Add a bias term");
    trn->add_flag("--no-tfidf", cfg.no_tfidf, "Use features as given (pre-vectorized data)");

    auto* prd = app.add_subcommand("predict", "Predict test instances");
    common(prd);
    prd->add_option("--model", cfg.model, "Model file")->required();
    prd->add_option("--data", cfg.data, "Test data (SVMlight)")->required();
    prd->add_option("--hierarchy", cfg.hierarchy, "Hierarchy the model was trained on");

    auto* evl = app.add_subcommand("evaluate", "Score predictions");
    common(evl);
    evl->add_option("--data", cfg.data, "Test data with true labels")->required();
    evl->add_option("--predictions", cfg.predictions, "Prediction file")->required();
    evl->add_option("--hierarchy", cfg.hierarchy, "Original hierarchy");
    evl->add_option("--modified-hierarchy", cfg.modified_hierarchy, "Rewired hierarchy");
    evl->add_option("--eval-hierarchy", cfg.eval_hierarchy, "Hierarchy for hier-F1")
        ->check(CLI::IsMember({"original", "modified"}));
    evl->add_option("--train-data", cfg.train_data, "Training data, for rare-class counts");
    evl->add_option("--rare-threshold", cfg.rare_threshold, "Classes with fewer training examples are rare");
    evl->add_option("--compare", cfg.baseline_predictions, "Baseline predictions for the rare-class comparison");
    evl->add_flag("--macro-over-train", cfg.macro_over_train, "Average macro-F1 over all training classes");

    auto* bch = app.add_subcommand("bench", "Generate a planted benchmark and run the pipeline on it");
    common(bch);
    bch->add_option("--fanout", cfg.fanout, "Tree fanout");
    bch->add_option("--leaves", cfg.leaves, "Leaf count, a power of the fanout");
    bch->add_option("--dims", cfg.dims, "Feature dimensions");
    bch->add_option("--instances", cfg.instances, "Instances per leaf");
    bch->add_option("--instances-max", cfg.instances_max, "Upper end of a per-leaf count range");
    bch->add_option("--misplaced", cfg.misplaced, "Leaves moved to a wrong parent");
    bch->add_option("--noise", cfg.noise, "Per-coordinate noise half-width")->check(CLI::Range(0.0, 0.999999));
    bch->add_option("--split", cfg.split, "Training share")->check(CLI::Range(0.0, 1.0));
    auto* bc = bch->add_option("--C", C, "Regularization constant")->check(CLI::PositiveNumber);
    bch->add_flag("--collapse-chains", cfg.collapse_chains, "Also remove single-child internal nodes");
    {
        auto* t = bch->add_option("--tau", tau, "Keep pairs scoring at or above this");
        auto* k = bch->add_option("--top-k", top_k, "Keep the k most similar pairs")->check(CLI::PositiveNumber);
        auto* a = bch->add_flag("--auto-tau", cfg.auto_tau, "Cut the sorted curve at its knee (default)");
        t->excludes(k)->excludes(a);
        k->excludes(a);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    CLI::App* chosen = app.get_subcommands().front();
    auto given = [&](const char* name) {
        const auto* opt = chosen->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--tau")) cfg.tau = tau;
    if (given("--top-k")) cfg.top_k = top_k;
    if ((chosen == trn && c_opt->count() > 0) || (chosen == bch && bc->count() > 0)) cfg.C = C;
    return run(chosen->get_name(), cfg, err);
}

} // namespace taxrewire::cli
