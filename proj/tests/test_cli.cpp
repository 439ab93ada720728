#include <doctest.h>

#include <json.hpp>

#include <filesystem>
#include <sstream>

#include "taxrewire/cli.hpp"
#include "taxrewire/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using taxrewire::text::read_file;
using taxrewire::text::split_lines;
using taxrewire::text::write_file;

namespace {

struct Outcome {
    int code;
    std::string err;
};

Outcome cli(std::vector<std::string> args)
{
    args.insert(args.begin(), "taxrewire");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = taxrewire::cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, err.str()};
}

std::size_t data_lines(const std::string& path)
{
    const auto contents = read_file(path);
    std::size_t n = 0;
    for (auto line : split_lines(contents))
        if (!line.empty() && line.front() != '#') ++n;
    return n;
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / ("taxrewire_unit_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("pipeline on generated data")
    {
        const auto dir = scratch("pipeline");
        const auto b = (dir / "bench").string();
        REQUIRE(cli({"bench", "--out", b, "--seed", "3", "--tau", "0.5", "--split", "0.7"}).code == 0);
        const auto summary = json::parse(read_file(b + "/summary.json"));
        CHECK(summary.at("provenance").at("seed") == 3);
        CHECK(summary.at("sibling_groups_recovered") == true);

        const auto sim = (dir / "sim").string();
        REQUIRE(cli({"similarity", "--out", sim, "--data", b + "/train.svm", "--hierarchy", b + "/hierarchy.txt",
                     "--no-tfidf"})
                    .code == 0);
        const auto simj = json::parse(read_file(sim + "/similarity.json"));
        CHECK(simj.at("pairs_total") == 351);
        CHECK(simj.contains("suggested_tau"));
        CHECK(data_lines(sim + "/similarity_curve.csv") == 352);

        const auto rew = (dir / "rew").string();
        REQUIRE(cli({"rewire", "--out", rew, "--data", b + "/train.svm", "--hierarchy", b + "/hierarchy.txt",
                     "--no-tfidf", "--top-k", "5"})
                    .code == 0);
        CHECK(data_lines(rew + "/similar_pairs.txt") == 5);
        CHECK(fs::exists(rew + "/hierarchy_modified.txt"));
        CHECK(fs::exists(rew + "/rewire_log.jsonl"));

        const auto tr = (dir / "train").string();
        REQUIRE(cli({"train", "--out", tr, "--data", b + "/train.svm", "--hierarchy", rew + "/hierarchy_modified.txt",
                     "--no-tfidf", "--grid", "default"})
                    .code == 0);
        const auto trj = json::parse(read_file(tr + "/train_summary.json"));
        CHECK(trj.at("tuning").at("scores").size() == 7);

        const auto pr = (dir / "predict").string();
        REQUIRE(cli({"predict", "--out", pr, "--model", tr + "/model.txt", "--data", b + "/test.svm", "--hierarchy",
                     rew + "/hierarchy_modified.txt"})
                    .code == 0);
        CHECK(data_lines(pr + "/predictions.txt") == data_lines(b + "/test.svm"));
        CHECK(fs::exists(pr + "/predictions.txt.meta.json"));

        const auto ev = (dir / "eval").string();
        REQUIRE(cli({"evaluate", "--out", ev, "--data", b + "/test.svm", "--predictions", pr + "/predictions.txt",
                     "--hierarchy", b + "/hierarchy_true.txt", "--train-data", b + "/train.svm", "--compare",
                     b + "/predictions_flat.txt"})
                    .code == 0);
        const auto m = json::parse(read_file(ev + "/metrics.json"));
        CHECK(m.contains("micro_f1"));
        CHECK(m.contains("macro_f1"));
        CHECK(m.contains("hier_f1"));
        CHECK(m.contains("rare_improvement_percent"));

        // A model trained on one hierarchy refuses another.
        const auto bad = cli({"predict", "--out", (dir / "bad").string(), "--model", tr + "/model.txt", "--data",
                              b + "/test.svm", "--hierarchy", b + "/hierarchy.txt"});
        CHECK(bad.code == taxrewire::cli::kFingerprint);

        // Flat models need no hierarchy.
        const auto flat = (dir / "flat").string();
        REQUIRE(cli({"train", "--out", flat, "--data", b + "/train.svm", "--hierarchy", b + "/hierarchy.txt",
                     "--method", "flat", "--C", "10"})
                    .code == 0);
        CHECK(cli({"predict", "--out", flat, "--model", flat + "/model.txt", "--data", b + "/test.svm"}).code == 0);
    }

    TEST_CASE("error families map to distinct exit codes")
    {
        using namespace taxrewire::cli;
        const auto dir = scratch("errors");
        const auto d = (dir / "data.svm").string();
        const auto h = (dir / "h.txt").string();
        write_file(d, "1 1:1\n2 2:1\n1 1:1 2:0.1\n");
        write_file(h, "0 1\n0 2\n");
        const auto out = (dir / "out").string();

        CHECK(cli({"similarity", "--out", out, "--data", d, "--hierarchy", h, "--tau", "0.5", "--top-k", "3"}).code ==
              kUsage);
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", h, "--C", "1", "--grid", "default"}).code ==
              kUsage);
        CHECK(cli({"bogus"}).code == kUsage);
        CHECK(cli({"train", "--out", out, "--data", (dir / "missing.svm").string(), "--hierarchy", h}).code == kIo);

        const auto bad_h = (dir / "bad.txt").string();
        write_file(bad_h, "0 1\n0 x\n");
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", bad_h}).code == kParse);

        const auto cyc = (dir / "cycle.txt").string();
        write_file(cyc, "0 1\n1 0\n");
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", cyc}).code == kData);

        const auto other = (dir / "other.txt").string();
        write_file(other, "0 1\n0 3\n");
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", other}).code == kData);

        const auto costs = (dir / "costs.txt").string();
        write_file(costs, "1\n2\n");
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", h, "--cost-file", costs}).code == kData);
        write_file(costs, "1\n2\n0.5\n");
        CHECK(cli({"train", "--out", out, "--data", d, "--hierarchy", h, "--cost-file", costs}).code == kOk);
    }

    TEST_CASE("grid parsing")
    {
        using taxrewire::cli::parse_grid;
        CHECK(parse_grid("default").size() == 7);
        CHECK(parse_grid("0.1, 1,10") == std::vector<double>{0.1, 1.0, 10.0});
        CHECK_THROWS(parse_grid("1,-2"));
        CHECK_THROWS(parse_grid(""));
    }
}
