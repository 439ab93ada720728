#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace taxrewire::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kIo = 3,
    kParse = 4,
    kFingerprint = 5,
    kData = 6,
};

struct RunConfig {
    std::string data;
    std::string hierarchy;
    std::string out;
    std::string test_data;
    std::string modified_hierarchy;
    std::string pairs;
    std::string model;
    std::string predictions;
    /// Second prediction file for the rare-category comparison.
    std::string baseline_predictions;
    std::string train_data;
    std::string cost_file;

    std::optional<double> tau;
    std::optional<std::size_t> top_k;
    bool auto_tau = false;

    std::string method = "td-lr";
    std::optional<double> C;
    /// "default" or a comma separated list; empty disables tuning.
    std::string grid;
    bool per_node_C = false;
    bool bias = false;
    bool no_tfidf = false;
    double split = 0.9;
    std::uint64_t seed = 1;

    std::string eval_hierarchy = "original";
    std::size_t rare_threshold = 10;
    bool macro_over_train = false;

    bool collapse_chains = false;
    unsigned workers = 1;

    // bench
    std::size_t fanout = 3;
    std::size_t leaves = 27;
    std::size_t dims = 200;
    std::size_t instances = 30;
    std::size_t instances_max = 0;
    std::size_t misplaced = 2;
    double noise = 0.1;
};

/// Runs one subcommand. Diagnostics go to `log`; the return value is an
/// ExitCode.
int run(const std::string& subcommand, const RunConfig& config, std::ostream& log);

/// Parses the command line and dispatches to run().
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Parses a grid flag value: "default" or "0.1,1,10".
std::vector<double> parse_grid(const std::string& spec);

} // namespace taxrewire::cli
