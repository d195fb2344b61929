#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "ocp/io.hpp"

namespace ocp {

// Seed tree under the master seed s: derive_seed(s, k) feeds
//   k = 0  Markov chains (per-chain streams derived again inside the sampler)
//   k = 1  DLR inner chains and reweighting draws
//   k = 2  truncation-event probes
//   k = 3  move-function pair draws (stream index = pair)
//   k = 4  a-priori test-function draws (stream index = pair)
//   k = 5  bootstrap bands of exponential moments
enum SeedStream : std::uint64_t {
    kStreamChain = 0,
    kStreamDlr = 1,
    kStreamProbes = 2,
    kStreamMoveFn = 3,
    kStreamApriori = 4,
    kStreamBootstrap = 5,
};

struct RunOptions {
    std::filesystem::path out;  // empty: the spec's out key, else run-<kind>-<hash prefix>
    unsigned threads = 1;
    std::ostream* log = nullptr;
};

struct RunOutcome {
    int code = kExitOk;
    std::string message;
    std::filesystem::path dir;
    std::vector<std::string> files;  // relative to dir
};

// Samples (or reloads the spec's snapshots file), runs the kind's analysis and writes
// manifest.json, snapshots.ndjson, results/*.csv and results/*.json under the output directory.
// Result files carry no timestamps; only manifest.json records creation and wall time.
RunOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& opt = {});

std::string version_string();

}  // namespace ocp
