#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocp/geometry.hpp"
#include "ocp/sampler.hpp"

namespace ocp {

// Spec diagnostics carry the offending line (0 when not tied to one) and field.
struct SpecError : std::runtime_error {
    SpecError(const std::string& what, int line, std::string field);
    int line;
    std::string field;
};
struct SpecSyntaxError : SpecError {
    using SpecError::SpecError;
};
struct UnknownKeyError : SpecError {
    using SpecError::SpecError;
};
struct TypeMismatchError : SpecError {
    using SpecError::SpecError;
};
struct ConstraintError : SpecError {
    using SpecError::SpecError;
};
struct CompletenessError : SpecError {
    using SpecError::SpecError;
};

enum class Kind { sample, dlr, rigidity, loctrans, locallaw, movefn, apriori };
const char* kind_name(Kind k);
Kind parse_kind(const std::string& s);  // throws std::invalid_argument

// Validated experiment description. Values are stored canonically (one line per key, keys
// sorted) so the hash does not depend on layout, comments or key order.
struct ExperimentSpec {
    Kind kind = Kind::sample;
    ChainPlan plan;
    std::uint64_t seed = 1;
    std::string out_dir;
    std::map<std::string, std::string> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }
    double number(const std::string& key) const;
    std::int64_t integer(const std::string& key) const;
    std::vector<double> list(const std::string& key) const;
    Vec2 vec2(const std::string& key) const;
    std::string text(const std::string& key) const;

    std::string canonical() const;
    std::string hash() const;  // sha256 of canonical()
};

// INI-like text: optional [section] headers, key = value lines, '#' or ';' comments.
// Sections only group keys; every key is global. Chain length is given either as samples
// per chain or as steps (single-particle moves after burn-in), which yields steps / thinning samples.
ExperimentSpec parse_spec(const std::string& text);
ExperimentSpec load_spec(const std::filesystem::path& path);
// replace the master seed (and the chain seed derived from it)
void override_seed(ExperimentSpec& spec, std::uint64_t seed);

std::string sha256_hex(const std::string& bytes);
std::string file_sha256(const std::filesystem::path& path);

// snapshots.ndjson: one JSON record per configuration, each carrying the spec hash
struct Snapshot {
    std::size_t chain = 0;
    std::size_t index = 0;
    PointConfig config;
};
std::string snapshot_line(const Snapshot& s, const std::string& spec_hash);
Snapshot parse_snapshot_line(const std::string& line, std::string* spec_hash = nullptr);
void write_snapshots(const std::filesystem::path& path, const std::vector<Snapshot>& snaps,
                     const std::string& spec_hash);
std::vector<Snapshot> read_snapshots(const std::filesystem::path& path, std::string* spec_hash = nullptr);

// results/*.csv: '#key=value' header lines (spec_hash first), one column header line, rows.
struct CsvTable {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(const std::vector<double>& values);
};
std::string format_number(double v);  // shortest round-trip representation
void write_csv(const std::filesystem::path& path, const CsvTable& t, const std::string& spec_hash);
CsvTable read_csv(const std::filesystem::path& path);

// Exit codes shared by the CLI and the acceptance runner.
enum ExitCode : int { kExitOk = 0, kExitTestFailure = 1, kExitRuntimeError = 2, kExitSpecError = 3 };

struct VerifyReport {
    bool ok = true;
    std::vector<std::string> problems;
    std::size_t files = 0;
};
// Re-hashes the spec recorded in manifest.json and checks every listed artifact: the embedded
// spec hash and the file digest.
VerifyReport verify_run(const std::filesystem::path& dir);

}  // namespace ocp
