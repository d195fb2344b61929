#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "ocp/dlr.hpp"
#include "ocp/experiment.hpp"

using namespace ocp;
namespace fs = std::filesystem;

namespace {
const char* kMinimal = "kind = sample\nN = 64\nbeta = 2\nseed = 1\nsteps = 1e5\n";

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("ocp_test_io_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
    std::ofstream f(p, std::ios::binary);
    f << s;
}

template <class E>
E spec_error(const std::string& text) {
    try {
        parse_spec(text);
    } catch (const E& e) {
        return e;
    }
    FAIL("expected a spec error for:\n" << text);
    return E("", 0, "");
}

std::vector<Snapshot> uniform_snapshots(std::size_t N, std::size_t count, std::uint64_t seed) {
    std::vector<Snapshot> out;
    for (std::size_t k = 0; k < count; ++k) {
        Rng rng = make_rng(seed, k);
        out.push_back({0, k, binomial_sample(Window::from(system_domain(N)), N, rng)});
    }
    return out;
}
}  // namespace

TEST_CASE("minimal sample spec") {
    const ExperimentSpec s = parse_spec(kMinimal);
    CHECK(s.kind == Kind::sample);
    CHECK(s.plan.N == 64);
    CHECK(s.plan.beta == 2.0);
    CHECK(s.seed == 1);
    CHECK(s.plan.samples == 100000 / 64);
    CHECK(s.plan.seed == derive_seed(1, kStreamChain));
    CHECK(!s.has("samples"));
    CHECK(s.hash().size() == 64);

    // layout, comments, sections, key order and number spelling do not move the hash
    const ExperimentSpec t = parse_spec(
        "; reordered\n[chain]\nsteps=100000   # moves\n beta = 2.0\nN=64\n\n[experiment]\nseed = 1\nkind=sample\n");
    CHECK(t.canonical() == s.canonical());
    CHECK(t.hash() == s.hash());
    CHECK(parse_spec(std::string(kMinimal) + "burn_in = 0\n").hash() == s.hash());
    CHECK(parse_spec("kind = sample\nN = 64\nbeta = 2\nseed = 2\nsteps = 1e5\n").hash() != s.hash());

    ExperimentSpec u = s;
    override_seed(u, 9);
    CHECK(u.seed == 9);
    CHECK(u.plan.seed == derive_seed(9, kStreamChain));
    CHECK(u.hash() != s.hash());
}

TEST_CASE("spec diagnostics") {
    const auto c = spec_error<ConstraintError>("kind = sample\nN = 64\nbeta = -1\n");
    CHECK(c.line == 3);
    CHECK(c.field == "beta");
    CHECK(spec_error<CompletenessError>("kind = sample\nbeta = 2\n").field == "N");
    CHECK(spec_error<CompletenessError>("N = 4\nbeta = 2\n").field == "kind");
    CHECK(spec_error<CompletenessError>("kind = rigidity\nN = 64\nbeta = 2\nell = 1\n").field == "eps");
    CHECK(spec_error<CompletenessError>("kind = loctrans\nL = 8\nN = 64\n").field == "beta");
    const auto u = spec_error<UnknownKeyError>("kind = sample\nN = 64\nbeta = 2\ntemperature = 3\n");
    CHECK(u.line == 4);
    CHECK(u.field == "temperature");
    CHECK(spec_error<UnknownKeyError>("kind = sample\nN = 64\nbeta = 2\neps = 0.1\n").field == "eps");
    CHECK(spec_error<UnknownKeyError>("[physics]\nkind = sample\n").line == 1);
    CHECK(spec_error<TypeMismatchError>("kind = sample\nN = many\nbeta = 2\n").line == 2);
    CHECK(spec_error<TypeMismatchError>("kind = sample\nN = 6.5\nbeta = 2\n").field == "N");
    CHECK(spec_error<TypeMismatchError>("kind = sample\nN = -6\nbeta = 2\n").field == "N");
    CHECK(spec_error<TypeMismatchError>("kind = loctrans\nL = 8\nv = 1\n").field == "v");
    CHECK(spec_error<TypeMismatchError>("kind = bake\n").field == "kind");
    CHECK(spec_error<ConstraintError>("kind = loctrans\nL = 8\nv = 1, 1\n").field == "v");
    CHECK(spec_error<ConstraintError>("kind = locallaw\nN = 64\nbeta = 2\nell = 2, -4\n").field == "ell");
    CHECK(spec_error<ConstraintError>("kind = sample\nN = 64\nbeta = 2\nsamples = 5\nsteps = 100\n").line == 4);
    CHECK(spec_error<SpecSyntaxError>("kind = sample\nN 64\n").line == 2);
    CHECK(spec_error<SpecSyntaxError>("[chain\n").line == 1);
    CHECK(spec_error<SpecSyntaxError>("kind = sample\nN = 1\nN = 2\n").field == "N");

    const ExperimentSpec lt = parse_spec("kind = loctrans\nL = 8, 16, 32\nv = 0.6, 0.8\n");
    CHECK(lt.list("L") == std::vector<double>{8, 16, 32});
    CHECK(lt.vec2("v") == Vec2{0.6, 0.8});
    CHECK(!lt.has("N"));
    CHECK(lt.integer("grid") == 64);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("snapshot round trip") {
    const std::vector<Vec2> pts = {{1.0 / 3.0, -2.0 / 7.0},
                                   {1e-300, -0.0},
                                   {std::nextafter(1.0, 2.0), 12345.678901234567},
                                   {std::numeric_limits<double>::denorm_min(), -std::numeric_limits<double>::max()}};
    const Snapshot s{3, 17, PointConfig(pts)};
    std::string h;
    const Snapshot r = parse_snapshot_line(snapshot_line(s, "abc"), &h);
    CHECK(h == "abc");
    CHECK(r.chain == 3);
    CHECK(r.index == 17);
    REQUIRE(r.config.size() == pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(std::signbit(r.config[i].x) == std::signbit(pts[i].x));
        CHECK(r.config[i] == pts[i]);
    }

    const fs::path dir = scratch("snap");
    fs::create_directories(dir);
    const auto snaps = uniform_snapshots(64, 5, 7);
    write_snapshots(dir / "s.ndjson", snaps, "h1");
    std::string got;
    const auto back = read_snapshots(dir / "s.ndjson", &got);
    CHECK(got == "h1");
    REQUIRE(back.size() == snaps.size());
    for (std::size_t k = 0; k < snaps.size(); ++k) CHECK(back[k].config == snaps[k].config);

    spit(dir / "mixed.ndjson", snapshot_line(snaps[0], "h1") + "\n" + snapshot_line(snaps[1], "h2") + "\n");
    std::string mixed;
    CHECK_THROWS(read_snapshots(dir / "mixed.ndjson", &mixed));
    fs::remove_all(dir);
}

TEST_CASE("csv tables") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");

    const fs::path dir = scratch("csv");
    fs::create_directories(dir);
    CsvTable t{{{"grid", "64"}}, {"L", "value"}, {}};
    t.add_row({8, 2.5});
    t.add_row({16, 1.0 / 3.0});
    write_csv(dir / "t.csv", t, "deadbeef");
    const std::string text = slurp(dir / "t.csv");
    CHECK(text.rfind("#spec_hash=deadbeef\n#grid=64\nL,value\n8,2.5\n", 0) == 0);
    const CsvTable r = read_csv(dir / "t.csv");
    CHECK(r.meta.front() == std::pair<std::string, std::string>{"spec_hash", "deadbeef"});
    CHECK(r.columns == t.columns);
    CHECK(r.rows == t.rows);
    spit(dir / "bad.csv", "#spec_hash=x\na,b\n1\n");
    CHECK_THROWS(read_csv(dir / "bad.csv"));
    fs::remove_all(dir);
}

TEST_CASE("sample runs are reproducible and verifiable") {
    const ExperimentSpec spec = parse_spec("kind = sample\nN = 64\nbeta = 2\nseed = 4\nsamples = 40\nchains = 2\n");
    const fs::path a = scratch("run_a"), b = scratch("run_b");
    const RunOutcome ra = run_experiment(spec, {a, 1, nullptr});
    const RunOutcome rb = run_experiment(spec, {b, 2, nullptr});
    REQUIRE(ra.code == kExitOk);
    REQUIRE(rb.code == kExitOk);
    CHECK(ra.files == rb.files);
    CHECK(ra.files.size() == 4);
    for (const auto& f : ra.files) CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);

    std::string h;
    const auto snaps = read_snapshots(a / "snapshots.ndjson", &h);
    CHECK(h == spec.hash());
    CHECK(snaps.size() == 80);
    for (const auto& s : snaps) CHECK(s.config.size() == 64);

    const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
    CHECK(m["spec_hash"] == spec.hash());
    CHECK(m["exit_code"] == 0);
    CHECK(m.contains("wall_time_s"));
    CHECK(m["versions"]["ocp"] == version_string());
    CHECK(read_csv(a / "results/samples.csv").meta.front().second == spec.hash());

    VerifyReport v = verify_run(a);
    CHECK(v.ok);
    CHECK(v.files == 4);

    // edited hash header: both the digest and the embedded hash disagree
    std::string csv = slurp(a / "results/chains.csv");
    csv[12] = csv[12] == '0' ? '1' : '0';
    spit(a / "results/chains.csv", csv);
    v = verify_run(a);
    CHECK(!v.ok);
    CHECK(v.problems.size() == 2);

    // edited spec in the manifest
    std::string man = slurp(b / "manifest.json");
    man.replace(man.find("seed = 4"), 8, "seed = 5");
    spit(b / "manifest.json", man);
    v = verify_run(b);
    CHECK(!v.ok);
    CHECK(v.problems.front().find("spec hash mismatch") == 0);

    const fs::path empty = scratch("empty");
    fs::create_directories(empty);
    CHECK(!verify_run(empty).ok);
    CHECK(verify_run(empty).problems.front() == "manifest.json missing");
    for (const auto& d : {a, b, empty}) fs::remove_all(d);
}

TEST_CASE("dlr run exit codes") {
    const fs::path dir = scratch("dlr");
    fs::create_directories(dir);
    write_snapshots(dir / "uniform.ndjson", uniform_snapshots(64, 400, 3), "external");
    const std::string base = "kind = dlr\nN = 64\nlambda_radius = 1.5\ninner_samples = 32\nsnapshots = " +
                             (dir / "uniform.ndjson").string() + "\n";

    // uniform outer samples are the beta = 0 law: consistent
    const RunOutcome ok = run_experiment(parse_spec(base + "beta = 0\n"), {dir / "b0", 1, nullptr});
    CHECK_MESSAGE(ok.code == kExitOk, ok.message);
    CHECK(verify_run(dir / "b0").ok);

    // the same samples tested against the beta = 2 conditional law: the battery fails
    const RunOutcome bad = run_experiment(parse_spec(base + "beta = 2\n"), {dir / "b2", 1, nullptr});
    CHECK(bad.code == kExitTestFailure);
    const auto j = nlohmann::json::parse(slurp(dir / "b2/results/dlr.json"));
    CHECK(j["pass"] == false);
    CHECK(j["rows"].size() == 16);
    CHECK(verify_run(dir / "b2").ok);

    const RunOutcome mismatch =
        run_experiment(parse_spec("kind = dlr\nN = 32\nbeta = 2\nsnapshots = " + (dir / "uniform.ndjson").string()),
                       {dir / "m", 1, nullptr});
    CHECK(mismatch.code == kExitSpecError);
    const RunOutcome missing =
        run_experiment(parse_spec("kind = dlr\nN = 64\nbeta = 2\nsnapshots = " + (dir / "none.ndjson").string()),
                       {dir / "n", 1, nullptr});
    CHECK(missing.code == kExitRuntimeError);
    fs::remove_all(dir);
}

TEST_CASE("loctrans run without sampling") {
    const fs::path dir = scratch("lt");
    const RunOutcome r =
        run_experiment(parse_spec("kind = loctrans\nL = 4, 8\nv = 0.6, 0.8\ngrid = 16\n"), {dir, 1, nullptr});
    CHECK_MESSAGE(r.code == kExitOk, r.message);
    CHECK(r.files == std::vector<std::string>{"results/constants.csv", "results/loctrans.json"});
    CHECK(!fs::exists(dir / "snapshots.ndjson"));
    const CsvTable t = read_csv(dir / "results/constants.csv");
    CHECK(t.rows.size() == 2);
    CHECK(t.columns.at(9) == "det_max_dev");
    CHECK(verify_run(dir).ok);
    fs::remove_all(dir);
}
