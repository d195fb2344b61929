#include "ocp/io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "ocp/rng.hpp"

namespace ocp {

using json = nlohmann::json;

SpecError::SpecError(const std::string& what, int line_, std::string field_)
    : std::runtime_error(line_ > 0 ? "line " + std::to_string(line_) + ": " + what : what),
      line(line_),
      field(std::move(field_)) {}

namespace {

const std::vector<std::pair<Kind, const char*>> kKinds = {
    {Kind::sample, "sample"},     {Kind::dlr, "dlr"},       {Kind::rigidity, "rigidity"},
    {Kind::loctrans, "loctrans"}, {Kind::locallaw, "locallaw"}, {Kind::movefn, "movefn"},
    {Kind::apriori, "apriori"}};

enum class Type { kind, uinteger, integer, number, list, vec2, text };

struct Field {
    Type type;
    std::vector<Kind> kinds;     // empty: every kind
    std::vector<Kind> required;  // kinds that need it
    std::string fallback;        // default value, canonical; empty means none
    std::function<bool(const std::vector<double>&)> ok;
    const char* rule;
};

const std::vector<Kind> kSampled = {Kind::sample, Kind::dlr, Kind::rigidity, Kind::locallaw, Kind::movefn,
                                    Kind::apriori};

bool positive(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0; });
}
bool nonneg(const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x >= 0; });
}
bool any(const std::vector<double>&) { return true; }

const std::map<std::string, Field>& schema() {
    static const std::map<std::string, Field> s = {
        {"kind", {Type::kind, {}, {}, "", any, ""}},
        {"seed", {Type::uinteger, {}, {}, "1", any, ""}},
        {"out", {Type::text, {}, {}, "", any, ""}},
        {"snapshots", {Type::text, {}, {}, "", any, ""}},
        {"N", {Type::uinteger, {}, kSampled, "", positive, "must be >= 1"}},
        {"beta", {Type::number, {}, kSampled, "", nonneg, "must be >= 0"}},
        {"steps", {Type::number, {}, {}, "", [](const std::vector<double>& v) { return v[0] >= 1; }, "must be >= 1"}},
        {"burn_in", {Type::uinteger, {}, {}, "0", any, ""}},
        {"thinning", {Type::uinteger, {}, {}, "0", any, ""}},
        {"samples", {Type::uinteger, {}, {}, "100", positive, "must be >= 1"}},
        {"chains", {Type::uinteger, {}, {}, "1", positive, "must be >= 1"}},
        {"proposal_scale", {Type::number, {}, {}, "0.5", positive, "must be > 0"}},
        {"lambda_radius", {Type::number, {Kind::dlr, Kind::movefn}, {}, "1.5", positive, "must be > 0"}},
        {"p", {Type::integer, {Kind::dlr, Kind::loctrans}, {}, "6", nonneg, "must be >= 0"}},
        {"delta", {Type::number, {Kind::dlr}, {}, "0.1", positive, "must be > 0"}},
        {"inner_samples", {Type::uinteger, {Kind::dlr}, {}, "64", positive, "must be >= 1"}},
        {"probes", {Type::uinteger, {Kind::dlr}, {}, "8", positive, "must be >= 1"}},
        {"eps", {Type::list, {Kind::rigidity}, {Kind::rigidity}, "", positive, "entries must be > 0"}},
        {"ell", {Type::list, {Kind::rigidity, Kind::locallaw}, {Kind::rigidity, Kind::locallaw}, "", positive,
                 "entries must be > 0"}},
        {"center", {Type::vec2, {Kind::rigidity}, {}, "0,0", any, ""}},
        {"L", {Type::list, {Kind::loctrans}, {Kind::loctrans}, "", positive, "entries must be > 0"}},
        {"v", {Type::vec2, {Kind::loctrans}, {}, "1,0",
               [](const std::vector<double>& v) { return std::hypot(v[0], v[1]) <= 1.0; }, "must have norm <= 1"}},
        {"grid", {Type::uinteger, {Kind::loctrans}, {}, "64", [](const std::vector<double>& v) { return v[0] >= 2; },
                  "must be >= 2"}},
        {"ode_steps", {Type::uinteger, {Kind::loctrans}, {}, "64", positive, "must be >= 1"}},
        {"centers", {Type::list, {Kind::locallaw}, {}, "0,0",
                     [](const std::vector<double>& v) { return v.size() % 2 == 0; }, "needs x,y pairs"}},
        {"h", {Type::number, {Kind::locallaw, Kind::apriori}, {}, "0.125",
               [](const std::vector<double>& v) { return v[0] > 0 && v[0] <= 0.25; }, "must lie in (0, 0.25]"}},
        {"margin", {Type::number, {Kind::locallaw}, {}, "1", nonneg, "must be >= 0"}},
        {"p_max", {Type::integer, {Kind::movefn}, {}, "8", [](const std::vector<double>& v) { return v[0] >= 3; },
                   "must be >= 3"}},
        {"pairs", {Type::uinteger, {Kind::movefn, Kind::apriori}, {}, "100", positive, "must be >= 1"}},
        {"tol", {Type::number, {Kind::movefn}, {}, "0.001", positive, "must be > 0"}},
        {"support_radius", {Type::number, {Kind::apriori}, {}, "2", positive, "must be > 0"}},
    };
    return s;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_double(const std::string& s, double& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    auto r = std::from_chars(b, e, out);
    return r.ec == std::errc() && r.ptr == e && std::isfinite(out);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

// parse a raw value into numbers per its type; returns the canonical text
std::string canonicalize(const std::string& key, const Field& f, const std::string& raw, int line,
                         std::vector<double>& nums) {
    auto mismatch = [&](const char* want) {
        return TypeMismatchError(key + ": expected " + want + ", got '" + raw + "'", line, key);
    };
    nums.clear();
    switch (f.type) {
        case Type::kind:
            try {
                return kind_name(parse_kind(raw));
            } catch (const std::invalid_argument&) {
                throw mismatch("one of sample|dlr|rigidity|loctrans|locallaw|movefn|apriori");
            }
        case Type::text:
            if (raw.empty()) throw mismatch("a non-empty string");
            return raw;
        case Type::uinteger:
        case Type::integer: {
            double v;
            if (!parse_double(raw, v) || v != std::floor(v) || std::abs(v) > 9.0e15)
                throw mismatch(f.type == Type::uinteger ? "a non-negative integer" : "an integer");
            if (f.type == Type::uinteger && v < 0) throw mismatch("a non-negative integer");
            nums.push_back(v);
            return std::to_string(static_cast<std::int64_t>(v));
        }
        case Type::number: {
            double v;
            if (!parse_double(raw, v)) throw mismatch("a number");
            nums.push_back(v);
            return format_number(v);
        }
        case Type::list:
        case Type::vec2: {
            std::string c;
            for (const auto& part : split(raw, ',')) {
                double v;
                if (!parse_double(part, v)) throw mismatch(f.type == Type::vec2 ? "x,y" : "a comma-separated list");
                nums.push_back(v);
                c += (c.empty() ? "" : ",") + format_number(v);
            }
            if (nums.empty() || (f.type == Type::vec2 && nums.size() != 2))
                throw mismatch(f.type == Type::vec2 ? "x,y" : "a comma-separated list");
            return c;
        }
    }
    return raw;
}

bool applies(const Field& f, Kind k) {
    return f.kinds.empty() || std::find(f.kinds.begin(), f.kinds.end(), k) != f.kinds.end();
}

}  // namespace

const char* kind_name(Kind k) {
    for (const auto& [kk, n] : kKinds)
        if (kk == k) return n;
    return "?";
}

Kind parse_kind(const std::string& s) {
    for (const auto& [k, n] : kKinds)
        if (s == n) return k;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

double ExperimentSpec::number(const std::string& key) const {
    double v;
    if (!has(key) || !parse_double(values.at(key), v)) throw std::out_of_range("spec has no numeric " + key);
    return v;
}

std::int64_t ExperimentSpec::integer(const std::string& key) const { return static_cast<std::int64_t>(number(key)); }

std::vector<double> ExperimentSpec::list(const std::string& key) const {
    if (!has(key)) throw std::out_of_range("spec has no " + key);
    std::vector<double> out;
    for (const auto& part : split(values.at(key), ',')) {
        double v;
        parse_double(part, v);
        out.push_back(v);
    }
    return out;
}

Vec2 ExperimentSpec::vec2(const std::string& key) const {
    const auto v = list(key);
    return {v.at(0), v.at(1)};
}

std::string ExperimentSpec::text(const std::string& key) const {
    if (!has(key)) throw std::out_of_range("spec has no " + key);
    return values.at(key);
}

std::string ExperimentSpec::canonical() const {
    std::string s;
    for (const auto& [k, v] : values) s += k + " = " + v + "\n";
    return s;
}

std::string ExperimentSpec::hash() const { return sha256_hex(canonical()); }

ExperimentSpec parse_spec(const std::string& text) {
    static const std::vector<std::string> kSections = {"experiment", "chain", "dlr", "rigidity", "loctrans",
                                                       "locallaw", "movefn", "apriori"};
    struct Raw {
        std::string value;
        int line;
    };
    std::map<std::string, Raw> raw;
    std::istringstream in(text);
    std::string line;
    int no = 0;
    while (std::getline(in, line)) {
        ++no;
        const auto cut = line.find_first_of("#;");
        const std::string t = trim(cut == std::string::npos ? line : line.substr(0, cut));
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw SpecSyntaxError("unterminated section header", no, "");
            const std::string sec = trim(t.substr(1, t.size() - 2));
            if (std::find(kSections.begin(), kSections.end(), sec) == kSections.end())
                throw UnknownKeyError("unknown section [" + sec + "]", no, sec);
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw SpecSyntaxError("expected key = value", no, "");
        const std::string key = trim(t.substr(0, eq)), value = trim(t.substr(eq + 1));
        if (key.empty()) throw SpecSyntaxError("empty key", no, "");
        if (!schema().count(key)) throw UnknownKeyError("unknown key '" + key + "'", no, key);
        if (raw.count(key)) throw SpecSyntaxError("duplicate key '" + key + "'", no, key);
        raw[key] = {value, no};
    }
    if (!raw.count("kind")) throw CompletenessError("missing required key 'kind'", 0, "kind");
    std::vector<double> nums;
    ExperimentSpec spec;
    spec.kind = parse_kind(canonicalize("kind", schema().at("kind"), raw["kind"].value, raw["kind"].line, nums));

    for (const auto& [key, r] : raw) {
        const Field& f = schema().at(key);
        if (!applies(f, spec.kind))
            throw UnknownKeyError("key '" + key + "' is not used by kind " + kind_name(spec.kind), r.line, key);
        const std::string c = canonicalize(key, f, r.value, r.line, nums);
        if (!nums.empty() && !f.ok(nums)) throw ConstraintError(key + " " + f.rule, r.line, key);
        spec.values[key] = c;
    }
    if (raw.count("steps") && raw.count("samples"))
        throw ConstraintError("give either steps or samples, not both", raw["samples"].line, "samples");
    for (const auto& [key, f] : schema()) {
        if (spec.values.count(key) || !applies(f, spec.kind)) continue;
        if (key == "samples" && spec.values.count("steps")) continue;
        if (std::find(f.required.begin(), f.required.end(), spec.kind) != f.required.end())
            throw CompletenessError(std::string("kind ") + kind_name(spec.kind) + " needs '" + key + "'", 0, key);
        if (!f.fallback.empty()) spec.values[key] = f.fallback;
    }
    // optional sampling for loctrans comes as a pair
    if (spec.has("N") != spec.has("beta"))
        throw CompletenessError("N and beta must be given together", 0, spec.has("N") ? "beta" : "N");

    spec.seed = static_cast<std::uint64_t>(spec.integer("seed"));
    if (spec.has("out")) spec.out_dir = spec.text("out");
    ChainPlan& p = spec.plan;
    if (spec.has("N")) {
        p.N = static_cast<std::size_t>(spec.integer("N"));
        p.beta = spec.number("beta");
    }
    p.seed = derive_seed(spec.seed, 0);
    p.burn_in = static_cast<std::size_t>(spec.integer("burn_in"));
    p.thinning = static_cast<std::size_t>(spec.integer("thinning"));
    if (spec.has("samples")) p.samples = static_cast<std::size_t>(spec.integer("samples"));
    p.chains = static_cast<std::size_t>(spec.integer("chains"));
    p.proposal_scale = spec.number("proposal_scale");
    if (spec.has("steps"))
        p.samples = std::max<std::size_t>(1, static_cast<std::size_t>(spec.number("steps")) / p.thinning_steps());
    try {
        if (spec.has("N")) p.validate();
    } catch (const std::invalid_argument& e) {
        throw ConstraintError(e.what(), 0, "N");
    }
    return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read spec " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_spec(ss.str());
}

void override_seed(ExperimentSpec& spec, std::uint64_t seed) {
    spec.seed = seed;
    spec.values["seed"] = std::to_string(seed);
    spec.plan.seed = derive_seed(seed, 0);
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

std::string file_sha256(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return sha256_hex(ss.str());
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string snapshot_line(const Snapshot& s, const std::string& spec_hash) {
    json pts = json::array();
    for (const auto& p : s.config) pts.push_back({p.x, p.y});
    json j = {{"spec_hash", spec_hash}, {"chain", s.chain}, {"index", s.index}, {"n", s.config.size()},
              {"points", pts}};
    return j.dump();
}

Snapshot parse_snapshot_line(const std::string& line, std::string* spec_hash) {
    const json j = json::parse(line);
    Snapshot s;
    s.chain = j.at("chain").get<std::size_t>();
    s.index = j.at("index").get<std::size_t>();
    std::vector<Vec2> pts;
    for (const auto& p : j.at("points")) pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (pts.size() != j.at("n").get<std::size_t>()) throw std::runtime_error("snapshot: point count mismatch");
    s.config = PointConfig(std::move(pts));
    if (spec_hash) *spec_hash = j.at("spec_hash").get<std::string>();
    return s;
}

void write_snapshots(const std::filesystem::path& path, const std::vector<Snapshot>& snaps,
                     const std::string& spec_hash) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    for (const auto& s : snaps) f << snapshot_line(s, spec_hash) << '\n';
}

std::vector<Snapshot> read_snapshots(const std::filesystem::path& path, std::string* spec_hash) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    std::vector<Snapshot> out;
    std::string line, h;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        out.push_back(parse_snapshot_line(line, &h));
        if (spec_hash) {
            if (!spec_hash->empty() && *spec_hash != h) throw std::runtime_error("snapshot: mixed spec hashes");
            *spec_hash = h;
        }
    }
    return out;
}

void CsvTable::add_row(const std::vector<double>& values) {
    std::vector<std::string> r;
    for (double v : values) r.push_back(format_number(v));
    rows.push_back(std::move(r));
}

void write_csv(const std::filesystem::path& path, const CsvTable& t, const std::string& spec_hash) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "#spec_hash=" << spec_hash << '\n';
    for (const auto& [k, v] : t.meta) f << '#' << k << '=' << v << '\n';
    for (std::size_t i = 0; i < t.columns.size(); ++i) f << (i ? "," : "") << t.columns[i];
    f << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) f << (i ? "," : "") << r[i];
        f << '\n';
    }
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path.string());
    CsvTable t;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw std::runtime_error("csv: malformed header line");
            t.meta.emplace_back(line.substr(1, eq - 1), line.substr(eq + 1));
        } else if (t.columns.empty()) {
            t.columns = split(line, ',');
        } else {
            t.rows.push_back(split(line, ','));
            if (t.rows.back().size() != t.columns.size()) throw std::runtime_error("csv: ragged row");
        }
    }
    return t;
}

VerifyReport verify_run(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    VerifyReport rep;
    auto fail = [&](const std::string& s) {
        rep.ok = false;
        rep.problems.push_back(s);
    };
    json m;
    try {
        std::ifstream f(dir / "manifest.json");
        if (!f) {
            fail("manifest.json missing");
            return rep;
        }
        m = json::parse(f);
    } catch (const std::exception& e) {
        fail(std::string("manifest.json unreadable: ") + e.what());
        return rep;
    }
    const std::string recorded = m.value("spec_hash", "");
    const std::string spec_text = m.value("spec", "");
    std::string rehash;
    try {
        rehash = parse_spec(spec_text).hash();
    } catch (const std::exception& e) {
        fail(std::string("recorded spec does not parse: ") + e.what());
    }
    if (rehash != recorded) fail("spec hash mismatch: recorded " + recorded + ", recomputed " + rehash);
    for (const auto& entry : m.value("files", json::array())) {
        const std::string rel = entry.at("path").get<std::string>();
        const fs::path p = dir / rel;
        ++rep.files;
        if (!fs::exists(p)) {
            fail(rel + ": missing");
            continue;
        }
        if (file_sha256(p) != entry.at("sha256").get<std::string>()) fail(rel + ": digest mismatch");
        std::string embedded;
        try {
            if (p.extension() == ".csv") {
                for (const auto& [k, v] : read_csv(p).meta)
                    if (k == "spec_hash") embedded = v;
            } else if (p.extension() == ".json") {
                std::ifstream f(p);
                embedded = json::parse(f).value("spec_hash", "");
            } else if (p.extension() == ".ndjson") {
                read_snapshots(p, &embedded);
            }
        } catch (const std::exception& e) {
            fail(rel + ": unreadable: " + e.what());
            continue;
        }
        if (embedded != recorded) fail(rel + ": embedded spec hash differs");
    }
    return rep;
}

}  // namespace ocp
