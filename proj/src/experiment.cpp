#include "ocp/experiment.hpp"

#include <openssl/opensslv.h>

#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "ocp/dlr.hpp"
#include "ocp/electric.hpp"
#include "ocp/loctrans.hpp"
#include "ocp/observables.hpp"
#include "ocp/parallel.hpp"

#ifndef OCP_VERSION
#define OCP_VERSION "0.0.0"
#endif

namespace ocp {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// non-finite numbers become strings so every file stays strict JSON
json num(double v) {
    if (std::isfinite(v)) return v;
    return format_number(v);
}

json moment_json(const MomentEstimate& m) {
    return {{"mean", num(m.mean)},       {"se", num(m.se)},           {"count", m.count},
            {"log_exp", num(m.log_exp)}, {"band_lo", num(m.band_lo)}, {"band_hi", num(m.band_hi)},
            {"heavy_tail", m.heavy_tail}};
}

class Run {
public:
    Run(const ExperimentSpec& spec, const RunOptions& opt, fs::path dir)
        : spec_(spec), opt_(opt), dir_(std::move(dir)), hash_(spec.hash()) {}

    void log(const std::string& s) const {
        if (opt_.log) *opt_.log << s << '\n';
    }
    unsigned threads() const { return opt_.threads; }
    const ExperimentSpec& spec() const { return spec_; }
    std::uint64_t seed(SeedStream k) const { return derive_seed(spec_.seed, k); }

    void csv(const std::string& name, const CsvTable& t) {
        write_csv(dir_ / "results" / name, t, hash_);
        files_.push_back("results/" + name);
    }
    void result_json(const std::string& name, json j) {
        j["spec_hash"] = hash_;
        std::ofstream f(dir_ / "results" / name, std::ios::binary);
        f << j.dump(2) << '\n';
        if (!f) throw std::runtime_error("cannot write results/" + name);
        files_.push_back("results/" + name);
    }

    // chain samples, or the configurations of the spec's snapshots file
    const std::vector<PointConfig>& samples() {
        if (!samples_.empty() || !spec_.has("N")) return samples_;
        const ChainPlan& plan = spec_.plan;
        std::vector<Snapshot> snaps;
        if (spec_.has("snapshots")) {
            snaps = read_snapshots(spec_.text("snapshots"));
            for (const auto& s : snaps)
                if (s.config.size() != plan.N)
                    throw ConstraintError("snapshot of " + std::to_string(s.config.size()) +
                                              " points does not match N = " + std::to_string(plan.N),
                                          0, "snapshots");
            if (snaps.empty()) throw ConstraintError("snapshots file is empty", 0, "snapshots");
            log("reloaded " + std::to_string(snaps.size()) + " snapshots");
        } else {
            snaps.resize(plan.chains * plan.samples);
            std::vector<double> energy(snaps.size());
            log("sampling N=" + std::to_string(plan.N) + " beta=" + format_number(plan.beta) + " chains=" +
                std::to_string(plan.chains) + " samples=" + std::to_string(plan.samples));
            chains_ = run_chain(
                plan,
                [&](std::size_t c, std::size_t k, const ChainState& s) {
                    const std::size_t i = c * plan.samples + k;
                    snaps[i] = {c, k, s.config()};
                    energy[i] = s.cached_energy().total;
                },
                opt_.threads);
            energies_ = std::move(energy);
        }
        write_snapshots(dir_ / "snapshots.ndjson", snaps, hash_);
        files_.push_back("snapshots.ndjson");
        for (auto& s : snaps) samples_.push_back(std::move(s.config));
        snapshots_ = snaps.size();
        return samples_;
    }
    const std::vector<ChainSummary>& chains() const { return chains_; }
    const std::vector<double>& energies() const { return energies_; }

    std::vector<std::string> files() const { return files_; }

private:
    const ExperimentSpec& spec_;
    const RunOptions& opt_;
    fs::path dir_;
    std::string hash_;
    std::vector<std::string> files_;
    std::vector<PointConfig> samples_;
    std::vector<ChainSummary> chains_;
    std::vector<double> energies_;
    std::size_t snapshots_ = 0;
};

bool run_sample(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    const std::size_t N = s.plan.N;
    CsvTable chains{{}, {"chain", "acceptance", "proposal_scale", "max_energy_drift"}, {}};
    for (std::size_t c = 0; c < r.chains().size(); ++c) {
        const auto& ch = r.chains()[c];
        chains.add_row({double(c), ch.acceptance, ch.proposal_scale, ch.max_energy_drift});
    }
    r.csv("chains.csv", chains);

    const Window center = Window::disk({}, 1.0);
    CsvTable per{{{"N", std::to_string(N)}}, {"sample", "energy_per_particle", "pts_unit_disk"}, {}};
    std::vector<double> e, pts;
    for (std::size_t k = 0; k < X.size(); ++k) {
        const double ek = k < r.energies().size() ? r.energies()[k] : local_energy(X[k], Window::from(system_domain(N))).total;
        e.push_back(ek / double(N));
        pts.push_back(double(pts_count(X[k], center)));
        per.add_row({double(k), e.back(), pts.back()});
    }
    r.csv("samples.csv", per);
    const MomentEstimate me = series_moment(e), mp = series_moment(pts);
    r.result_json("sample.json", {{"N", N},
                                  {"beta", s.plan.beta},
                                  {"samples", X.size()},
                                  {"energy_per_particle", moment_json(me)},
                                  {"pts_unit_disk", moment_json(mp)}});
    return true;
}

bool run_dlr(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    DlrExperiment ex;
    ex.setup = MoveSetup::finite_volume(Window::disk({}, s.number("lambda_radius")), s.plan.N);
    ex.beta = s.plan.beta;
    ex.p = static_cast<int>(s.integer("p"));
    ex.delta = s.number("delta");
    ex.battery = default_dlr_battery(ex.setup.lambda);
    ex.inner.samples = static_cast<std::size_t>(s.integer("inner_samples"));
    ex.seed = r.seed(kStreamDlr);
    ex.threads = r.threads();
    r.log("dlr battery over " + std::to_string(X.size()) + " outer samples");
    const DlrReport rep = dlr_consistency_test(X, ex);
    const RateEstimate trunc = truncation_event_rate(X, ex.setup, ex.delta, ex.p,
                                                     static_cast<std::size_t>(s.integer("probes")),
                                                     r.seed(kStreamProbes));
    CsvTable t{{{"z_threshold", format_number(rep.z_threshold)}},
               {"observable", "outer_mean", "inner_mean", "se", "z", "pass"},
               {}};
    json rows = json::array();
    for (const auto& row : rep.rows) {
        t.rows.push_back({row.name, format_number(row.outer_mean), format_number(row.inner_mean),
                          format_number(row.se), format_number(row.z), row.pass ? "1" : "0"});
        rows.push_back({{"name", row.name},
                        {"outer_mean", num(row.outer_mean)},
                        {"inner_mean", num(row.inner_mean)},
                        {"se", num(row.se)},
                        {"z", num(row.z)},
                        {"pass", row.pass}});
    }
    r.csv("dlr.csv", t);
    r.result_json("dlr.json", {{"rows", rows},
                               {"z_threshold", rep.z_threshold},
                               {"outer", rep.outer},
                               {"min_acceptance", num(rep.min_acceptance)},
                               {"max_drift", num(rep.max_drift)},
                               {"inner_flagged", rep.inner_flagged},
                               {"truncation_event", {{"rate", num(trunc.rate)}, {"se", num(trunc.se)}, {"count", trunc.count}}},
                               {"pass", rep.pass()}});
    return rep.pass();
}

bool run_rigidity(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    const auto rows = rigidity_variance_scan(X, s.list("eps"), s.list("ell"), s.vec2("center"), s.plan.N);
    const double beta = s.plan.beta;
    CsvTable t{{}, {"eps", "ell", "variance", "se", "dirichlet", "gaussian_variance"}, {}};
    json js = json::array();
    for (const auto& row : rows) {
        // limiting variance for the weight exp(-beta F_N): int |grad phi|^2 / (2 pi beta)
        const double clt = beta > 0 ? row.dirichlet / (2.0 * std::numbers::pi * beta) : NAN;
        t.add_row({row.eps, row.ell, row.variance, row.se, row.dirichlet, clt});
        js.push_back({{"eps", row.eps},
                      {"ell", row.ell},
                      {"variance", num(row.variance)},
                      {"se", num(row.se)},
                      {"dirichlet", num(row.dirichlet)},
                      {"gaussian_variance", num(clt)}});
    }
    r.csv("rigidity.csv", t);
    r.result_json("rigidity.json", {{"rows", js}, {"samples", X.size()}});
    return true;
}

bool run_loctrans(Run& r) {
    const ExperimentSpec& s = r.spec();
    const Vec2 v = s.vec2("v");
    const int grid = static_cast<int>(s.integer("grid"));
    const int steps = static_cast<int>(s.integer("ode_steps"));
    const auto Ls = s.list("L");
    CsvTable t{{{"v", s.text("v")}},
               {"L", "grid", "psi0", "psi1", "psi2", "psi3", "rem0", "rem1", "rem2", "det_max_dev", "inverse_max",
                "plateau_max", "support_max"},
               {}};
    json constants = json::array();
    std::vector<TranslationReport> reps;
    for (double L : Ls) {
        r.log("verify_translation L=" + format_number(L));
        const TranslationReport rep = verify_translation(LocalizedTranslation(L, v, steps), grid, r.threads());
        reps.push_back(rep);
        t.add_row({L, double(grid), rep.psi[0], rep.psi[1], rep.psi[2], rep.psi[3], rep.rem[0], rep.rem[1],
                   rep.rem[2], rep.det_max_dev, rep.inverse_max, rep.plateau_max, rep.support_max});
        constants.push_back({{"L", L},
                             {"psi", {rep.psi[0], rep.psi[1], rep.psi[2], rep.psi[3]}},
                             {"rem", {rep.rem[0], rep.rem[1], rep.rem[2]}},
                             {"det_max_dev", rep.det_max_dev},
                             {"inverse_max", rep.inverse_max},
                             {"plateau_max", rep.plateau_max},
                             {"support_max", rep.support_max}});
    }
    r.csv("constants.csv", t);

    bool pass = true;
    double lo1 = INFINITY, hi1 = 0, lo0 = INFINITY, hi0 = 0;
    for (const auto& rep : reps) {
        pass = pass && rep.det_max_dev <= 1e-6 && rep.inverse_max <= 1e-7;
        lo1 = std::min(lo1, rep.psi[1]);
        hi1 = std::max(hi1, rep.psi[1]);
        lo0 = std::min(lo0, rep.rem[0]);
        hi0 = std::max(hi0, rep.rem[0]);
    }
    // scaled constants agree within 25% across L
    auto stable = [](double lo, double hi) { return hi - lo <= 0.25 * lo; };
    pass = pass && stable(lo1, hi1) && stable(lo0, hi0);
    json out = {{"constants", constants}, {"pass", pass}};

    if (s.has("N")) {
        const auto& X = r.samples();
        const std::size_t N = s.plan.N;
        const int p = static_cast<int>(s.integer("p"));
        CsvTable d{{}, {"L", "radius", "diff1_mean", "diff1_se", "diff2_mean", "diff2_se", "log_exp1", "log_exp1_lo",
                        "log_exp1_hi", "log_exp2", "log_exp2_lo", "log_exp2_hi"},
                   {}};
        json diffs = json::array();
        for (double L : Ls) {
            r.log("diff stats L=" + format_number(L));
            const LocalizedTranslation T(L, v, steps);
            try {
                const DiffStats st = diff_stats(X, T, N, s.plan.beta, p, r.seed(kStreamBootstrap), r.threads());
                const MomentEstimate m1 = moment(st.diff1), m2 = moment(st.diff2);
                d.add_row({L, st.radius, m1.mean, m1.se, m2.mean, m2.se, st.exp1.log_exp, st.exp1.band_lo,
                           st.exp1.band_hi, st.exp2.log_exp, st.exp2.band_lo, st.exp2.band_hi});
                diffs.push_back({{"L", L},
                                 {"radius", st.radius},
                                 {"diff1", moment_json(m1)},
                                 {"diff2", moment_json(m2)},
                                 {"exp1", moment_json(st.exp1)},
                                 {"exp2", moment_json(st.exp2)}});
            } catch (const CoverageError& e) {
                diffs.push_back({{"L", L}, {"skipped", e.what()}});
            }
        }
        r.csv("diff.csv", d);
        out["diff"] = diffs;

        json inv;
        try {
            const Window W = Window::disk({}, 1.0);
            const InvarianceReport rep = translation_invariance_test(X, N, {0, 0}, v, W, default_view_battery(W));
            json rows = json::array();
            for (const auto& row : rep.rows)
                rows.push_back({{"name", row.name},
                                {"mean_a", num(row.mean_a)},
                                {"mean_b", num(row.mean_b)},
                                {"z", num(row.z)},
                                {"ks_d", num(row.ks.d)},
                                {"ks_p", num(row.ks.p)},
                                {"pass", row.pass}});
            inv = {{"rows", rows}, {"z_threshold", rep.z_threshold}, {"ks_alpha", rep.ks_alpha}, {"pass", rep.pass()}};
        } catch (const std::exception& e) {
            inv = {{"skipped", e.what()}};
        }
        out["invariance"] = inv;
    }
    r.result_json("loctrans.json", out);
    return pass;
}

std::vector<Vec2> center_list(const std::vector<double>& v) {
    std::vector<Vec2> out;
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) out.push_back({v[i], v[i + 1]});
    return out;
}

bool run_locallaw(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    r.log("local law scan over " + std::to_string(X.size()) + " samples");
    const LocalLawScan scan = local_law_scan(X, s.plan.N, center_list(s.list("centers")), s.list("ell"),
                                             s.number("h"), s.number("margin"), r.threads());
    CsvTable t{{}, {"ell", "count", "mean", "se", "q10", "q50", "q90", "max_error"}, {}};
    json rows = json::array();
    for (const auto& row : scan.rows) {
        t.add_row({row.ell, double(row.count), row.mean, row.se, row.q10, row.q50, row.q90, row.max_error});
        rows.push_back({{"ell", row.ell}, {"count", row.count}, {"mean", num(row.mean)}, {"se", num(row.se)}});
    }
    r.csv("locallaw.csv", t);
    const bool pass = scan.spread <= 0.3;
    r.result_json("locallaw.json",
                  {{"rows", rows}, {"spread", num(scan.spread)}, {"growing", scan.growing}, {"pass", pass}});
    return pass;
}

bool run_movefn(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    const MoveSetup setup = MoveSetup::finite_volume(Window::disk({}, s.number("lambda_radius")), s.plan.N);
    const int p_max = static_cast<int>(s.integer("p_max"));
    const double tol = s.number("tol");
    const std::size_t pairs = static_cast<std::size_t>(s.integer("pairs"));
    std::vector<MoveEval> ev(pairs);
    r.log("move-function convergence over " + std::to_string(pairs) + " pairs");
    parallel_for(pairs, r.threads(), [&](std::size_t k) {
        const PointConfig& x = X[k % X.size()];
        Rng rng = make_rng(r.seed(kStreamMoveFn), k);
        const PointConfig xp = binomial_sample(setup.lambda, pts_count(x, setup.lambda), rng);
        ev[k] = convergence_diagnostic(xp, x, setup, p_max, tol);
    });
    CsvTable t{{{"p_max", std::to_string(p_max)}, {"tol", format_number(tol)}},
               {"pair", "p", "value", "increment"},
               {}};
    std::vector<double> mean_inc(p_max, 0.0);
    std::size_t converged = 0;
    for (std::size_t k = 0; k < pairs; ++k) {
        converged += ev[k].converged;
        for (int p = 0; p <= p_max; ++p) {
            const double inc = p < p_max ? ev[k].increment[p] : NAN;
            if (p < p_max) mean_inc[p] += inc / double(pairs);
            t.add_row({double(k), double(p), ev[k].value[p], inc});
        }
    }
    r.csv("movefn.csv", t);
    const double frac = double(converged) / double(pairs);
    bool decreasing = true;
    for (int p = 1; p < p_max; ++p) decreasing = decreasing && mean_inc[p] <= mean_inc[p - 1];
    json inc = json::array();
    for (double m : mean_inc) inc.push_back(num(m));
    const bool pass = frac >= 0.95 && decreasing;
    r.result_json("movefn.json", {{"pairs", pairs},
                                  {"converged_fraction", frac},
                                  {"mean_increment", inc},
                                  {"decreasing", decreasing},
                                  {"pass", pass}});
    return pass;
}

bool run_apriori(Run& r) {
    const auto& X = r.samples();
    const ExperimentSpec& s = r.spec();
    const std::size_t N = s.plan.N;
    const double rho = s.number("support_radius"), h = s.number("h");
    const double reach = system_radius(N) - rho - 1.0;
    if (reach <= 0)
        throw ConstraintError("support_radius + 1 exceeds the system radius " + format_number(system_radius(N)), 0,
                              "support_radius");
    const std::size_t pairs = static_cast<std::size_t>(s.integer("pairs"));
    std::vector<double> ratio(pairs), cx(pairs), cy(pairs), idx(pairs);
    r.log("a-priori ratios over " + std::to_string(pairs) + " pairs");
    parallel_for(pairs, r.threads(), [&](std::size_t k) {
        Rng rng = make_rng(r.seed(kStreamApriori), k);
        const Vec2 c = binomial_sample(Window::disk({}, reach), 1, rng)[0];
        const auto dict = lipschitz_dictionary(c, rho);
        const std::size_t j = std::uniform_int_distribution<std::size_t>(0, dict.size() - 1)(rng);
        cx[k] = c.x;
        cy[k] = c.y;
        idx[k] = double(j);
        ratio[k] = apriori_bound_check(X[k % X.size()], dict[j], Window::disk(c, rho + 1.0), N, h);
    });
    CsvTable t{{{"dictionary", kDictionaryVersion}}, {"pair", "dictionary_index", "cx", "cy", "ratio"}, {}};
    for (std::size_t k = 0; k < pairs; ++k) t.add_row({double(k), idx[k], cx[k], cy[k], ratio[k]});
    r.csv("apriori.csv", t);
    const MomentEstimate m = moment(ratio);
    r.result_json("apriori.json", {{"pairs", pairs},
                                   {"max_ratio", num(*std::max_element(ratio.begin(), ratio.end()))},
                                   {"mean_ratio", num(m.mean)},
                                   {"se", num(m.se)}});
    return true;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

std::string version_string() { return OCP_VERSION; }

RunOutcome run_experiment(const ExperimentSpec& spec, const RunOptions& opt) {
    RunOutcome out;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string hash = spec.hash();
    out.dir = !opt.out.empty()        ? opt.out
              : !spec.out_dir.empty() ? fs::path(spec.out_dir)
                                      : fs::path("run-" + std::string(kind_name(spec.kind)) + "-" + hash.substr(0, 12));
    try {
        fs::create_directories(out.dir / "results");
        Run run(spec, opt, out.dir);
        bool pass = true;
        switch (spec.kind) {
            case Kind::sample: pass = run_sample(run); break;
            case Kind::dlr: pass = run_dlr(run); break;
            case Kind::rigidity: pass = run_rigidity(run); break;
            case Kind::loctrans: pass = run_loctrans(run); break;
            case Kind::locallaw: pass = run_locallaw(run); break;
            case Kind::movefn: pass = run_movefn(run); break;
            case Kind::apriori: pass = run_apriori(run); break;
        }
        out.files = run.files();
        std::sort(out.files.begin(), out.files.end());
        out.code = pass ? kExitOk : kExitTestFailure;
        out.message = pass ? "ok" : "checks failed";
    } catch (const SpecError& e) {
        out.code = kExitSpecError;
        out.message = e.what();
    } catch (const std::exception& e) {
        out.code = kExitRuntimeError;
        out.message = e.what();
    }
    if (out.code == kExitSpecError || out.code == kExitRuntimeError) return out;

    json files = json::array();
    for (const auto& f : out.files) files.push_back({{"path", f}, {"sha256", file_sha256(out.dir / f)}});
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const json manifest = {
        {"spec_hash", hash},
        {"spec", spec.canonical()},
        {"kind", kind_name(spec.kind)},
        {"seed", spec.seed},
        {"versions",
         {{"ocp", OCP_VERSION},
          {"compiler", __VERSION__},
          {"boost", BOOST_LIB_VERSION},
          {"openssl", OPENSSL_VERSION_TEXT},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
          {"lipschitz_dictionary", kDictionaryVersion}}},
        {"created", utc_now()},
        {"wall_time_s", wall},
        {"threads", opt.threads},
        {"exit_code", out.code},
        {"files", files}};
    std::ofstream f(out.dir / "manifest.json", std::ios::binary);
    f << manifest.dump(2) << '\n';
    if (!f) {
        out.code = kExitRuntimeError;
        out.message = "cannot write manifest.json";
    }
    return out;
}

}  // namespace ocp
