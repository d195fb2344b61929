#include <iostream>

#include "CLI11.hpp"
#include "ocp/experiment.hpp"

namespace {

struct Args {
    std::string spec;
    std::string out;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

int run(const std::string& kind, const Args& a, const CLI::Option* seed_opt) {
    ocp::ExperimentSpec spec;
    try {
        spec = ocp::load_spec(a.spec);
        if (ocp::kind_name(spec.kind) != kind)
            throw ocp::ConstraintError("spec kind is " + std::string(ocp::kind_name(spec.kind)) +
                                           ", subcommand is " + kind,
                                       0, "kind");
        if (seed_opt->count()) ocp::override_seed(spec, a.seed);
    } catch (const ocp::SpecError& e) {
        std::cerr << "spec error: " << e.what() << '\n';
        return ocp::kExitSpecError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ocp::kExitRuntimeError;
    }
    ocp::RunOptions opt;
    opt.out = a.out;
    opt.threads = a.threads;
    opt.log = &std::cerr;
    const ocp::RunOutcome r = ocp::run_experiment(spec, opt);
    std::cout << ocp::kind_name(spec.kind) << ": " << r.message << " (" << r.dir.string() << ", spec " << spec.hash().substr(0, 12)
              << ")\n";
    return r.code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-dimensional one-component plasma lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", ocp::version_string());
    Args a;
    int code = ocp::kExitOk;
    for (const char* kind : {"sample", "dlr", "rigidity", "loctrans", "locallaw", "movefn", "apriori"}) {
        auto* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
        sub->add_option("--spec", a.spec, "experiment spec file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", a.out, "output directory");
        auto* seed = sub->add_option("--seed", a.seed, "master seed (overrides the spec)");
        sub->add_option("--threads", a.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->callback([&, kind, seed] { code = run(kind, a, seed); });
    }
    std::string dir;
    auto* verify = app.add_subcommand("verify", "re-hash a run directory and check every artifact");
    verify->add_option("dir", dir, "run directory")->required();
    verify->callback([&] {
        const ocp::VerifyReport rep = ocp::verify_run(dir);
        for (const auto& p : rep.problems) std::cout << "FAIL " << p << '\n';
        std::cout << (rep.ok ? "verified " : "rejected ") << rep.files << " files in " << dir << '\n';
        code = rep.ok ? ocp::kExitOk : ocp::kExitTestFailure;
    });
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? ocp::kExitSpecError : ocp::kExitOk;
    }
    return code;
}
