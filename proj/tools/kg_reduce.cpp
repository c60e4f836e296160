#include <CLI11.hpp>
#include <cstdio>
#include <exception>

#include "kgr/experiment.hpp"

// Exit codes: 0 all checks pass, 1 some check failed, 2 config error.

namespace {

int run_config(const std::string& path, const char* forcedMode) {
    try {
        kgr::ExperimentConfig cfg = kgr::load_config(path);
        if (forcedMode) cfg.mode = forcedMode;
        kgr::RunRecord rec = kgr::run(cfg);
        std::printf("record: %s\n", (rec.directory / "record.json").string().c_str());
        for (const auto& c : rec.checks)
            std::printf("  [%s] %-32s value=%.6g threshold=%.6g\n", c.pass ? "pass" : "FAIL",
                        c.name.c_str(), c.value, c.threshold);
        return rec.all_pass() ? 0 : 1;
    } catch (const kgr::ConfigInvalid& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kg-reduce: reducibility engine for the fast-driven Klein-Gordon system"};
    app.require_subcommand(1);

    std::string configPath, recordPath, metric;

    auto* runCmd = app.add_subcommand("run", "run the experiment described by a config file");
    runCmd->add_option("config", configPath, "config file")->required();

    auto* sweepCmd = app.add_subcommand("sweep", "run a parameter sweep config");
    sweepCmd->add_option("config", configPath, "config file")->required();

    auto* emitCmd = app.add_subcommand("emit", "emit plot data from a stored run record");
    emitCmd->add_option("record", recordPath, "record.json produced by run")->required();
    emitCmd->add_option("metric", metric, "metric name (eta-decay, eps-asymptotics)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (runCmd->parsed()) return run_config(configPath, nullptr);
    if (sweepCmd->parsed()) return run_config(configPath, "sweep");
    try {
        auto out = kgr::emit_plotdata(recordPath, metric);
        std::printf("%s\n", out.string().c_str());
        return 0;
    } catch (const kgr::UnknownMetric& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const kgr::ConfigInvalid& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
