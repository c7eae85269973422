#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "overlaymend/manifest.hpp"

namespace {

// --jobs beats OVERLAY_MEND_JOBS beats single-threaded.
std::size_t resolve_jobs(const std::optional<std::size_t>& flag) {
    if (flag) return *flag == 0 ? 1 : *flag;
    if (const char* env = std::getenv("OVERLAY_MEND_JOBS")) {
        try {
            const unsigned long v = std::stoul(env);
            if (v >= 1) return v;
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring OVERLAY_MEND_JOBS='" << env << "'\n";
        }
    }
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Seeded overlay churn simulator with optional self-repair"};
    std::string config_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<std::size_t> jobs_flag;
    std::optional<std::string> out_override;
    bool trace = false;

    app.add_option("--config", config_path, "Path to a key = value run manifest")
        ->required()
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed_override, "Override the manifest's base seed");
    app.add_option("--jobs", jobs_flag, "Worker threads (default OVERLAY_MEND_JOBS, then 1)");
    app.add_flag("--trace", trace, "Write per-run event traces");
    app.add_option("--out", out_override, "Override the manifest's output directory");
    CLI11_PARSE(app, argc, argv);

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot read " << config_path << "\n";
        return 2;
    }
    std::ostringstream text;
    text << in.rdbuf();

    overlaymend::RunManifest manifest;
    try {
        manifest = overlaymend::parse_manifest(text.str());
    } catch (const overlaymend::ConfigError& err) {
        std::cerr << "error: invalid config " << config_path << "\n";
        for (const auto& msg : err.messages) std::cerr << "  " << msg << "\n";
        return 2;
    }
    if (seed_override) manifest.config.seed = *seed_override;
    if (out_override) manifest.output_dir = *out_override;
    if (trace) manifest.trace = true;

    overlaymend::ExecutionReport report;
    try {
        report = overlaymend::execute(manifest, resolve_jobs(jobs_flag));
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }

    for (const auto& failure : report.failures) std::cerr << "run failed: " << failure << "\n";
    std::cout << "completed " << report.runs_completed << " run(s), wrote "
              << report.files_written.size() << " file(s) to " << manifest.output_dir << "\n";
    return report.ok() ? 0 : 1;
}
