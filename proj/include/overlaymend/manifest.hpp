#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "overlaymend/simulator.hpp"

namespace overlaymend {

enum class Mode : std::uint8_t { On, Off, Both };

const char* mode_name(Mode mode);
// Leg name used in output filenames: "on" or "off".
const char* leg_name(bool protocol_on);

// One batch invocation: a scenario, which protocol legs to run, and where
// output lands.
struct RunManifest {
    ScenarioConfig config;
    Mode mode{Mode::Both};
    std::string output_dir{"out"};
    std::optional<std::size_t> snapshot_every;
    bool trace{false};

    bool operator==(const RunManifest&) const = default;
};

// Carries every problem found in a config, one message per line-numbered
// issue; what() joins them with newlines.
struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> msgs);
    std::vector<std::string> messages;
};

// Flat "key = value" text, '#' starts a comment, one pair per line. Unknown
// keys, duplicates, missing required keys and out-of-range values are all
// collected and reported together. Defaults are resolved here, so the result
// is ready to execute.
RunManifest parse_manifest(const std::string& text);

// Canonical text form; parse_manifest(render_manifest(m)) == m.
std::string render_manifest(const RunManifest& manifest);

struct ExecutionReport {
    std::size_t runs_completed{0};
    std::size_t runs_failed{0};
    std::vector<std::string> failures;       // "<leg> seed <s>: <reason>"
    std::vector<std::string> files_written;  // in deterministic task order
    bool ok() const { return runs_failed == 0; }
};

// Runs every (leg, seed) pair, writes run_<mode>_<seed>.csv per run,
// agg_<mode>.csv per leg, plus optional snap_<mode>_<seed>_<step>.edges and
// trace_<mode>_<seed>.csv files. Runs are dispatched over at most `jobs`
// worker threads; outputs are identical for any job count.
ExecutionReport execute(const RunManifest& manifest, std::size_t jobs = 1);

}  // namespace overlaymend
