#include "overlaymend/manifest.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace overlaymend {

const char* mode_name(Mode mode) {
    switch (mode) {
        case Mode::On: return "on";
        case Mode::Off: return "off";
        case Mode::Both: return "both";
    }
    return "unknown";
}

const char* leg_name(bool protocol_on) { return protocol_on ? "on" : "off"; }

ConfigError::ConfigError(std::vector<std::string> msgs)
    : std::runtime_error([&msgs] {
          std::string joined;
          for (const auto& m : msgs) {
              if (!joined.empty()) joined += "\n";
              joined += m;
          }
          return joined;
      }()),
      messages(std::move(msgs)) {}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

struct Entry {
    std::string value;
    std::size_t line{};
};

// Errors keep their source line so the report reads in file order; checks
// that cannot point at a line (missing keys, cross-field rules) sort last.
class ErrorList {
public:
    void at_line(std::size_t line, std::string msg) { items_.emplace_back(line, std::move(msg)); }
    void general(std::string msg) { items_.emplace_back(SIZE_MAX, std::move(msg)); }
    bool empty() const { return items_.empty(); }

    [[noreturn]] void raise() {
        std::stable_sort(items_.begin(), items_.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        std::vector<std::string> msgs;
        msgs.reserve(items_.size());
        for (auto& [line, msg] : items_) msgs.push_back(std::move(msg));
        throw ConfigError(std::move(msgs));
    }

private:
    std::vector<std::pair<std::size_t, std::string>> items_;
};

class KeyReader {
public:
    KeyReader(std::map<std::string, Entry> entries, ErrorList& errors)
        : entries_(std::move(entries)), errors_(errors) {}

    std::optional<Entry> take(const std::string& key) {
        auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        saw_.insert(key);
        Entry e = std::move(it->second);
        entries_.erase(it);
        return e;
    }

    // Rejects a key that is recognised but meaningless in this context.
    void forbid(const std::string& key, const std::string& why) {
        if (auto e = take(key)) {
            errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                         "' " + why);
        }
    }

    std::optional<std::uint64_t> take_u64(const std::string& key, std::uint64_t lo,
                                          std::uint64_t hi) {
        auto e = take(key);
        if (!e) return std::nullopt;
        std::uint64_t out{};
        const char* first = e->value.data();
        const char* last = first + e->value.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc{} || ptr != last) {
            errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                         "' expects an unsigned integer, got '" + e->value + "'");
            return std::nullopt;
        }
        if (out < lo || out > hi) {
            errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                         "' must be in [" + std::to_string(lo) + ", " +
                                         std::to_string(hi) + "], got '" + e->value + "'");
            return std::nullopt;
        }
        return out;
    }

    std::optional<double> take_double(const std::string& key, double lo, double hi) {
        auto e = take(key);
        if (!e) return std::nullopt;
        double out{};
        const char* first = e->value.data();
        const char* last = first + e->value.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc{} || ptr != last) {
            errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                         "' expects a number, got '" + e->value + "'");
            return std::nullopt;
        }
        if (out < lo || out > hi) {
            std::ostringstream range;
            range << "[" << lo << ", " << hi << "]";
            errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                         "' must be in " + range.str() + ", got '" + e->value +
                                         "'");
            return std::nullopt;
        }
        return out;
    }

    std::optional<bool> take_bool(const std::string& key) {
        auto e = take(key);
        if (!e) return std::nullopt;
        if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
        if (e->value == "false" || e->value == "0" || e->value == "no") return false;
        errors_.at_line(e->line, "line " + std::to_string(e->line) + ": key '" + key +
                                     "' expects true or false, got '" + e->value + "'");
        return std::nullopt;
    }

    // A key that was present but malformed already has a line error; only a
    // truly absent key is reported as missing.
    void require(const std::string& key, bool got) {
        if (!got && !saw_.count(key)) errors_.general("missing required key '" + key + "'");
    }

    void report_unknown() {
        for (const auto& [key, e] : entries_) {
            errors_.at_line(e.line,
                            "line " + std::to_string(e.line) + ": unknown key '" + key + "'");
        }
    }

private:
    std::map<std::string, Entry> entries_;
    std::set<std::string> saw_;
    ErrorList& errors_;
};

std::string render_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

RunManifest parse_manifest(const std::string& text) {
    ErrorList errors;
    std::map<std::string, Entry> entries;
    {
        std::istringstream in(text);
        std::string raw;
        std::size_t line_no = 0;
        while (std::getline(in, raw)) {
            ++line_no;
            if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
            const std::string line = trim(raw);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                errors.at_line(line_no, "line " + std::to_string(line_no) +
                                            ": expected 'key = value', got '" + line + "'");
                continue;
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty() || value.empty()) {
                errors.at_line(line_no, "line " + std::to_string(line_no) +
                                            ": empty key or value in '" + line + "'");
                continue;
            }
            if (auto it = entries.find(key); it != entries.end()) {
                errors.at_line(line_no, "line " + std::to_string(line_no) + ": duplicate key '" +
                                            key + "' (first set on line " +
                                            std::to_string(it->second.line) + ")");
                continue;
            }
            entries.emplace(key, Entry{value, line_no});
        }
    }

    KeyReader keys(std::move(entries), errors);
    RunManifest m;
    ScenarioConfig& cfg = m.config;

    bool family_known = false;
    if (auto e = keys.take("topology")) {
        family_known = true;
        if (e->value == "uniform") {
            cfg.topology.family = TopologyKind::Family::Uniform;
        } else if (e->value == "clustered") {
            cfg.topology.family = TopologyKind::Family::Clustered;
        } else if (e->value == "random") {
            cfg.topology.family = TopologyKind::Family::Random;
        } else {
            family_known = false;
            errors.at_line(e->line, "line " + std::to_string(e->line) +
                                        ": key 'topology' expects uniform, clustered or random, "
                                        "got '" +
                                        e->value + "'");
        }
    } else {
        errors.general("missing required key 'topology'");
    }

    if (auto v = keys.take_u64("N", 1, 1u << 24)) cfg.num_nodes = static_cast<std::size_t>(*v);
    else keys.require("N", false);

    const auto degree = keys.take_u64("degree", 1, 1u << 24);
    const auto clusters = keys.take_u64("clusters", 2, 1u << 24);
    const auto gamma = keys.take_double("gamma", 0.0, 1.0);
    const auto omega = keys.take_double("omega", 0.0, 1.0);
    const auto edge_prob = keys.take_double("p", 0.0, 1.0);

    if (family_known) {
        switch (cfg.topology.family) {
            case TopologyKind::Family::Uniform:
                if (degree) cfg.topology.degree = static_cast<std::size_t>(*degree);
                else keys.require("degree", false);
                if (clusters || gamma || omega || edge_prob) {
                    errors.general(
                        "keys 'clusters', 'gamma', 'omega' and 'p' do not apply to topology "
                        "'uniform'");
                }
                break;
            case TopologyKind::Family::Clustered:
                if (clusters) cfg.topology.clusters = static_cast<std::size_t>(*clusters);
                else keys.require("clusters", false);
                if (gamma) cfg.topology.intra_prob = *gamma;
                else keys.require("gamma", false);
                if (omega) cfg.topology.inter_prob = *omega;
                else keys.require("omega", false);
                if (degree || edge_prob) {
                    errors.general("keys 'degree' and 'p' do not apply to topology 'clustered'");
                }
                break;
            case TopologyKind::Family::Random:
                if (edge_prob) cfg.topology.edge_prob = *edge_prob;
                else keys.require("p", false);
                if (degree || clusters || gamma || omega) {
                    errors.general(
                        "keys 'degree', 'clusters', 'gamma' and 'omega' do not apply to topology "
                        "'random'");
                }
                break;
        }
    }

    bool scenario_known = false;
    if (auto e = keys.take("scenario")) {
        scenario_known = true;
        if (e->value == "stable") {
            cfg.scenario = Scenario::StableChurn;
        } else if (e->value == "progressive") {
            cfg.scenario = Scenario::ProgressiveFailure;
        } else {
            scenario_known = false;
            errors.at_line(e->line, "line " + std::to_string(e->line) +
                                        ": key 'scenario' expects stable or progressive, got '" +
                                        e->value + "'");
        }
    } else {
        errors.general("missing required key 'scenario'");
    }

    if (auto v = keys.take_u64("steps", 1, 1u << 30)) cfg.steps = static_cast<std::size_t>(*v);
    if (auto v = keys.take_u64("transient", 0, 1u << 30)) {
        cfg.transient_steps = static_cast<std::size_t>(*v);
    }
    if (auto v = keys.take_u64("seed", 0, UINT64_MAX)) cfg.seed = *v;
    else keys.require("seed", false);
    if (auto v = keys.take_u64("runs", 1, 100000)) cfg.runs = static_cast<std::size_t>(*v);
    else keys.require("runs", false);

    // Forced failures default to a small warm-up burst only for clustered
    // scenarios; everything else starts from the pristine bootstrap.
    cfg.initial_forced_failures =
        (family_known && cfg.topology.family == TopologyKind::Family::Clustered) ? 5 : 0;
    if (auto v = keys.take_u64("forced_failures", 0, 1u << 24)) {
        cfg.initial_forced_failures = static_cast<std::size_t>(*v);
    }

    cfg.protocol.threshold_degree = 0;
    if (auto e = keys.take("threshold")) {
        if (e->value == "auto") {
            cfg.protocol.threshold_degree = 0;
        } else {
            std::uint64_t out{};
            const char* first = e->value.data();
            const char* last = first + e->value.size();
            auto [ptr, ec] = std::from_chars(first, last, out);
            if (ec != std::errc{} || ptr != last || out < 1) {
                errors.at_line(e->line, "line " + std::to_string(e->line) +
                                            ": key 'threshold' expects auto or an integer >= 1, "
                                            "got '" +
                                            e->value + "'");
            } else {
                cfg.protocol.threshold_degree = static_cast<std::size_t>(out);
            }
        }
    }
    if (auto v = keys.take_double("wait_min", 0.0, 1e9)) cfg.protocol.wait_min = *v;
    if (auto v = keys.take_double("wait_max", 0.0, 1e9)) cfg.protocol.wait_max = *v;
    if (auto v = keys.take_u64("livelock_cap", 1, UINT64_MAX)) {
        cfg.livelock_cap = static_cast<std::size_t>(*v);
    }

    if (auto e = keys.take("mode")) {
        if (e->value == "on") m.mode = Mode::On;
        else if (e->value == "off") m.mode = Mode::Off;
        else if (e->value == "both") m.mode = Mode::Both;
        else {
            errors.at_line(e->line, "line " + std::to_string(e->line) +
                                        ": key 'mode' expects on, off or both, got '" + e->value +
                                        "'");
        }
    } else {
        errors.general("missing required key 'mode'");
    }

    if (auto e = keys.take("out")) m.output_dir = e->value;
    if (auto v = keys.take_bool("trace")) m.trace = *v;
    if (auto v = keys.take_u64("snapshot_every", 1, 1u << 30)) {
        m.snapshot_every = static_cast<std::size_t>(*v);
    }

    keys.report_unknown();

    if (errors.empty() && scenario_known && family_known) {
        try {
            cfg.validate();
        } catch (const std::invalid_argument& ex) {
            errors.general(std::string("config: ") + ex.what());
        }
    }
    if (!errors.empty()) errors.raise();
    return m;
}

std::string render_manifest(const RunManifest& manifest) {
    const ScenarioConfig& cfg = manifest.config;
    std::ostringstream out;
    switch (cfg.topology.family) {
        case TopologyKind::Family::Uniform:
            out << "topology = uniform\n";
            out << "degree = " << cfg.topology.degree << "\n";
            break;
        case TopologyKind::Family::Clustered:
            out << "topology = clustered\n";
            out << "clusters = " << cfg.topology.clusters << "\n";
            out << "gamma = " << render_double(cfg.topology.intra_prob) << "\n";
            out << "omega = " << render_double(cfg.topology.inter_prob) << "\n";
            break;
        case TopologyKind::Family::Random:
            out << "topology = random\n";
            out << "p = " << render_double(cfg.topology.edge_prob) << "\n";
            break;
    }
    out << "N = " << cfg.num_nodes << "\n";
    out << "scenario = "
        << (cfg.scenario == Scenario::StableChurn ? "stable" : "progressive") << "\n";
    out << "steps = " << cfg.steps << "\n";
    out << "transient = " << cfg.transient_steps << "\n";
    out << "forced_failures = " << cfg.initial_forced_failures << "\n";
    if (cfg.protocol.threshold_degree == 0) {
        out << "threshold = auto\n";
    } else {
        out << "threshold = " << cfg.protocol.threshold_degree << "\n";
    }
    out << "wait_min = " << render_double(cfg.protocol.wait_min) << "\n";
    out << "wait_max = " << render_double(cfg.protocol.wait_max) << "\n";
    out << "livelock_cap = " << cfg.livelock_cap << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "runs = " << cfg.runs << "\n";
    out << "mode = " << mode_name(manifest.mode) << "\n";
    out << "out = " << manifest.output_dir << "\n";
    out << "trace = " << (manifest.trace ? "true" : "false") << "\n";
    if (manifest.snapshot_every) out << "snapshot_every = " << *manifest.snapshot_every << "\n";
    return out.str();
}

namespace {

struct RunTask {
    bool protocol_on{};
    std::size_t run_index{};
    std::uint64_t run_seed{};
};

struct TaskOutcome {
    std::vector<MetricsRecord> records;
    std::vector<std::string> files;
    std::string failure;  // empty on success
    bool completed{false};
};

TaskOutcome run_one(const RunManifest& manifest, const RunTask& task) {
    namespace fs = std::filesystem;
    TaskOutcome outcome;
    const std::string leg = leg_name(task.protocol_on);
    const std::string seed_str = std::to_string(task.run_seed);
    try {
        Simulator sim(manifest.config, task.protocol_on, task.run_seed);
        std::ofstream trace_file;
        if (manifest.trace) {
            const fs::path path =
                fs::path(manifest.output_dir) / ("trace_" + leg + "_" + seed_str + ".csv");
            trace_file.open(path);
            if (!trace_file) throw std::runtime_error("cannot open " + path.string());
            outcome.files.push_back(path.string());
            sim.set_trace(&trace_file);
        }
        StepHooks hooks;
        if (manifest.snapshot_every) {
            hooks.on_sample = [&](const Simulator& s, std::size_t step) {
                if (step % *manifest.snapshot_every != 0) return;
                const fs::path path =
                    fs::path(manifest.output_dir) /
                    ("snap_" + leg + "_" + seed_str + "_" + std::to_string(step) + ".edges");
                std::ofstream snap(path);
                if (!snap) throw std::runtime_error("cannot open " + path.string());
                s.graph().write_edge_list(snap, step);
                outcome.files.push_back(path.string());
            };
        }
        outcome.records = sim.run(hooks);
        const fs::path run_path =
            fs::path(manifest.output_dir) / ("run_" + leg + "_" + seed_str + ".csv");
        std::ofstream run_file(run_path);
        if (!run_file) throw std::runtime_error("cannot open " + run_path.string());
        write_run_csv(run_file, outcome.records);
        outcome.files.push_back(run_path.string());
        outcome.completed = true;
    } catch (const std::exception& ex) {
        outcome.failure = leg + " seed " + seed_str + ": " + ex.what();
    }
    return outcome;
}

}  // namespace

ExecutionReport execute(const RunManifest& manifest, std::size_t jobs) {
    namespace fs = std::filesystem;
    manifest.config.validate();
    std::error_code ec;
    fs::create_directories(manifest.output_dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory " + manifest.output_dir + ": " +
                                 ec.message());
    }

    std::vector<bool> legs;
    if (manifest.mode == Mode::On || manifest.mode == Mode::Both) legs.push_back(true);
    if (manifest.mode == Mode::Off || manifest.mode == Mode::Both) legs.push_back(false);

    std::vector<RunTask> tasks;
    for (const bool on : legs) {
        for (std::size_t i = 0; i < manifest.config.runs; ++i) {
            tasks.push_back({on, i, manifest.config.seed + i});
        }
    }

    std::vector<TaskOutcome> outcomes(tasks.size());
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) outcomes[i] = run_one(manifest, tasks[i]);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    outcomes[i] = run_one(manifest, tasks[i]);
                }
            });
        }
        for (auto& t : pool) t.join();
    }

    ExecutionReport report;
    for (const auto& outcome : outcomes) {
        if (outcome.completed) ++report.runs_completed;
        else {
            ++report.runs_failed;
            report.failures.push_back(outcome.failure);
        }
        for (const auto& f : outcome.files) report.files_written.push_back(f);
    }

    // Aggregates cover completed runs only, in seed order.
    const std::size_t transient = manifest.config.scenario == Scenario::StableChurn
                                      ? manifest.config.transient_steps
                                      : 0;
    std::size_t task_base = 0;
    for (const bool on : legs) {
        std::vector<std::vector<MetricsRecord>> series;
        for (std::size_t i = 0; i < manifest.config.runs; ++i) {
            const auto& outcome = outcomes[task_base + i];
            if (outcome.completed) series.push_back(outcome.records);
        }
        task_base += manifest.config.runs;
        if (series.empty()) continue;
        const fs::path path =
            fs::path(manifest.output_dir) / ("agg_" + std::string(leg_name(on)) + ".csv");
        std::ofstream agg_file(path);
        if (!agg_file) throw std::runtime_error("cannot open " + path.string());
        write_aggregate_csv(agg_file, aggregate(series, transient));
        report.files_written.push_back(path.string());
    }
    return report;
}

}  // namespace overlaymend
