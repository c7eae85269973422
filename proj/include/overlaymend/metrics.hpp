#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "overlaymend/graph.hpp"
#include "overlaymend/protocol.hpp"

namespace overlaymend {

// One sample taken at a macro-step boundary.
struct MetricsRecord {
    std::size_t step{};
    std::size_t active{};
    double main_fraction{};
    std::size_t num_components{};
    std::size_t isolated{};
    double avg_first{};        // mean degree over active nodes
    double avg_second{};       // mean 2nd-neighbour cache size over active nodes
    std::uint64_t messages_sent{};  // cumulative

    bool operator==(const MetricsRecord&) const = default;
};

inline constexpr std::size_t kMetricFieldCount = 7;
inline constexpr std::array<const char*, kMetricFieldCount> kMetricFieldNames = {
    "active", "main_fraction", "num_components", "isolated", "avg_first", "avg_second",
    "messages_sent"};

std::array<double, kMetricFieldCount> metric_fields(const MetricsRecord& r);

// Scans the graph and the live caches. `stamp` is scratch of slot-count size
// reused across samples; pass a fresh generation each call.
MetricsRecord sample_metrics(const OverlayGraph& g, const ProtocolEngine& engine,
                             std::size_t step, std::uint64_t messages_sent,
                             std::vector<std::uint32_t>& stamp, std::uint32_t& generation);

// Convenience wrapper that allocates its own scratch.
MetricsRecord sample_metrics(const OverlayGraph& g, const ProtocolEngine& engine,
                             std::size_t step, std::uint64_t messages_sent);

// Per-step mean and sample standard deviation across runs, aligned by record
// index. Runs are truncated to the shortest after the first `transient_steps`
// records are dropped.
struct AggregateSeries {
    std::vector<std::size_t> step;
    std::vector<std::array<double, kMetricFieldCount>> mean;
    std::vector<std::array<double, kMetricFieldCount>> stddev;

    std::size_t size() const { return step.size(); }
};

AggregateSeries aggregate(const std::vector<std::vector<MetricsRecord>>& runs,
                          std::size_t transient_steps);

// CSV writers. Numbers are rendered with "%.6g" so output is byte-stable
// across platforms.
void write_run_csv(std::ostream& out, const std::vector<MetricsRecord>& records);
void write_aggregate_csv(std::ostream& out, const AggregateSeries& agg);

std::string format_double(double value);

}  // namespace overlaymend
