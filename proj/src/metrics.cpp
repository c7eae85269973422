#include "overlaymend/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "overlaymend/second_view.hpp"

namespace overlaymend {

std::array<double, kMetricFieldCount> metric_fields(const MetricsRecord& r) {
    return {static_cast<double>(r.active),
            r.main_fraction,
            static_cast<double>(r.num_components),
            static_cast<double>(r.isolated),
            r.avg_first,
            r.avg_second,
            static_cast<double>(r.messages_sent)};
}

MetricsRecord sample_metrics(const OverlayGraph& g, const ProtocolEngine& engine,
                             std::size_t step, std::uint64_t messages_sent,
                             std::vector<std::uint32_t>& stamp, std::uint32_t& generation) {
    MetricsRecord r;
    r.step = step;
    r.active = g.active_count();
    r.messages_sent = messages_sent;
    if (r.active == 0) return r;
    r.main_fraction = main_component_fraction(g);
    r.num_components = components(g).size();
    r.isolated = isolated_count(g);
    if (stamp.size() < g.slot_count()) stamp.assign(g.slot_count(), 0);
    std::size_t degree_sum = 0;
    std::size_t second_sum = 0;
    for (NodeId n = 0; n < g.slot_count(); ++n) {
        if (!g.is_active(n)) continue;
        degree_sum += g.degree(n);
        if (++generation == 0) {
            stamp.assign(stamp.size(), 0);
            generation = 1;
        }
        second_sum += second_neighbor_count(engine.view(n), stamp, generation);
    }
    r.avg_first = static_cast<double>(degree_sum) / static_cast<double>(r.active);
    r.avg_second = static_cast<double>(second_sum) / static_cast<double>(r.active);
    return r;
}

MetricsRecord sample_metrics(const OverlayGraph& g, const ProtocolEngine& engine,
                             std::size_t step, std::uint64_t messages_sent) {
    std::vector<std::uint32_t> stamp(g.slot_count(), 0);
    std::uint32_t generation = 0;
    return sample_metrics(g, engine, step, messages_sent, stamp, generation);
}

AggregateSeries aggregate(const std::vector<std::vector<MetricsRecord>>& runs,
                          std::size_t transient_steps) {
    if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
    std::size_t shortest = runs.front().size();
    for (const auto& r : runs) shortest = std::min(shortest, r.size());
    if (transient_steps >= shortest) {
        throw std::invalid_argument("aggregate: transient window swallows every sample");
    }
    AggregateSeries agg;
    const std::size_t rows = shortest - transient_steps;
    const double n = static_cast<double>(runs.size());
    agg.step.reserve(rows);
    agg.mean.reserve(rows);
    agg.stddev.reserve(rows);
    for (std::size_t i = transient_steps; i < shortest; ++i) {
        const std::size_t step = runs.front()[i].step;
        std::array<double, kMetricFieldCount> mean{};
        for (const auto& run : runs) {
            if (run[i].step != step) {
                throw std::invalid_argument("aggregate: runs sample different steps");
            }
            const auto f = metric_fields(run[i]);
            for (std::size_t k = 0; k < kMetricFieldCount; ++k) mean[k] += f[k];
        }
        for (auto& m : mean) m /= n;
        std::array<double, kMetricFieldCount> dev{};
        if (runs.size() > 1) {
            for (const auto& run : runs) {
                const auto f = metric_fields(run[i]);
                for (std::size_t k = 0; k < kMetricFieldCount; ++k) {
                    const double d = f[k] - mean[k];
                    dev[k] += d * d;
                }
            }
            for (auto& d : dev) d = std::sqrt(d / (n - 1.0));
        }
        agg.step.push_back(step);
        agg.mean.push_back(mean);
        agg.stddev.push_back(dev);
    }
    return agg;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

void write_run_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    out << "step";
    for (const char* name : kMetricFieldNames) out << "," << name;
    out << "\n";
    for (const auto& r : records) {
        out << r.step << "," << r.active << "," << format_double(r.main_fraction) << ","
            << r.num_components << "," << r.isolated << "," << format_double(r.avg_first) << ","
            << format_double(r.avg_second) << "," << r.messages_sent << "\n";
    }
}

void write_aggregate_csv(std::ostream& out, const AggregateSeries& agg) {
    out << "step";
    for (const char* name : kMetricFieldNames) out << "," << name << "_mean," << name << "_std";
    out << "\n";
    for (std::size_t i = 0; i < agg.size(); ++i) {
        out << agg.step[i];
        for (std::size_t k = 0; k < kMetricFieldCount; ++k) {
            out << "," << format_double(agg.mean[i][k]) << "," << format_double(agg.stddev[i][k]);
        }
        out << "\n";
    }
}

}  // namespace overlaymend
