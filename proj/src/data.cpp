#include "motifcast/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "motifcast/common.hpp"

namespace motifcast::pipeline {

void SpeedMatrix::validate() const {
    if (values.rows() != missing.rows() || values.cols() != missing.cols()) {
        throw DataError("speed matrix: mask shape does not match values");
    }
    if (static_cast<int>(segment_ids.size()) != segment_count()) {
        throw DataError("speed matrix: segment id count does not match rows");
    }
    if (interval_minutes <= 0 || 1440 % interval_minutes != 0) {
        throw DataError("speed matrix: interval_minutes must divide 1440");
    }
    for (Eigen::Index i = 0; i < values.rows(); ++i) {
        for (Eigen::Index t = 0; t < values.cols(); ++t) {
            if (missing(i, t)) continue;
            const double v = values(i, t);
            if (!std::isfinite(v) || v < 0.0) {
                throw DataError("speed matrix: invalid speed at segment " +
                                segment_ids[static_cast<std::size_t>(i)] + ", interval " +
                                std::to_string(t));
            }
        }
    }
}

}  // namespace motifcast::pipeline

namespace motifcast::data {
namespace {

// Days since 1970-01-01 (Gregorian civil calendar).
long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = static_cast<unsigned>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

void civil_from_days(long long z, int& y, int& m, int& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

struct ParsedTime {
    long long day;       // days since epoch
    int second_of_day;
};

ParsedTime parse_iso8601(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    char sep = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) < 7 ||
        (sep != 'T' && sep != ' ')) {
        throw DataError("data: cannot parse timestamp '" + text + "'");
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 ||
        s > 60) {
        throw DataError("data: timestamp out of range: '" + text + "'");
    }
    return {days_from_civil(y, mo, d), h * 3600 + mi * 60 + s};
}

std::string format_midnight(long long day) {
    int y = 0, m = 0, d = 0;
    civil_from_days(day, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT00:00:00", y, m, d);
    return buf;
}

}  // namespace

AggregateResult aggregate(std::span<const GpsSpeedRecord> records, int interval_minutes,
                          const std::vector<std::string>& segment_ids) {
    if (interval_minutes <= 0 || 1440 % interval_minutes != 0) {
        throw DataError("data: interval_minutes must divide 1440");
    }
    if (records.empty()) throw DataError("data: no records");
    if (segment_ids.empty()) throw DataError("data: no segment ids");

    std::map<std::string, int> segment_index;
    for (std::size_t i = 0; i < segment_ids.size(); ++i) {
        segment_index.emplace(segment_ids[i], static_cast<int>(i));
    }

    long long first_day = 0, last_day = 0;
    bool first = true;
    std::vector<std::pair<ParsedTime, std::pair<int, double>>> parsed;  // time, (segment, speed)
    std::size_t unknown = 0;
    for (const GpsSpeedRecord& rec : records) {
        if (!std::isfinite(rec.speed_kmh) || rec.speed_kmh < 0.0) {
            throw DataError("data: invalid speed " + std::to_string(rec.speed_kmh) +
                            " for segment '" + rec.segment_id + "'");
        }
        const ParsedTime time = parse_iso8601(rec.timestamp);
        const auto it = segment_index.find(rec.segment_id);
        if (it == segment_index.end()) {
            ++unknown;
            continue;
        }
        parsed.push_back({time, {it->second, rec.speed_kmh}});
        first_day = first ? time.day : std::min(first_day, time.day);
        last_day = first ? time.day : std::max(last_day, time.day);
        first = false;
    }
    if (parsed.empty()) throw DataError("data: no records matched a known segment");

    const int intervals_per_day = 1440 / interval_minutes;
    const int days = static_cast<int>(last_day - first_day + 1);
    const int n = static_cast<int>(segment_ids.size());
    const int total = days * intervals_per_day;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n, total);
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, total);
    for (const auto& [time, cell] : parsed) {
        const int t = static_cast<int>(time.day - first_day) * intervals_per_day +
                      time.second_of_day / (interval_minutes * 60);
        sums(cell.first, t) += cell.second;
        counts(cell.first, t) += 1.0;
    }

    AggregateResult result;
    result.unknown_segment_records = unknown;
    result.matrix.values = Eigen::MatrixXd::Zero(n, total);
    result.matrix.missing = pipeline::BoolMask::Constant(n, total, true);
    result.matrix.interval_minutes = interval_minutes;
    result.matrix.start_timestamp = format_midnight(first_day);
    result.matrix.segment_ids = segment_ids;
    for (int i = 0; i < n; ++i) {
        for (int t = 0; t < total; ++t) {
            if (counts(i, t) > 0.0) {
                result.matrix.values(i, t) = sums(i, t) / counts(i, t);
                result.matrix.missing(i, t) = false;
            }
        }
    }
    result.matrix.validate();
    return result;
}

pipeline::SpeedMatrix impute(const pipeline::SpeedMatrix& speeds) {
    speeds.validate();
    pipeline::SpeedMatrix out = speeds;
    const int total = speeds.interval_count();
    for (int i = 0; i < speeds.segment_count(); ++i) {
        std::vector<int> observed;
        for (int t = 0; t < total; ++t) {
            if (!speeds.missing(i, t)) observed.push_back(t);
        }
        if (observed.empty()) {
            throw DataError("data: segment '" + speeds.segment_ids[static_cast<std::size_t>(i)] +
                            "' has no observed values to impute from");
        }
        for (int t = 0; t < observed.front(); ++t) {
            out.values(i, t) = speeds.values(i, observed.front());
        }
        for (int t = observed.back() + 1; t < total; ++t) {
            out.values(i, t) = speeds.values(i, observed.back());
        }
        for (std::size_t k = 0; k + 1 < observed.size(); ++k) {
            const int t0 = observed[k], t1 = observed[k + 1];
            const double v0 = speeds.values(i, t0), v1 = speeds.values(i, t1);
            for (int t = t0 + 1; t < t1; ++t) {
                out.values(i, t) = v0 + (v1 - v0) * static_cast<double>(t - t0) /
                                            static_cast<double>(t1 - t0);
            }
        }
    }
    return out;
}

SplitResult split_bidirectional(std::span<const RoadLink> links) {
    if (links.empty()) throw DataError("data: no road links");

    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> directed;  // junction from -> to per segment
    std::vector<std::pair<std::string, int>> mapping;
    const auto add_segment = [&](const std::string& from, const std::string& to,
                                 const std::string& label) {
        if (from == to) throw DataError("data: road link '" + label + "' loops on one junction");
        directed.emplace_back(from, to);
        names.push_back(from + "->" + to);
        mapping.emplace_back(label, static_cast<int>(directed.size()) - 1);
    };
    for (const RoadLink& link : links) {
        const std::string label = link.from_junction + "-" + link.to_junction;
        add_segment(link.from_junction, link.to_junction, label);
        if (link.two_way) add_segment(link.to_junction, link.from_junction, label);
    }

    std::vector<std::pair<int, int>> edges;
    const int n = static_cast<int>(directed.size());
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            if (a == b) continue;
            const bool connects = directed[static_cast<std::size_t>(a)].second ==
                                  directed[static_cast<std::size_t>(b)].first;
            const bool u_turn = directed[static_cast<std::size_t>(b)].second ==
                                    directed[static_cast<std::size_t>(a)].first &&
                                directed[static_cast<std::size_t>(b)].first ==
                                    directed[static_cast<std::size_t>(a)].second;
            if (connects && !u_turn) edges.emplace_back(a, b);
        }
    }
    return SplitResult{roadgraph::DirectedRoadGraph(n, edges), std::move(names),
                       std::move(mapping)};
}

void SyntheticSpec::validate() const {
    if (segment_count < 1 || days < 1 || intervals_per_day < 1) {
        throw DataError("synthetic spec: segment_count, days and intervals_per_day must be >= 1");
    }
    if (1440 % intervals_per_day != 0) {
        throw DataError("synthetic spec: intervals_per_day must divide 1440");
    }
    if (static_cast<int>(daily_profile.size()) != intervals_per_day) {
        throw DataError("synthetic spec: daily_profile must have one entry per interval (" +
                        std::to_string(intervals_per_day) + "), got " +
                        std::to_string(daily_profile.size()));
    }
    double min_profile = daily_profile.empty() ? 0.0 : daily_profile.front();
    for (double v : daily_profile) {
        if (!std::isfinite(v) || v < 0.0) {
            throw DataError("synthetic spec: daily_profile values must be finite and >= 0");
        }
        min_profile = std::min(min_profile, v);
    }
    if (!(std::abs(noise_phi) < 1.0)) {
        throw DataError("synthetic spec: |noise_phi| must be < 1");
    }
    if (noise_sigma < 0.0 || !std::isfinite(noise_sigma)) {
        throw DataError("synthetic spec: noise_sigma must be finite and >= 0");
    }
    if (!std::isfinite(spatial_coupling)) {
        throw DataError("synthetic spec: spatial_coupling must be finite");
    }
    const int total = days * intervals_per_day;
    for (const CongestionEvent& event : congestion_events) {
        if (event.depth_kmh < 0.0 || event.depth_kmh >= min_profile) {
            throw DataError("synthetic spec: congestion depth must stay below base speeds");
        }
        if (event.start_interval < 0 || event.duration_intervals < 1 ||
            event.start_interval + event.duration_intervals > total) {
            throw DataError("synthetic spec: congestion event outside the generated range");
        }
        for (int seg : event.segments) {
            if (seg < 0 || seg >= segment_count) {
                throw DataError("synthetic spec: congestion event names segment " +
                                std::to_string(seg) + " outside 0.." +
                                std::to_string(segment_count - 1));
            }
        }
    }
}

SynthesisResult generate_synthetic(const SyntheticSpec& spec,
                                   const roadgraph::DirectedRoadGraph& graph) {
    spec.validate();
    if (graph.node_count() != spec.segment_count) {
        throw DataError("data: graph has " + std::to_string(graph.node_count()) +
                        " nodes but the spec names " + std::to_string(spec.segment_count) +
                        " segments");
    }

    const int n = spec.segment_count;
    const int total = spec.days * spec.intervals_per_day;

    std::vector<std::vector<int>> in_neighbors(static_cast<std::size_t>(n));
    for (const auto& [from, to] : graph.edges()) {
        in_neighbors[static_cast<std::size_t>(to)].push_back(from);
    }

    Eigen::MatrixXd depth = Eigen::MatrixXd::Zero(n, total);
    for (const CongestionEvent& event : spec.congestion_events) {
        for (int seg : event.segments) {
            for (int t = event.start_interval; t < event.start_interval + event.duration_intervals;
                 ++t) {
                depth(seg, t) += event.depth_kmh;
            }
        }
    }

    Rng rng(spec.seed);
    Eigen::MatrixXd values(n, total);
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(n);
    std::size_t clipped = 0;
    for (int t = 0; t < total; ++t) {
        const double profile_now = spec.daily_profile[static_cast<std::size_t>(
            t % spec.intervals_per_day)];
        const double profile_prev =
            t > 0 ? spec.daily_profile[static_cast<std::size_t>((t - 1) % spec.intervals_per_day)]
                  : 0.0;
        for (int i = 0; i < n; ++i) {
            noise(i) = spec.noise_phi * noise(i) + rng.normal(0.0, spec.noise_sigma);
            double coupling = 0.0;
            const auto& nbrs = in_neighbors[static_cast<std::size_t>(i)];
            if (t > 0 && !nbrs.empty() && spec.spatial_coupling != 0.0) {
                double deviation = 0.0;
                for (int j : nbrs) deviation += values(j, t - 1) - profile_prev;
                coupling = spec.spatial_coupling * deviation / static_cast<double>(nbrs.size());
            }
            double v = profile_now + coupling + noise(i) - depth(i, t);
            if (v < 0.0) {
                v = 0.0;
                ++clipped;
            }
            values(i, t) = v;
        }
    }

    SynthesisResult result;
    result.clipping_rate =
        static_cast<double>(clipped) / (static_cast<double>(n) * static_cast<double>(total));
    if (result.clipping_rate > 0.01) {
        throw DataError("data: synthetic spec clips " +
                        std::to_string(100.0 * result.clipping_rate) +
                        "% of cells; adjust profile/noise/depth");
    }
    result.matrix.values = std::move(values);
    result.matrix.missing = pipeline::BoolMask::Constant(n, total, false);
    result.matrix.interval_minutes = 1440 / spec.intervals_per_day;
    result.matrix.start_timestamp = "2024-01-01T00:00:00";
    result.matrix.segment_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) result.matrix.segment_ids.push_back(std::to_string(i));
    return result;
}

SyntheticSpec SyntheticSpec::benchmark() {
    SyntheticSpec spec;
    spec.segment_count = 40;
    spec.days = 30;
    spec.intervals_per_day = 96;
    spec.daily_profile.resize(96);
    for (int t = 0; t < 96; ++t) {
        const double morning = 22.0 * std::exp(-std::pow((t - 33.0) / 5.0, 2.0));
        const double evening = 18.0 * std::exp(-std::pow((t - 73.0) / 6.0, 2.0));
        spec.daily_profile[static_cast<std::size_t>(t)] = 52.0 - morning - evening;
    }
    spec.spatial_coupling = 0.3;
    spec.noise_phi = 0.6;
    spec.noise_sigma = 3.0;
    spec.congestion_events = {
        {{3, 4, 5}, 10 * 96 + 40, 10, 10.0},
        {{20, 21}, 17 * 96 + 60, 12, 12.0},
        {{8, 9, 10}, 26 * 96 + 30, 8, 10.0},
    };
    spec.seed = 1337;
    return spec;
}

roadgraph::DirectedRoadGraph benchmark_graph() {
    const int n = 40;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
    Rng rng(20240101);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (rng.uniform() < 0.07) edges.emplace_back(i, j);
        }
    }
    return roadgraph::DirectedRoadGraph(n, edges);
}

}  // namespace motifcast::data
