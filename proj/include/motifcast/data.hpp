#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motifcast/roadgraph.hpp"
#include "motifcast/speed_matrix.hpp"

namespace motifcast::data {

// One pre-map-matched speed observation.
struct GpsSpeedRecord {
    std::string timestamp;  // ISO 8601 "YYYY-MM-DDTHH:MM:SS"
    std::string segment_id;
    double speed_kmh = 0.0;
};

struct AggregateResult {
    pipeline::SpeedMatrix matrix;
    std::size_t unknown_segment_records = 0;  // counted and reported, not dropped silently
};

// Averages records into fixed intervals. The matrix spans whole days from
// midnight of the earliest record's day; cells without records are masked.
AggregateResult aggregate(std::span<const GpsSpeedRecord> records, int interval_minutes,
                          const std::vector<std::string>& segment_ids);

// Fills masked cells by linear interpolation along time, extending the edges
// with the nearest observed value. The mask is preserved for evaluation-time
// exclusion. A fully missing segment is rejected by id.
pipeline::SpeedMatrix impute(const pipeline::SpeedMatrix& speeds);

// Junction-level road description before segment splitting.
struct RoadLink {
    std::string from_junction;
    std::string to_junction;
    bool two_way = false;
};

struct SplitResult {
    roadgraph::DirectedRoadGraph graph;
    std::vector<std::string> segment_names;                // "from->to" per node
    std::vector<std::pair<std::string, int>> link_mapping;  // link label -> segment node
};

// Each two-way road becomes two segment nodes with reversed connection
// patterns; segment u->v connects to segment v->w (U-turns excluded).
SplitResult split_bidirectional(std::span<const RoadLink> links);

struct CongestionEvent {
    std::vector<int> segments;
    int start_interval = 0;
    int duration_intervals = 0;
    double depth_kmh = 0.0;
};

struct SyntheticSpec {
    int segment_count = 40;
    int days = 30;
    int intervals_per_day = 96;
    std::vector<double> daily_profile;  // one base speed per interval of day
    double spatial_coupling = 0.0;
    double noise_phi = 0.0;    // AR(1) coefficient, |phi| < 1
    double noise_sigma = 0.0;  // innovation standard deviation
    std::vector<CongestionEvent> congestion_events;
    std::uint64_t seed = 0;

    void validate() const;

    // The pinned benchmark generator settings; also committed as
    // configs/benchmark_synth.json.
    static SyntheticSpec benchmark();
};

struct SynthesisResult {
    pipeline::SpeedMatrix matrix;
    double clipping_rate = 0.0;
};

// speed(i, t) = profile(t mod ipd)
//             + coupling * mean over in-neighbors j of (speed(j, t-1) - profile(t-1 mod ipd))
//             + AR(1) noise - congestion depth, clipped at zero.
// Deterministic for a fixed seed; specs that clip more than 1% of cells are
// rejected.
SynthesisResult generate_synthetic(const SyntheticSpec& spec,
                                   const roadgraph::DirectedRoadGraph& graph);

// The pinned benchmark road graph: a 40-node directed ring plus seeded random
// chords; also committed as configs/benchmark_graph.edges.
roadgraph::DirectedRoadGraph benchmark_graph();

}  // namespace motifcast::data
