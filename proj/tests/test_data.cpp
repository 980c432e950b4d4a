#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "motifcast/common.hpp"
#include "motifcast/data.hpp"

using namespace motifcast;
using namespace motifcast::data;

namespace {

GpsSpeedRecord record(const std::string& ts, const std::string& seg, double speed) {
    return GpsSpeedRecord{ts, seg, speed};
}

}  // namespace

TEST_CASE("aggregate: cell mean and masking") {
    const std::vector<GpsSpeedRecord> records{
        record("2024-03-01T00:03:00", "a", 30.0),
        record("2024-03-01T00:07:30", "a", 50.0),
        record("2024-03-01T00:20:00", "b", 44.0),
    };
    const AggregateResult result = aggregate(records, 15, {"a", "b"});
    const auto& m = result.matrix;
    CHECK(m.segment_count() == 2);
    CHECK(m.interval_count() == 96);
    CHECK(m.values(0, 0) == doctest::Approx(40.0));  // mean of 30 and 50
    CHECK_FALSE(m.missing(0, 0));
    CHECK(m.values(1, 1) == doctest::Approx(44.0));
    CHECK(m.missing(0, 1));  // no records -> masked, not zero-filled
    CHECK(m.missing(1, 0));
    CHECK(m.start_timestamp == "2024-03-01T00:00:00");
}

TEST_CASE("aggregate: unknown segments are counted, bad input rejected") {
    const std::vector<GpsSpeedRecord> records{
        record("2024-03-01T00:03:00", "a", 30.0),
        record("2024-03-01T00:04:00", "ghost", 30.0),
    };
    const AggregateResult result = aggregate(records, 15, {"a"});
    CHECK(result.unknown_segment_records == 1);

    CHECK_THROWS_AS(aggregate({}, 15, {"a"}), DataError);
    CHECK_THROWS_AS(aggregate(records, 7, {"a"}), DataError);  // 7 does not divide 1440
    const std::vector<GpsSpeedRecord> bad{record("2024-03-01T00:00:00", "a", -3.0)};
    CHECK_THROWS_AS(aggregate(bad, 15, {"a"}), DataError);
    const std::vector<GpsSpeedRecord> badts{record("not-a-time", "a", 3.0)};
    CHECK_THROWS_AS(aggregate(badts, 15, {"a"}), DataError);
}

TEST_CASE("aggregate: matches a group-by-mean reference and conserves mass") {
    Rng rng(11);
    std::vector<GpsSpeedRecord> records;
    std::map<std::pair<int, int>, std::pair<double, int>> reference;  // (seg, cell) -> (sum, n)
    const std::vector<std::string> ids{"s0", "s1", "s2"};
    double total_speed = 0.0;
    for (int r = 0; r < 1000; ++r) {
        const int seg = static_cast<int>(rng.below(3));
        const int minute = static_cast<int>(rng.below(2 * 1440));  // two days
        const double speed = rng.uniform(0.0, 90.0);
        char ts[40];
        std::snprintf(ts, sizeof(ts), "2024-03-%02dT%02d:%02d:00", 1 + minute / 1440,
                      (minute % 1440) / 60, minute % 60);
        records.push_back(record(ts, ids[static_cast<std::size_t>(seg)], speed));
        auto& cell = reference[{seg, minute / 15}];
        cell.first += speed;
        cell.second += 1;
        total_speed += speed;
    }
    const AggregateResult result = aggregate(records, 15, ids);
    double mass = 0.0;
    for (const auto& [key, cell] : reference) {
        const double mean = cell.first / cell.second;
        CHECK(result.matrix.values(key.first, key.second) ==
              doctest::Approx(mean).epsilon(1e-12));
        mass += result.matrix.values(key.first, key.second) * cell.second;
    }
    CHECK(mass == doctest::Approx(total_speed).epsilon(1e-9));
    // Cells nobody touched stay masked.
    std::size_t observed = 0;
    for (int i = 0; i < result.matrix.segment_count(); ++i) {
        for (int t = 0; t < result.matrix.interval_count(); ++t) {
            if (!result.matrix.missing(i, t)) ++observed;
        }
    }
    CHECK(observed == reference.size());
}

TEST_CASE("impute: interpolation, edges, idempotence") {
    pipeline::SpeedMatrix m;
    m.values.resize(2, 5);
    m.values << 10, 0, 20, 0, 0,
                 0, 10, 20, 0, 30;
    m.missing.resize(2, 5);
    m.missing << false, true, false, true, true,
                 true, false, false, true, false;
    m.interval_minutes = 15;
    m.start_timestamp = "2024-01-01T00:00:00";
    m.segment_ids = {"a", "b"};

    const pipeline::SpeedMatrix filled = impute(m);
    CHECK(filled.values(0, 1) == doctest::Approx(15.0));  // midpoint
    CHECK(filled.values(0, 3) == doctest::Approx(20.0));  // trailing extension
    CHECK(filled.values(0, 4) == doctest::Approx(20.0));
    CHECK(filled.values(1, 0) == doctest::Approx(10.0));  // leading extension
    CHECK(filled.values(1, 3) == doctest::Approx(25.0));
    // mask preserved for evaluation-time exclusion
    CHECK(filled.missing(0, 1));
    CHECK_FALSE(filled.missing(0, 0));

    const pipeline::SpeedMatrix twice = impute(filled);
    CHECK((twice.values - filled.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("impute: fully missing segment is rejected by id") {
    pipeline::SpeedMatrix m;
    m.values = Eigen::MatrixXd::Zero(2, 3);
    m.missing.resize(2, 3);
    m.missing << false, false, false,
                 true, true, true;
    m.interval_minutes = 15;
    m.start_timestamp = "2024-01-01T00:00:00";
    m.segment_ids = {"ok", "void"};
    CHECK_THROWS_WITH_AS(impute(m), doctest::Contains("void"), DataError);
}

TEST_CASE("impute: random mask matches the interpolation rule exactly") {
    Rng rng(77);
    const int total = 200;
    pipeline::SpeedMatrix m;
    m.values.resize(1, total);
    m.missing.resize(1, total);
    for (int t = 0; t < total; ++t) {
        m.values(0, t) = 40.0 + 10.0 * std::sin(0.1 * t);
        m.missing(0, t) = rng.uniform() < 0.1;
    }
    m.missing(0, 0) = false;
    m.missing(0, total - 1) = false;
    m.interval_minutes = 15;
    m.start_timestamp = "2024-01-01T00:00:00";
    m.segment_ids = {"s"};

    const pipeline::SpeedMatrix filled = impute(m);
    // Reference: scan observed anchors directly.
    int prev = 0;
    for (int t = 1; t < total; ++t) {
        if (m.missing(0, t)) continue;
        for (int u = prev + 1; u < t; ++u) {
            const double expected = m.values(0, prev) +
                                    (m.values(0, t) - m.values(0, prev)) *
                                        static_cast<double>(u - prev) /
                                        static_cast<double>(t - prev);
            CHECK(filled.values(0, u) == doctest::Approx(expected).epsilon(1e-15));
        }
        prev = t;
    }
}

TEST_CASE("split_bidirectional: node counts and reversed patterns") {
    SUBCASE("one two-way road becomes two segments") {
        const std::vector<RoadLink> links{{"J1", "J2", true}};
        const SplitResult split = split_bidirectional(links);
        CHECK(split.graph.node_count() == 2);
        CHECK(split.segment_names[0] == "J1->J2");
        CHECK(split.segment_names[1] == "J2->J1");
        // U-turn transitions are not connections.
        CHECK(split.graph.edges().empty());
    }
    SUBCASE("one-way input maps one-to-one") {
        const std::vector<RoadLink> links{{"a", "b", false}, {"b", "c", false}};
        const SplitResult split = split_bidirectional(links);
        CHECK(split.graph.node_count() == 2);
        CHECK(split.graph.has_edge(0, 1));  // a->b feeds b->c
        CHECK(split.link_mapping.size() == 2);
    }
    SUBCASE("mixed sample: one-way + 2 x two-way") {
        std::vector<RoadLink> links;
        links.push_back({"a", "b", false});
        links.push_back({"b", "c", true});
        links.push_back({"c", "d", true});
        for (int i = 0; i < 7; ++i) {
            links.push_back({"x" + std::to_string(i), "y" + std::to_string(i), false});
        }
        const SplitResult split = split_bidirectional(links);
        CHECK(split.graph.node_count() == 8 + 2 * 2);
    }
    SUBCASE("degenerate link is rejected") {
        const std::vector<RoadLink> links{{"a", "a", false}};
        CHECK_THROWS_AS(split_bidirectional(links), DataError);
    }
}

TEST_CASE("generate_synthetic: determinism and periodicity") {
    SyntheticSpec spec;
    spec.segment_count = 4;
    spec.days = 3;
    spec.intervals_per_day = 24;
    spec.daily_profile.assign(24, 50.0);
    for (int t = 6; t < 10; ++t) spec.daily_profile[static_cast<std::size_t>(t)] = 35.0;
    spec.spatial_coupling = 0.0;
    spec.noise_phi = 0.0;
    spec.noise_sigma = 0.0;
    spec.seed = 5;

    const roadgraph::DirectedRoadGraph graph(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});

    SUBCASE("noise off: every day equals the profile") {
        const SynthesisResult result = generate_synthetic(spec, graph);
        CHECK(result.clipping_rate == 0.0);
        for (int i = 0; i < 4; ++i) {
            for (int t = 0; t < result.matrix.interval_count(); ++t) {
                CHECK(result.matrix.values(i, t) ==
                      doctest::Approx(spec.daily_profile[static_cast<std::size_t>(t % 24)]));
            }
        }
    }
    SUBCASE("same seed, same matrix") {
        SyntheticSpec noisy = spec;
        noisy.noise_phi = 0.5;
        noisy.noise_sigma = 2.0;
        noisy.spatial_coupling = 0.4;
        const SynthesisResult a = generate_synthetic(noisy, graph);
        const SynthesisResult b = generate_synthetic(noisy, graph);
        CHECK((a.matrix.values - b.matrix.values).cwiseAbs().maxCoeff() == 0.0);
        SyntheticSpec reseeded = noisy;
        reseeded.seed = 6;
        const SynthesisResult c = generate_synthetic(reseeded, graph);
        CHECK((a.matrix.values - c.matrix.values).cwiseAbs().maxCoeff() > 0.0);
    }
    SUBCASE("congestion event dents the affected window") {
        SyntheticSpec dented = spec;
        dented.congestion_events = {{{1}, 30, 4, 12.0}};
        const SynthesisResult result = generate_synthetic(dented, graph);
        CHECK(result.matrix.values(1, 31) ==
              doctest::Approx(spec.daily_profile[31 % 24] - 12.0));
        CHECK(result.matrix.values(0, 31) == doctest::Approx(spec.daily_profile[31 % 24]));
    }
    SUBCASE("pervasive clipping is rejected") {
        SyntheticSpec clipping = spec;
        clipping.daily_profile.assign(24, 1.0);
        clipping.noise_sigma = 30.0;
        clipping.noise_phi = 0.0;
        CHECK_THROWS_AS(generate_synthetic(clipping, graph), DataError);
    }
    SUBCASE("spec validation") {
        SyntheticSpec bad = spec;
        bad.noise_phi = 1.0;
        CHECK_THROWS_AS(bad.validate(), DataError);
        bad = spec;
        bad.daily_profile.pop_back();
        CHECK_THROWS_AS(bad.validate(), DataError);
        bad = spec;
        bad.congestion_events = {{{0}, 0, 4, 60.0}};  // deeper than the profile
        CHECK_THROWS_AS(bad.validate(), DataError);
    }
}

TEST_CASE("benchmark spec: daily-lag autocorrelation exceeds 0.5") {
    const SyntheticSpec spec = SyntheticSpec::benchmark();
    const SynthesisResult result = generate_synthetic(spec, benchmark_graph());
    const auto& values = result.matrix.values;
    const int lag = spec.intervals_per_day;
    const int total = result.matrix.interval_count();

    double mean_corr = 0.0;
    for (int i = 0; i < spec.segment_count; ++i) {
        double mean = values.row(i).mean();
        double num = 0.0, den = 0.0;
        for (int t = 0; t + lag < total; ++t) {
            num += (values(i, t) - mean) * (values(i, t + lag) - mean);
        }
        for (int t = 0; t < total; ++t) den += std::pow(values(i, t) - mean, 2.0);
        mean_corr += num / den;
    }
    mean_corr /= spec.segment_count;
    CHECK(mean_corr > 0.5);
}
