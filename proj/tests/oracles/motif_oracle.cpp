#include "oracles/motif_oracle.hpp"

#include <algorithm>

namespace motifcast::oracles {
namespace {

// Templates on abstract nodes {0, 1, 2}, declared here independently of the
// production code. Order matches roadgraph::MotifClass.
const bool kTemplates[5][3][3] = {
    // Cycle: 0->1->2->0
    {{false, true, false}, {false, false, true}, {true, false, false}},
    // FeedForward: 0->1, 1->2, 0->2
    {{false, true, true}, {false, false, true}, {false, false, false}},
    // OutFan: 0->1, 0->2
    {{false, true, true}, {false, false, false}, {false, false, false}},
    // InFan: 1->0, 2->0
    {{false, false, false}, {true, false, false}, {true, false, false}},
    // Path: 0->1->2
    {{false, true, false}, {false, false, true}, {false, false, false}},
};

const int kPermutations[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

}  // namespace

MotifOracleResult brute_force_motif_counts(const roadgraph::DirectedRoadGraph& graph) {
    const int n = graph.node_count();
    MotifOracleResult result;
    for (auto& m : result.per_class) m = roadgraph::CountMatrix::Zero(n, n);
    result.total = roadgraph::CountMatrix::Zero(n, n);

    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            for (int c = b + 1; c < n; ++c) {
                const int nodes[3] = {a, b, c};
                for (int k = 0; k < 5; ++k) {
                    // Induced-subgraph match under some embedding of the
                    // template onto the triple.
                    bool matched = false;
                    for (const auto& perm : kPermutations) {
                        bool ok = true;
                        for (int u = 0; u < 3 && ok; ++u) {
                            for (int v = 0; v < 3 && ok; ++v) {
                                if (u == v) continue;
                                const bool want = kTemplates[k][u][v];
                                const bool have =
                                    graph.has_edge(nodes[perm[u]], nodes[perm[v]]);
                                if (want != have) ok = false;
                            }
                        }
                        if (ok) {
                            matched = true;
                            break;
                        }
                    }
                    if (!matched) continue;
                    // The triple participates once; every one of its edges is
                    // credited for this class.
                    for (int u = 0; u < 3; ++u) {
                        for (int v = 0; v < 3; ++v) {
                            if (u != v && graph.has_edge(nodes[u], nodes[v])) {
                                result.per_class[static_cast<std::size_t>(k)](nodes[u],
                                                                              nodes[v]) += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    for (const auto& m : result.per_class) result.total += m;
    return result;
}

}  // namespace motifcast::oracles
