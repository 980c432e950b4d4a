#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace motifcast::roadgraph {

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Unweighted directed graph over road segments. Self-loops are rejected;
// bidirectional roads must be pre-split into two segment nodes upstream.
class DirectedRoadGraph {
public:
    DirectedRoadGraph(int node_count, const std::vector<std::pair<int, int>>& edges);

    int node_count() const { return node_count_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    bool has_edge(int from, int to) const { return adjacency_(from, to) != 0; }
    const CountMatrix& adjacency() const { return adjacency_; }

private:
    int node_count_;
    std::vector<std::pair<int, int>> edges_;
    CountMatrix adjacency_;
};

// The five 3-node motif classes built from unidirectional edges only.
enum class MotifClass { Cycle, FeedForward, OutFan, InFan, Path };

constexpr std::array<MotifClass, 5> kAllMotifClasses = {
    MotifClass::Cycle, MotifClass::FeedForward, MotifClass::OutFan, MotifClass::InFan,
    MotifClass::Path};

std::string to_string(MotifClass m);

// Directed edge template of a motif class on abstract nodes {0, 1, 2}.
std::vector<std::pair<int, int>> motif_edge_template(MotifClass m);

// Edge-participation counts: per_motif_counts[k](i, j) is the number of node
// triples whose induced subgraph matches class k and contains edge (i, j).
// weights is their element-wise sum. Entries at non-edges are zero.
struct MotifAdjacency {
    CountMatrix weights;
    std::array<CountMatrix, 5> per_motif_counts;
};

MotifAdjacency count_motif_participation(const DirectedRoadGraph& graph, int threads = 1);

enum class LaplacianKind { MotifLaplacian, StandardNormalized };

struct GraphLaplacian {
    Eigen::MatrixXd matrix;
    double lambda_max = 0.0;
    LaplacianKind kind = LaplacianKind::MotifLaplacian;
};

// I - D^{-1/2} W D^{-1/2} for a non-negative weight matrix W; zero-degree rows
// use D^{-1/2}_ii = 0 and reduce to identity rows. lambda_max is filled by
// power iteration.
GraphLaplacian normalized_laplacian(const Eigen::MatrixXd& weights, bool symmetrize,
                                    LaplacianKind kind);

// Motif Laplacian from motif participation weights; symmetrize replaces W_M
// with W_M + W_M^T before normalization.
GraphLaplacian motif_laplacian(const MotifAdjacency& adj, bool symmetrize = true);

// Power-iteration estimate of the spectral radius of a symmetric matrix.
// Falls back to the normalized-Laplacian bound 2 when it fails to converge;
// an exactly zero operator is detected and reported as 0.
double estimate_lambda_max(const GraphLaplacian& lap, double tol = 1e-9, int max_iters = 1000);

// 2 L / lambda_max - I; maps the spectrum into [-1, 1].
GraphLaplacian rescale_laplacian(const GraphLaplacian& lap);

// Full basis used by the network: motif census -> symmetrized motif Laplacian
// -> rescaled Laplacian.
GraphLaplacian rescaled_motif_laplacian(const DirectedRoadGraph& graph, int threads = 1);

// Plain-text edge list, one `source_id,target_id` pair per line (0-based ids);
// blank lines and `#` comments are ignored. Node count is max id + 1.
DirectedRoadGraph load_edge_list(const std::filesystem::path& path);
void save_edge_list(const DirectedRoadGraph& graph, const std::filesystem::path& path);

// CSV of N x N integer motif weights.
void save_motif_adjacency_csv(const CountMatrix& weights, const std::filesystem::path& path);

}  // namespace motifcast::roadgraph
