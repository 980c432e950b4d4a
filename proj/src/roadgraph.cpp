#include "motifcast/roadgraph.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "motifcast/common.hpp"

namespace motifcast::roadgraph {

DirectedRoadGraph::DirectedRoadGraph(int node_count,
                                     const std::vector<std::pair<int, int>>& edges)
    : node_count_(node_count) {
    if (node_count < 2) {
        throw DataError("roadgraph: node_count must be >= 2, got " + std::to_string(node_count));
    }
    adjacency_ = CountMatrix::Zero(node_count, node_count);
    std::set<std::pair<int, int>> unique(edges.begin(), edges.end());
    for (const auto& [from, to] : unique) {
        if (from < 0 || to < 0 || from >= node_count || to >= node_count) {
            throw DataError("roadgraph: edge (" + std::to_string(from) + ", " +
                            std::to_string(to) + ") is out of range for " +
                            std::to_string(node_count) + " nodes");
        }
        if (from == to) {
            throw DataError("roadgraph: self-loop at node " + std::to_string(from) +
                            " is not allowed");
        }
        adjacency_(from, to) = 1;
    }
    edges_.assign(unique.begin(), unique.end());
}

std::string to_string(MotifClass m) {
    switch (m) {
        case MotifClass::Cycle: return "cycle";
        case MotifClass::FeedForward: return "feed_forward";
        case MotifClass::OutFan: return "out_fan";
        case MotifClass::InFan: return "in_fan";
        case MotifClass::Path: return "path";
    }
    return "?";
}

std::vector<std::pair<int, int>> motif_edge_template(MotifClass m) {
    switch (m) {
        case MotifClass::Cycle: return {{0, 1}, {1, 2}, {2, 0}};
        case MotifClass::FeedForward: return {{0, 1}, {1, 2}, {0, 2}};
        case MotifClass::OutFan: return {{0, 1}, {0, 2}};
        case MotifClass::InFan: return {{1, 0}, {2, 0}};
        case MotifClass::Path: return {{0, 1}, {1, 2}};
    }
    return {};
}

namespace {

constexpr std::size_t index_of(MotifClass m) { return static_cast<std::size_t>(m); }

struct TripleCounter {
    std::array<CountMatrix, 5> counts;

    explicit TripleCounter(int n) {
        for (auto& c : counts) c = CountMatrix::Zero(n, n);
    }

    void add(MotifClass m, int from, int to) { counts[index_of(m)](from, to) += 1; }

    void merge(const TripleCounter& other) {
        for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += other.counts[k];
    }
};

// Classifies the induced pattern on {a, b, c} and credits every edge of the
// triple. Triples containing a bidirectional pair match no class.
void classify_triple(const DirectedRoadGraph& g, int a, int b, int c, TripleCounter& out) {
    const bool ab = g.has_edge(a, b), ba = g.has_edge(b, a);
    const bool ac = g.has_edge(a, c), ca = g.has_edge(c, a);
    const bool bc = g.has_edge(b, c), cb = g.has_edge(c, b);
    if ((ab && ba) || (ac && ca) || (bc && cb)) return;

    const int edge_count = ab + ba + ac + ca + bc + cb;
    if (edge_count < 2) return;

    MotifClass cls;
    if (edge_count == 3) {
        const int out_a = ab + ac, out_b = ba + bc, out_c = ca + cb;
        cls = (out_a == 1 && out_b == 1 && out_c == 1) ? MotifClass::Cycle
                                                       : MotifClass::FeedForward;
    } else {
        // Two edges sharing one node; the shared node's direction pattern
        // decides the class.
        int deg_out[3] = {ab + ac, ba + bc, ca + cb};
        int deg_in[3] = {ba + ca, ab + cb, ac + bc};
        cls = MotifClass::Path;
        for (int i = 0; i < 3; ++i) {
            if (deg_out[i] == 2) cls = MotifClass::OutFan;
            if (deg_in[i] == 2) cls = MotifClass::InFan;
        }
    }

    const int nodes[3] = {a, b, c};
    const bool bits[3][3] = {{false, ab, ac}, {ba, false, bc}, {ca, cb, false}};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            if (bits[i][j]) out.add(cls, nodes[i], nodes[j]);
        }
    }
}

class NeighborBitsets {
public:
    explicit NeighborBitsets(const DirectedRoadGraph& g)
        : n_(g.node_count()), words_((static_cast<std::size_t>(n_) + 63) / 64),
          rows_(static_cast<std::size_t>(n_) * words_, 0) {
        for (const auto& [from, to] : g.edges()) {
            set(from, to);
            set(to, from);
        }
    }

    // Calls fn(c) for every c > floor_node with the bit set in the union
    // (intersect = false) or intersection (intersect = true) of rows a and b.
    template <typename Fn>
    void for_each_candidate(int a, int b, bool intersect, int floor_node, Fn&& fn) const {
        const std::uint64_t* ra = row(a);
        const std::uint64_t* rb = row(b);
        for (std::size_t w = static_cast<std::size_t>(floor_node + 1) / 64; w < words_; ++w) {
            std::uint64_t bitsword = intersect ? (ra[w] & rb[w]) : (ra[w] | rb[w]);
            if (w == static_cast<std::size_t>(floor_node + 1) / 64) {
                const int shift = (floor_node + 1) % 64;
                bitsword &= (shift == 0) ? ~0ull : (~0ull << shift);
            }
            while (bitsword != 0) {
                const int bit = std::countr_zero(bitsword);
                fn(static_cast<int>(w * 64) + bit);
                bitsword &= bitsword - 1;
            }
        }
    }

private:
    void set(int i, int j) {
        rows_[static_cast<std::size_t>(i) * words_ + static_cast<std::size_t>(j) / 64] |=
            1ull << (j % 64);
    }
    const std::uint64_t* row(int i) const {
        return rows_.data() + static_cast<std::size_t>(i) * words_;
    }

    int n_;
    std::size_t words_;
    std::vector<std::uint64_t> rows_;
};

// Counts triples with first node in [a_begin, a_end). Every matching triple
// {a < b < c} has at least two connected pairs, so candidate c nodes come from
// neighbor bitsets of a and b.
void count_range(const DirectedRoadGraph& g, const NeighborBitsets& nbrs, int a_begin, int a_end,
                 TripleCounter& out) {
    const int n = g.node_count();
    for (int a = a_begin; a < a_end; ++a) {
        for (int b = a + 1; b < n; ++b) {
            const bool pair_ab = g.has_edge(a, b) || g.has_edge(b, a);
            nbrs.for_each_candidate(a, b, /*intersect=*/!pair_ab, /*floor_node=*/b,
                                    [&](int c) { classify_triple(g, a, b, c, out); });
        }
    }
}

}  // namespace

MotifAdjacency count_motif_participation(const DirectedRoadGraph& graph, int threads) {
    const int n = graph.node_count();
    if (n < 2) throw DataError("roadgraph: motif counting needs at least 2 nodes");

    NeighborBitsets nbrs(graph);
    TripleCounter total(n);
    if (threads <= 1 || n < 64) {
        count_range(graph, nbrs, 0, n, total);
    } else {
        const int workers = std::min(threads, n);
        std::vector<TripleCounter> partial(static_cast<std::size_t>(workers), TripleCounter(n));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            const int begin = static_cast<int>(static_cast<long long>(n) * w / workers);
            const int end = static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
            pool.emplace_back([&, begin, end, w] {
                count_range(graph, nbrs, begin, end, partial[static_cast<std::size_t>(w)]);
            });
        }
        for (auto& t : pool) t.join();
        // Integer merge in fixed order keeps the result schedule-independent.
        for (const auto& p : partial) total.merge(p);
    }

    MotifAdjacency adj;
    adj.per_motif_counts = std::move(total.counts);
    adj.weights = CountMatrix::Zero(n, n);
    for (const auto& c : adj.per_motif_counts) adj.weights += c;
    return adj;
}

GraphLaplacian normalized_laplacian(const Eigen::MatrixXd& weights, bool symmetrize,
                                    LaplacianKind kind) {
    const Eigen::Index n = weights.rows();
    if (weights.cols() != n) throw DataError("roadgraph: weight matrix must be square");
    if ((weights.array() < 0.0).any()) {
        throw DataError("roadgraph: negative weights are not allowed in a Laplacian");
    }

    Eigen::MatrixXd w = weights;
    if (symmetrize) {
        w += weights.transpose().eval();
    } else if (!weights.isApprox(weights.transpose(), 1e-12)) {
        throw DataError("roadgraph: weights must be symmetric when symmetrize is off");
    }

    Eigen::VectorXd inv_sqrt_degree(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double d = w.row(i).sum();
        inv_sqrt_degree(i) = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
    }

    GraphLaplacian lap;
    lap.kind = kind;
    lap.matrix = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            lap.matrix(i, j) -= inv_sqrt_degree(i) * w(i, j) * inv_sqrt_degree(j);
        }
    }
    // Power iteration approaches the spectral radius from below; a small
    // inflation (capped at the normalized-Laplacian bound 2) keeps the
    // rescaled spectrum inside [-1, 1].
    const double estimate = estimate_lambda_max(lap, 1e-12, 20000);
    lap.lambda_max = std::min(2.0, estimate * (1.0 + 3e-6));
    return lap;
}

GraphLaplacian motif_laplacian(const MotifAdjacency& adj, bool symmetrize) {
    return normalized_laplacian(adj.weights.cast<double>(), symmetrize,
                                LaplacianKind::MotifLaplacian);
}

double estimate_lambda_max(const GraphLaplacian& lap, double tol, int max_iters) {
    const Eigen::Index n = lap.matrix.rows();
    if (n == 0) throw DataError("roadgraph: empty Laplacian");
    if (max_iters < 1) throw DataError("roadgraph: max_iters must be >= 1");
    if (!lap.matrix.isApprox(lap.matrix.transpose(), 1e-10)) {
        throw DataError("roadgraph: lambda_max estimation expects a symmetric matrix");
    }

    Rng rng(0x5eed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform(0.5, 1.5);
    v.normalize();

    double estimate = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        Eigen::VectorXd w = lap.matrix * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;  // exactly null operator
        const double next = norm;
        v = w / norm;
        if (it > 0 && std::abs(next - estimate) <= tol * std::max(1.0, next)) {
            return next;
        }
        estimate = next;
    }
    return 2.0;  // safe bound for normalized Laplacians
}

GraphLaplacian rescale_laplacian(const GraphLaplacian& lap) {
    if (!(lap.lambda_max > 0.0)) {
        throw DataError("roadgraph: rescale requires lambda_max > 0");
    }
    GraphLaplacian out;
    out.kind = lap.kind;
    out.matrix = (2.0 / lap.lambda_max) * lap.matrix -
                 Eigen::MatrixXd::Identity(lap.matrix.rows(), lap.matrix.cols());
    out.lambda_max = 1.0;  // exact bound after rescaling
    return out;
}

GraphLaplacian rescaled_motif_laplacian(const DirectedRoadGraph& graph, int threads) {
    const MotifAdjacency adj = count_motif_participation(graph, threads);
    return rescale_laplacian(motif_laplacian(adj, /*symmetrize=*/true));
}

DirectedRoadGraph load_edge_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("roadgraph: cannot open edge list '" + path.string() + "'");
    std::vector<std::pair<int, int>> edges;
    int max_id = -1;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        int from = 0, to = 0;
        char comma = 0;
        std::istringstream ss(line);
        if (!(ss >> from >> comma >> to) || comma != ',') {
            throw DataError("roadgraph: malformed edge at " + path.string() + ":" +
                            std::to_string(line_no));
        }
        edges.emplace_back(from, to);
        max_id = std::max({max_id, from, to});
    }
    if (max_id < 1) throw DataError("roadgraph: edge list '" + path.string() + "' has no edges");
    return DirectedRoadGraph(max_id + 1, edges);
}

void save_edge_list(const DirectedRoadGraph& graph, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("roadgraph: cannot write edge list '" + path.string() + "'");
    for (const auto& [from, to] : graph.edges()) {
        out << from << ',' << to << '\n';
    }
}

void save_motif_adjacency_csv(const CountMatrix& weights, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("roadgraph: cannot write '" + path.string() + "'");
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        for (Eigen::Index j = 0; j < weights.cols(); ++j) {
            if (j > 0) out << ',';
            out << weights(i, j);
        }
        out << '\n';
    }
}

}  // namespace motifcast::roadgraph
