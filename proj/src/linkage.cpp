#include "fairtree/linkage.hpp"

#include <limits>
#include <stdexcept>
#include <vector>

#include "fairtree/simd.hpp"

namespace fairtree {

HierarchyTree build_average_linkage(const WeightedGraph& g) {
    const std::size_t n = g.size();
    if (n == 0) throw std::invalid_argument("average linkage needs at least one vertex");
    TreeBuilder b;
    for (std::size_t v = 0; v < n; ++v) b.add_leaf(static_cast<VertexId>(v));
    if (n == 1) {
        b.set_root(0);
        return std::move(b).finish();
    }

    constexpr double kGone = -std::numeric_limits<double>::infinity();
    const auto& k = simd::active();

    // Slot i holds the cluster whose smallest vertex is i.
    std::vector<double> sim = g.dense();
    for (std::size_t i = 0; i < n; ++i) sim[i * n + i] = kGone;
    std::vector<std::size_t> count(n, 1);
    std::vector<NodeId> node(n);
    std::vector<char> active(n, 1);
    std::vector<std::size_t> best(n);
    std::vector<double> best_val(n);
    for (std::size_t i = 0; i < n; ++i) node[i] = static_cast<NodeId>(i);

    const auto refresh = [&](std::size_t i) {
        best[i] = k.argmax(sim.data() + i * n, n);
        best_val[i] = sim[i * n + best[i]];
    };
    for (std::size_t i = 0; i < n; ++i) refresh(i);

    std::vector<double> merged(n);
    NodeId last = kNoNode;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (active[i] && (pick == n || best_val[i] > best_val[pick])) pick = i;
        }
        const std::size_t a = std::min(pick, best[pick]);
        const std::size_t z = std::max(pick, best[pick]);

        k.weighted_mean(sim.data() + a * n, sim.data() + z * n, static_cast<double>(count[a]),
                        static_cast<double>(count[z]), merged.data(), n);
        merged[a] = kGone;
        merged[z] = kGone;
        std::copy(merged.begin(), merged.end(), sim.begin() + static_cast<std::ptrdiff_t>(a * n));
        std::fill(sim.begin() + static_cast<std::ptrdiff_t>(z * n), sim.begin() + static_cast<std::ptrdiff_t>((z + 1) * n), kGone);
        active[z] = 0;
        count[a] += count[z];
        last = b.add_internal({node[a], node[z]});
        node[a] = last;

        for (std::size_t r = 0; r < n; ++r) {
            if (!active[r] || r == a) continue;
            sim[r * n + a] = merged[r];
            sim[r * n + z] = kGone;
            if (best[r] == a || best[r] == z) {
                refresh(r);
            } else if (merged[r] > best_val[r] || (merged[r] == best_val[r] && a < best[r])) {
                best[r] = a;
                best_val[r] = merged[r];
            }
        }
        refresh(a);
    }
    b.set_root(last);
    return std::move(b).finish();
}

}  // namespace fairtree
