#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fairtree {

using VertexId = std::int32_t;

/// Raised for malformed tabular input; the message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Colored points. Features are stored column-major so distance kernels can
/// stream one feature across all points.
class PointDataset {
public:
    PointDataset() = default;
    PointDataset(std::vector<std::string> ids, std::size_t dim, std::vector<double> columns,
                 std::vector<int> colors, std::vector<std::string> color_labels);

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    std::size_t num_colors() const { return color_labels_.size(); }

    std::span<const double> column(std::size_t d) const { return {columns_.data() + d * size(), size()}; }
    double feature(std::size_t row, std::size_t d) const { return columns_[d * size() + row]; }
    const std::string& id(std::size_t row) const { return ids_[row]; }
    int color(std::size_t row) const { return colors_[row]; }
    std::span<const int> colors() const { return colors_; }
    const std::vector<std::string>& color_labels() const { return color_labels_; }

    /// Rows in the given order (used for subsampling).
    PointDataset select(std::span<const std::size_t> rows) const;

    /// Rescales every feature to [0, 1]; constant features map to 0.
    PointDataset min_max_normalized() const;

private:
    std::vector<std::string> ids_;
    std::size_t dim_ = 0;
    std::vector<double> columns_;
    std::vector<int> colors_;
    std::vector<std::string> color_labels_;
};

struct CsvOptions {
    char delimiter = ',';
    std::string id_column;  // empty: ids are 0-based row numbers
};

/// Reads delimiter-separated text with a header row. Colors are mapped to dense
/// indices 0..λ-1 in first-appearance order; every other column must be numeric.
PointDataset load_points(std::istream& in, const std::string& color_column, const CsvOptions& opts = {});

/// Complete symmetric similarity graph with a dense row-major weight matrix.
/// The diagonal is stored as 0 and never read as an edge.
class WeightedGraph {
public:
    WeightedGraph() = default;

    /// Validates symmetry and non-negativity; the diagonal is ignored.
    static WeightedGraph from_dense(std::size_t n, std::vector<double> weights);

    /// Pairs not listed have weight 0.
    struct Edge {
        VertexId u;
        VertexId v;
        double w;
    };
    static WeightedGraph from_edges(std::size_t n, std::span<const Edge> edges);

    std::size_t size() const { return n_; }
    double weight(VertexId u, VertexId v) const { return w_[static_cast<std::size_t>(u) * n_ + static_cast<std::size_t>(v)]; }
    std::span<const double> row(VertexId u) const { return {w_.data() + static_cast<std::size_t>(u) * n_, n_}; }
    const std::vector<double>& dense() const { return w_; }

private:
    std::size_t n_ = 0;
    std::vector<double> w_;
};

/// w(i, j) = 1 / (1 + euclidean distance).
WeightedGraph similarity_from_points(const PointDataset& data);

struct SyntheticOptions {
    std::size_t dim = 2;
    std::size_t blobs = 8;          // shared cluster centers
    double center_spread = 4.0;     // centers uniform in [-spread, spread]^dim
    double blob_sigma = 1.0;
    double color_shift = 0.75;      // offset of color ℓ along the first axis, times ℓ
};

/// Gaussian blobs shared by all colors, each color shifted along the first axis.
/// Color counts are proportions·n rounded by largest remainder.
PointDataset synthetic_colored_points(std::size_t n, std::span<const double> proportions, std::uint64_t seed,
                                      const SyntheticOptions& opts = {});

/// Largest-remainder rounding of proportions·n; throws on invalid proportions.
std::vector<std::size_t> apportion(std::size_t n, std::span<const double> proportions);

}  // namespace fairtree
