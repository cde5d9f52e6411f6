#include "fairtree/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "fairtree/random.hpp"
#include "fairtree/simd.hpp"

namespace fairtree {

PointDataset::PointDataset(std::vector<std::string> ids, std::size_t dim, std::vector<double> columns,
                           std::vector<int> colors, std::vector<std::string> color_labels)
    : ids_(std::move(ids)),
      dim_(dim),
      columns_(std::move(columns)),
      colors_(std::move(colors)),
      color_labels_(std::move(color_labels)) {
    if (dim_ == 0) throw std::invalid_argument("dataset needs at least one feature");
    if (columns_.size() != dim_ * ids_.size() || colors_.size() != ids_.size()) {
        throw std::invalid_argument("dataset arrays have inconsistent lengths");
    }
    if (color_labels_.empty()) throw std::invalid_argument("dataset needs at least one color");
    for (int c : colors_) {
        if (c < 0 || static_cast<std::size_t>(c) >= color_labels_.size()) {
            throw std::invalid_argument("color index out of range");
        }
    }
}

PointDataset PointDataset::select(std::span<const std::size_t> rows) const {
    std::vector<std::string> ids;
    std::vector<int> colors;
    std::vector<double> columns(rows.size() * dim_);
    ids.reserve(rows.size());
    colors.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        ids.push_back(ids_.at(rows[k]));
        colors.push_back(colors_[rows[k]]);
        for (std::size_t d = 0; d < dim_; ++d) columns[d * rows.size() + k] = feature(rows[k], d);
    }
    return {std::move(ids), dim_, std::move(columns), std::move(colors), color_labels_};
}

PointDataset PointDataset::min_max_normalized() const {
    std::vector<double> columns = columns_;
    const std::size_t n = size();
    for (std::size_t d = 0; d < dim_; ++d) {
        auto first = columns.begin() + static_cast<std::ptrdiff_t>(d * n);
        auto last = first + static_cast<std::ptrdiff_t>(n);
        if (first == last) continue;
        const auto [lo, hi] = std::minmax_element(first, last);
        const double low = *lo;
        const double range = *hi - *lo;
        for (auto it = first; it != last; ++it) *it = range > 0.0 ? (*it - low) / range : 0.0;
    }
    return {ids_, dim_, std::move(columns), colors_, color_labels_};
}

namespace {

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

PointDataset load_points(std::istream& in, const std::string& color_column, const CsvOptions& opts) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        for (auto cell : split(line, opts.delimiter)) header.emplace_back(trim(cell));
        break;
    }
    if (header.empty()) throw ParseError("input is empty (missing header row)");

    const auto find_col = [&](const std::string& name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto color_idx = find_col(color_column);
    if (color_idx < 0) throw ParseError("color column not found: '" + color_column + "'");
    std::ptrdiff_t id_idx = -1;
    if (!opts.id_column.empty()) {
        id_idx = find_col(opts.id_column);
        if (id_idx < 0) throw ParseError("id column not found: '" + opts.id_column + "'");
    }
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (static_cast<std::ptrdiff_t>(c) != color_idx && static_cast<std::ptrdiff_t>(c) != id_idx) {
            feature_cols.push_back(c);
        }
    }
    if (feature_cols.empty()) throw ParseError("no numeric feature columns");

    std::vector<std::string> ids;
    std::vector<std::vector<double>> rows;
    std::vector<int> colors;
    std::vector<std::string> labels;
    std::unordered_map<std::string, int> label_index;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split(line, opts.delimiter);
        if (cells.size() != header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                             " fields, found " + std::to_string(cells.size()));
        }
        std::vector<double> values;
        values.reserve(feature_cols.size());
        for (std::size_t c : feature_cols) {
            const auto cell = trim(cells[c]);
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError("line " + std::to_string(line_no) + ", column '" + header[c] +
                                 "': non-numeric value '" + std::string(cell) + "'");
            }
            values.push_back(v);
        }
        const std::string label(trim(cells[static_cast<std::size_t>(color_idx)]));
        auto [it, inserted] = label_index.try_emplace(label, static_cast<int>(labels.size()));
        if (inserted) labels.push_back(label);
        colors.push_back(it->second);
        ids.push_back(id_idx >= 0 ? std::string(trim(cells[static_cast<std::size_t>(id_idx)]))
                                  : std::to_string(rows.size()));
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError("no data rows");

    std::vector<std::string> sorted_ids = ids;
    std::sort(sorted_ids.begin(), sorted_ids.end());
    if (std::adjacent_find(sorted_ids.begin(), sorted_ids.end()) != sorted_ids.end()) {
        throw ParseError("duplicate point id");
    }

    const std::size_t n = rows.size();
    const std::size_t dim = feature_cols.size();
    std::vector<double> columns(n * dim);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t d = 0; d < dim; ++d) columns[d * n + r] = rows[r][d];
    }
    return {std::move(ids), dim, std::move(columns), std::move(colors), std::move(labels)};
}

WeightedGraph WeightedGraph::from_dense(std::size_t n, std::vector<double> weights) {
    if (weights.size() != n * n) throw std::invalid_argument("weight matrix must be n*n");
    for (std::size_t i = 0; i < n; ++i) {
        weights[i * n + i] = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double a = weights[i * n + j];
            if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("weights must be finite and non-negative");
            if (a != weights[j * n + i]) throw std::invalid_argument("weight matrix is not symmetric");
        }
    }
    WeightedGraph g;
    g.n_ = n;
    g.w_ = std::move(weights);
    return g;
}

WeightedGraph WeightedGraph::from_edges(std::size_t n, std::span<const Edge> edges) {
    std::vector<double> w(n * n, 0.0);
    for (const auto& e : edges) {
        if (e.u < 0 || e.v < 0 || static_cast<std::size_t>(e.u) >= n || static_cast<std::size_t>(e.v) >= n) {
            throw std::out_of_range("edge endpoint out of range");
        }
        if (e.u == e.v) throw std::invalid_argument("self-loops are not allowed");
        w[static_cast<std::size_t>(e.u) * n + static_cast<std::size_t>(e.v)] = e.w;
        w[static_cast<std::size_t>(e.v) * n + static_cast<std::size_t>(e.u)] = e.w;
    }
    return from_dense(n, std::move(w));
}

WeightedGraph similarity_from_points(const PointDataset& data) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("dataset is empty");
    const auto& k = simd::active();
    std::vector<double> w(n * n);
    std::vector<double> acc(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t d = 0; d < data.dim(); ++d) {
            const auto col = data.column(d);
            k.accumulate_sq_diff(col.data(), col[i], acc.data(), n);
        }
        k.similarity_from_sq_dist(acc.data(), w.data() + i * n, n);
        w[i * n + i] = 0.0;
    }
    return WeightedGraph::from_dense(n, std::move(w));
}

std::vector<std::size_t> apportion(std::size_t n, std::span<const double> proportions) {
    if (proportions.empty()) throw std::invalid_argument("proportions must be non-empty");
    double total = 0.0;
    for (double p : proportions) {
        if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("proportions must lie in [0, 1]");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("proportions must sum to 1");
    if (n < proportions.size()) throw std::invalid_argument("need n >= number of colors");

    std::vector<std::size_t> counts(proportions.size());
    std::vector<std::pair<double, std::size_t>> remainders;
    std::size_t assigned = 0;
    for (std::size_t l = 0; l < proportions.size(); ++l) {
        const double exact = proportions[l] * static_cast<double>(n);
        counts[l] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[l];
        remainders.emplace_back(exact - std::floor(exact), l);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++counts[remainders[r % remainders.size()].second];
    return counts;
}

PointDataset synthetic_colored_points(std::size_t n, std::span<const double> proportions, std::uint64_t seed,
                                      const SyntheticOptions& opts) {
    const auto counts = apportion(n, proportions);
    if (opts.dim == 0 || opts.blobs == 0) throw std::invalid_argument("synthetic data needs dim >= 1 and blobs >= 1");
    Rng rng(seed);

    std::vector<double> centers(opts.blobs * opts.dim);
    for (double& c : centers) c = (2.0 * rng.uniform() - 1.0) * opts.center_spread;

    std::vector<int> colors;
    colors.reserve(n);
    for (std::size_t l = 0; l < counts.size(); ++l) colors.insert(colors.end(), counts[l], static_cast<int>(l));
    rng.shuffle(std::span<int>(colors));

    std::vector<double> columns(n * opts.dim);
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t blob = rng.below(opts.blobs);
        for (std::size_t d = 0; d < opts.dim; ++d) {
            double x = centers[blob * opts.dim + d] + opts.blob_sigma * rng.normal();
            if (d == 0) x += opts.color_shift * colors[r];
            columns[d * n + r] = x;
        }
    }

    std::vector<std::string> ids(n);
    for (std::size_t r = 0; r < n; ++r) ids[r] = std::to_string(r);
    std::vector<std::string> labels;
    for (std::size_t l = 0; l < counts.size(); ++l) labels.push_back("c" + std::to_string(l));
    return {std::move(ids), opts.dim, std::move(columns), std::move(colors), std::move(labels)};
}

}  // namespace fairtree
