#include "fairtree/tree_io.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>
#include <vector>

#include "fairtree/graph.hpp"

namespace fairtree {

namespace {

std::vector<std::string> tokens_of(const std::string& line) {
    std::string cleaned = line;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream ss(cleaned);
    std::vector<std::string> toks;
    for (std::string tok; ss >> tok;) toks.push_back(tok);
    return toks;
}

long long parse_int(const std::string& tok, std::size_t line_no) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
        // Linkage files often store ids as floats ("3.0").
        double d = 0.0;
        const auto [p2, e2] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (e2 != std::errc{} || p2 != tok.data() + tok.size() || d != static_cast<double>(static_cast<long long>(d))) {
            throw ParseError("line " + std::to_string(line_no) + ": expected an integer, found '" + tok + "'");
        }
        return static_cast<long long>(d);
    }
    return v;
}

}  // namespace

void write_tree(std::ostream& out, const HierarchyTree& t) {
    for (NodeId v : t.preorder()) {
        out << v << ' ';
        if (t.parent(v) == kNoNode) out << '-';
        else out << t.parent(v);
        out << ' ';
        if (t.is_leaf(v)) out << t.leaf_label(v);
        else out << '-';
        out << '\n';
    }
}

HierarchyTree read_tree(std::istream& in) {
    struct Row {
        long long id, parent, leaf;
    };
    std::vector<Row> rows;
    std::string line;
    std::size_t line_no = 0;
    long long max_id = -1;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = tokens_of(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        if (toks.size() != 3) throw ParseError("line " + std::to_string(line_no) + ": expected 'id parent leaf'");
        Row r{};
        r.id = parse_int(toks[0], line_no);
        r.parent = toks[1] == "-" ? -1 : parse_int(toks[1], line_no);
        r.leaf = toks[2] == "-" ? -1 : parse_int(toks[2], line_no);
        if (r.id < 0) throw ParseError("line " + std::to_string(line_no) + ": negative node id");
        max_id = std::max(max_id, r.id);
        rows.push_back(r);
    }
    if (rows.empty()) throw ParseError("tree file has no nodes");
    if (rows.front().parent != -1) throw ParseError("first line must be the root");

    std::vector<TreeNode> nodes(static_cast<std::size_t>(max_id + 1));
    for (auto& n : nodes) n.alive = false;
    for (const auto& r : rows) {
        auto& n = nodes[static_cast<std::size_t>(r.id)];
        if (n.alive) throw ParseError("node id " + std::to_string(r.id) + " appears twice");
        n.alive = true;
        n.parent = static_cast<NodeId>(r.parent);
        n.leaf = static_cast<VertexId>(r.leaf);
    }
    for (const auto& r : rows) {
        if (r.parent < 0) continue;
        if (r.parent > max_id || !nodes[static_cast<std::size_t>(r.parent)].alive) {
            throw ParseError("node " + std::to_string(r.id) + " names an unknown parent");
        }
        nodes[static_cast<std::size_t>(r.parent)].children.push_back(static_cast<NodeId>(r.id));
    }
    return HierarchyTree(std::move(nodes), static_cast<NodeId>(rows.front().id));
}

HierarchyTree read_linkage(std::istream& in) {
    std::vector<std::pair<long long, long long>> merges;
    std::vector<long long> sizes;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto toks = tokens_of(line);
        if (toks.empty() || toks[0].front() == '#') continue;
        if (toks.size() != 4) throw ParseError("line " + std::to_string(line_no) + ": expected 'left right height size'");
        merges.emplace_back(parse_int(toks[0], line_no), parse_int(toks[1], line_no));
        sizes.push_back(parse_int(toks[3], line_no));
    }
    const auto n = static_cast<long long>(merges.size()) + 1;
    TreeBuilder b;
    for (long long v = 0; v < n; ++v) b.add_leaf(static_cast<VertexId>(v));
    std::vector<std::size_t> sz(static_cast<std::size_t>(2 * n - 1), 1);
    std::vector<char> used(static_cast<std::size_t>(2 * n - 1), 0);
    for (std::size_t i = 0; i < merges.size(); ++i) {
        const auto [l, r] = merges[i];
        const long long self = n + static_cast<long long>(i);
        for (long long c : {l, r}) {
            if (c < 0 || c >= self) throw ParseError("linkage row " + std::to_string(i) + " references an invalid id");
            if (used[static_cast<std::size_t>(c)]) throw ParseError("linkage row " + std::to_string(i) + " reuses id " + std::to_string(c));
            used[static_cast<std::size_t>(c)] = 1;
        }
        if (l == r) throw ParseError("linkage row " + std::to_string(i) + " merges a cluster with itself");
        sz[static_cast<std::size_t>(self)] = sz[static_cast<std::size_t>(l)] + sz[static_cast<std::size_t>(r)];
        if (static_cast<long long>(sz[static_cast<std::size_t>(self)]) != sizes[i]) {
            throw ParseError("linkage row " + std::to_string(i) + " declares size " + std::to_string(sizes[i]) +
                             " but merges " + std::to_string(sz[static_cast<std::size_t>(self)]) + " leaves");
        }
        b.add_internal({static_cast<NodeId>(l), static_cast<NodeId>(r)});
    }
    b.set_root(static_cast<NodeId>(2 * n - 2));
    return std::move(b).finish();
}

HierarchyTree parse_nested(std::string_view text) {
    TreeBuilder b;
    std::size_t pos = 0;
    const auto skip_ws = [&] {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\n' || text[pos] == '\t')) ++pos;
    };
    // Preorder ids: reserve a slot for each internal node before its children.
    const auto parse = [&](auto&& self) -> NodeId {
        skip_ws();
        if (pos >= text.size()) throw ParseError("unexpected end of nested tree");
        if (text[pos] == '(') {
            ++pos;
            const NodeId id = b.add_internal({});
            std::vector<NodeId> kids;
            while (true) {
                kids.push_back(self(self));
                skip_ws();
                if (pos < text.size() && text[pos] == ',') {
                    ++pos;
                    continue;
                }
                if (pos < text.size() && text[pos] == ')') {
                    ++pos;
                    break;
                }
                throw ParseError("expected ',' or ')' at offset " + std::to_string(pos));
            }
            b.set_children(id, std::move(kids));
            return id;
        }
        const std::size_t start = pos;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        if (start == pos) throw ParseError("expected a vertex label at offset " + std::to_string(start));
        int label = 0;
        std::from_chars(text.data() + start, text.data() + pos, label);
        return b.add_leaf(label);
    };
    const NodeId root = parse(parse);
    skip_ws();
    if (pos != text.size()) throw ParseError("trailing characters in nested tree");
    b.set_root(root);
    return std::move(b).finish();
}

std::string to_nested(const HierarchyTree& t, NodeId v) {
    if (t.is_leaf(v)) return std::to_string(t.leaf_label(v));
    std::string s = "(";
    bool first = true;
    for (NodeId c : t.children(v)) {
        if (!first) s += ',';
        first = false;
        s += to_nested(t, c);
    }
    return s + ")";
}

std::string to_nested(const HierarchyTree& t) { return to_nested(t, t.root()); }

bool same_topology(const HierarchyTree& a, const HierarchyTree& b) {
    return a.num_leaves() == b.num_leaves() && to_nested(a) == to_nested(b);
}

}  // namespace fairtree
