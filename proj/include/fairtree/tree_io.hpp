#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "fairtree/tree.hpp"

namespace fairtree {

/// One node per line, `id parent_id leaf_label`, with `-` for "none".
/// Root first, parents before children, children in order. Lines starting
/// with '#' are comments.
void write_tree(std::ostream& out, const HierarchyTree& t);
HierarchyTree read_tree(std::istream& in);

/// Linkage matrix rows `left right height size`, whitespace or comma separated.
/// Leaves are 0..n-1; row i creates node n+i. Heights are ignored.
HierarchyTree read_linkage(std::istream& in);

/// Parenthesized form with vertex labels, e.g. "((0,1),(2,3))". A bare label
/// is a single-leaf tree. Node ids are assigned in preorder.
HierarchyTree parse_nested(std::string_view text);

/// Inverse of parse_nested (ids are not preserved).
std::string to_nested(const HierarchyTree& t);
std::string to_nested(const HierarchyTree& t, NodeId v);

/// Ordered-topology equality over leaf labels, ignoring node ids.
bool same_topology(const HierarchyTree& a, const HierarchyTree& b);

}  // namespace fairtree
