#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ampu/poly.hpp"

namespace ampu {

// Node of a labeled tree: `counts` holds the number of children per mark
// for internal nodes and the exponent tuple for leaves. Children are
// ordered by mark, then by enumeration order within a mark.
struct TreeNode {
    int type = 0;   // coordinate index in [0, N)
    int mark = 0;   // output coordinate in [0, q)
    std::vector<int> counts;
    std::vector<TreeNode> children;
};

// Rooted labeled tree with t generations. The root carries only a type and
// has exactly one child.
struct LabeledTree {
    int t = 0;
    int q = 1;
    int root_type = 0;
    TreeNode child;
};

// T_node_r enumerates the family rooted at i whose child type differs from
// i; T_directed_r additionally excludes the type j.
enum class TreeFamily { node, directed };

// Complete duplicate-free enumeration of the tree family. Scale guards:
// N <= 8, t <= 3, d <= 2, q <= 2.
std::vector<LabeledTree> enumerate_trees(int N, int q, int d, int t,
                                         TreeFamily family, int i, int r,
                                         int j = -1);

// Canonical bracket rendering for golden-file comparisons.
std::string render_tree(const LabeledTree& tree);

// True iff every root path has pairwise-distinct consecutive type triples.
bool non_backtracking(const LabeledTree& tree);

// Sum over the family of A(T) * Gamma(T, c) * x(T). `coeffs[l][r]` is the
// degree <= d polynomial giving f^l_r as a function of the q input
// coordinates (time-independent); its monomial coefficients are the
// c^l_{i_1..i_q}(r, .) values. x0 is N x q.
double tree_sum(const Eigen::MatrixXd& A,
                const std::vector<std::vector<MultiPoly>>& coeffs,
                const Eigen::MatrixXd& x0, int d, int t, TreeFamily family,
                int i, int r, int j = -1);

}  // namespace ampu
