#include "ampu/tree_oracle.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ampu {

namespace {

void check_scale(int N, int q, int d, int t) {
    if (N < 2 || N > 8 || t < 1 || t > 3 || d < 0 || d > 2 || q < 1 || q > 2)
        throw std::invalid_argument(
            "tree enumeration limited to N<=8, t<=3, d<=2, q<=2");
}

// All exponent tuples (e_1..e_q) with lo <= sum <= hi, lexicographic.
std::vector<std::vector<int>> exponent_tuples(int q, int lo, int hi) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(q, 0);
    while (true) {
        int s = 0;
        for (int v : cur) s += v;
        if (s >= lo && s <= hi) out.push_back(cur);
        int pos = q - 1;
        while (pos >= 0 && cur[pos] == hi) cur[pos--] = 0;
        if (pos < 0) break;
        cur[pos] += 1;
    }
    return out;
}

struct Enumerator {
    int N, q, d, t;

    // All subtrees rooted at a node of the given type/mark at generation g,
    // whose children must avoid {type, parent_type}.
    std::vector<TreeNode> subtrees(int type, int mark, int g, int parent_type) {
        std::vector<TreeNode> out;
        if (g == t) {
            for (const auto& e : exponent_tuples(q, 0, d)) {
                TreeNode leaf;
                leaf.type = type;
                leaf.mark = mark;
                leaf.counts = e;
                out.push_back(std::move(leaf));
            }
            return out;
        }
        // Natural leaf: no children, zero tuple.
        {
            TreeNode leaf;
            leaf.type = type;
            leaf.mark = mark;
            leaf.counts.assign(q, 0);
            out.push_back(std::move(leaf));
        }
        std::vector<int> allowed;
        for (int l = 0; l < N; ++l)
            if (l != type && l != parent_type) allowed.push_back(l);
        for (const auto& counts : exponent_tuples(q, 1, d)) {
            // Per-mark variants: each child slot picks a type and a subtree.
            std::vector<std::vector<TreeNode>> slot_options;
            bool feasible = true;
            for (int s = 0; s < q && feasible; ++s) {
                for (int kid = 0; kid < counts[s]; ++kid) {
                    std::vector<TreeNode> opts;
                    for (int l : allowed) {
                        auto subs = subtrees(l, s, g + 1, type);
                        opts.insert(opts.end(), subs.begin(), subs.end());
                    }
                    if (opts.empty()) feasible = false;
                    slot_options.push_back(std::move(opts));
                }
            }
            if (!feasible || slot_options.empty()) continue;
            // Cartesian product over ordered child slots.
            std::vector<size_t> idx(slot_options.size(), 0);
            while (true) {
                TreeNode node;
                node.type = type;
                node.mark = mark;
                node.counts = counts;
                for (size_t k = 0; k < idx.size(); ++k)
                    node.children.push_back(slot_options[k][idx[k]]);
                out.push_back(std::move(node));
                size_t pos = idx.size();
                while (pos > 0) {
                    --pos;
                    if (++idx[pos] < slot_options[pos].size()) break;
                    idx[pos] = 0;
                    if (pos == 0) {
                        pos = SIZE_MAX;
                        break;
                    }
                }
                if (pos == SIZE_MAX) break;
            }
        }
        return out;
    }
};

bool nb_walk(const TreeNode& node, int parent_type) {
    for (const auto& c : node.children) {
        if (c.type == node.type || c.type == parent_type) return false;
        if (!nb_walk(c, node.type)) return false;
    }
    return true;
}

void render_node(const TreeNode& n, std::ostringstream& os) {
    os << '(' << n.type << ',' << n.mark << ",[";
    for (size_t s = 0; s < n.counts.size(); ++s) {
        if (s) os << ' ';
        os << n.counts[s];
    }
    os << ']';
    for (const auto& c : n.children) render_node(c, os);
    os << ')';
}

}  // namespace

std::vector<LabeledTree> enumerate_trees(int N, int q, int d, int t,
                                         TreeFamily family, int i, int r,
                                         int j) {
    check_scale(N, q, d, t);
    if (i < 0 || i >= N || r < 0 || r >= q)
        throw std::invalid_argument("root index or mark out of range");
    if (family == TreeFamily::directed && (j < 0 || j >= N || j == i))
        throw std::invalid_argument("directed family needs a distinct j");
    Enumerator e{N, q, d, t};
    std::vector<LabeledTree> out;
    for (int l = 0; l < N; ++l) {
        if (l == i) continue;
        if (family == TreeFamily::directed && l == j) continue;
        // The root path (i, l, grandchild) must be non-backtracking, which
        // the recursive exclusion {l, i} already enforces.
        for (auto& sub : e.subtrees(l, r, 1, i)) {
            LabeledTree tree;
            tree.t = t;
            tree.q = q;
            tree.root_type = i;
            tree.child = std::move(sub);
            out.push_back(std::move(tree));
        }
    }
    return out;
}

std::string render_tree(const LabeledTree& tree) {
    std::ostringstream os;
    os << tree.root_type;
    render_node(tree.child, os);
    return os.str();
}

bool non_backtracking(const LabeledTree& tree) {
    if (tree.child.type == tree.root_type) return false;
    return nb_walk(tree.child, tree.root_type);
}

namespace {

double coeff_of(const std::vector<std::vector<MultiPoly>>& coeffs, int type,
                int mark, const std::vector<int>& exps) {
    const auto& terms = coeffs[type][mark].terms();
    auto it = terms.find(exps);
    return it == terms.end() ? 0.0 : it->second;
}

double node_weight(const TreeNode& n, int parent_type, const Eigen::MatrixXd& A,
                   const std::vector<std::vector<MultiPoly>>& coeffs,
                   const Eigen::MatrixXd& x0) {
    double w = A(n.type, parent_type) * coeff_of(coeffs, n.type, n.mark, n.counts);
    if (n.children.empty()) {
        for (size_t s = 0; s < n.counts.size(); ++s)
            w *= std::pow(x0(n.type, static_cast<int>(s)), n.counts[s]);
    } else {
        for (const auto& c : n.children) w *= node_weight(c, n.type, A, coeffs, x0);
    }
    return w;
}

}  // namespace

double tree_sum(const Eigen::MatrixXd& A,
                const std::vector<std::vector<MultiPoly>>& coeffs,
                const Eigen::MatrixXd& x0, int d, int t, TreeFamily family,
                int i, int r, int j) {
    const int N = static_cast<int>(A.rows());
    if (A.cols() != N || x0.rows() != N)
        throw std::invalid_argument("A and x0 shapes inconsistent");
    if (static_cast<int>(coeffs.size()) != N)
        throw std::invalid_argument("coefficient table must have N rows");
    const int q = static_cast<int>(x0.cols());
    for (const auto& row : coeffs) {
        if (static_cast<int>(row.size()) != q)
            throw std::invalid_argument("coefficient table must have q marks");
        for (const auto& p : row)
            if (p.nvars() != q || p.degree() > d)
                throw std::invalid_argument("coefficient polynomial outside (q,d)");
    }
    double total = 0.0;
    for (const auto& tree : enumerate_trees(N, q, d, t, family, i, r, j))
        total += node_weight(tree.child, tree.root_type, A, coeffs, x0);
    return total;
}

}  // namespace ampu
