#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <queue>
#include <utility>
#include <vector>

#include "lzsetkit/solver.hpp"

namespace lzsetkit {

void MilpProblem::validate() const {
    lp.validate();
    for (Index j : binaries) {
        require(j >= 0 && j < lp.num_vars(), "MilpProblem: binary index out of range");
        require(lp.lower(j) >= 0.0 && lp.upper(j) <= 1.0, "MilpProblem: binary bounds must lie in [0,1]");
    }
}

namespace {

struct Node {
    std::vector<std::pair<Index, double>> fixings;  // (variable, 0 or 1)
    double bound;  // parent LP objective (lower bound for minimization)
    long seq;      // creation order, for deterministic tie-breaking
    std::shared_ptr<const LpBasis> warm;  // parent's optimal basis
};

struct BestBoundOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound;  // smaller bound first
        return a.seq > b.seq;
    }
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opts) {
    p.validate();
    MilpSolution out;
    if (p.binaries.empty()) {
        const LpSolution base = solve_lp(p.lp, opts.lp);
        out.nodes_explored = 1;
        if (base.status == LpStatus::kOptimal) {
            out.status = MilpStatus::kOptimal;
            out.x = base.x;
            out.objective_value = base.objective_value;
        } else {
            out.status = MilpStatus::kInfeasible;
        }
        return out;
    }

    double incumbent = kInf;
    Vector incumbent_x;
    long seq = 0;

    std::vector<Node> stack;  // depth-first phase
    std::priority_queue<Node, std::vector<Node>, BestBoundOrder> heap;  // best-bound phase
    stack.push_back(Node{{}, -kInf, seq++, nullptr});
    bool best_bound_mode = false;

    // One mutable working copy; node bound fixings are applied and then undone.
    LpProblem lp = p.lp;

    while (true) {
        Node node;
        if (!best_bound_mode) {
            if (stack.empty()) break;
            node = std::move(stack.back());
            stack.pop_back();
        } else {
            if (heap.empty() && stack.empty()) break;
            // Drain any depth-first leftovers through the heap as well.
            if (!stack.empty()) {
                for (Node& n : stack) heap.push(std::move(n));
                stack.clear();
            }
            if (heap.empty()) break;
            node = heap.top();
            heap.pop();
        }
        if (node.bound >= incumbent - opts.absolute_gap) continue;  // pruned by bound

        ++out.nodes_explored;
        if (out.nodes_explored > opts.max_nodes) {
            out.status = MilpStatus::kNodeLimit;
            if (incumbent < kInf) {
                out.x = incumbent_x;
                out.objective_value = incumbent;
            }
            return out;
        }
        if (!best_bound_mode && out.nodes_explored > opts.depth_first_node_cap)
            best_bound_mode = true;

        for (const auto& [j, v] : node.fixings) {
            lp.lower(j) = v;
            lp.upper(j) = v;
        }
        LpBasis basis;
        if (node.warm) basis = *node.warm;
        const LpSolution rel = solve_lp(lp, opts.lp, &basis);
        for (const auto& [j, v] : node.fixings) {
            lp.lower(j) = p.lp.lower(j);
            lp.upper(j) = p.lp.upper(j);
        }
        if (rel.status == LpStatus::kInfeasible) continue;
        if (rel.status == LpStatus::kUnbounded) {
            // A relaxation unbounded below makes the MILP unbounded or
            // pathological; surface as a numerical failure.
            throw std::runtime_error("solve_milp: unbounded LP relaxation");
        }
        if (rel.status != LpStatus::kOptimal) throw std::runtime_error("solve_milp: LP relaxation failed");
        if (rel.objective_value >= incumbent - opts.absolute_gap) continue;

        if (opts.heuristic) {
            double hobj = 0.0;
            Vector hx;
            if (opts.heuristic(rel.x, hobj, hx) && hobj < incumbent - opts.absolute_gap) {
                incumbent = hobj;
                incumbent_x = std::move(hx);
            }
            if (rel.objective_value >= incumbent - opts.absolute_gap) continue;
        }

        // Most-fractional binary, ties by lowest index.
        Index branch_var = -1;
        double best_frac = opts.integrality_tol;
        for (Index j : p.binaries) {
            const double v = rel.x(j);
            const double frac = std::min(v, 1.0 - v);
            if (frac > best_frac) {
                best_frac = frac;
                branch_var = j;
            }
        }
        if (branch_var < 0) {
            // Integral: new incumbent.
            incumbent = rel.objective_value;
            incumbent_x = rel.x;
            for (Index j : p.binaries) incumbent_x(j) = std::round(incumbent_x(j));
            continue;
        }
        if (!best_bound_mode && incumbent < kInf) best_bound_mode = true;

        std::shared_ptr<const LpBasis> share;
        if (!basis.empty()) share = std::make_shared<const LpBasis>(std::move(basis));
        const double v = rel.x(branch_var);
        const double near = std::round(v);
        const double far = 1.0 - near;
        Node child_far{node.fixings, rel.objective_value, seq++, share};
        child_far.fixings.emplace_back(branch_var, far);
        Node child_near{std::move(node.fixings), rel.objective_value, seq++, share};
        child_near.fixings.emplace_back(branch_var, near);
        if (!best_bound_mode) {
            // LIFO: push far side first so the near side is explored first.
            stack.push_back(std::move(child_far));
            stack.push_back(std::move(child_near));
        } else {
            heap.push(std::move(child_far));
            heap.push(std::move(child_near));
        }
    }

    if (incumbent < kInf) {
        out.status = MilpStatus::kOptimal;
        out.x = incumbent_x;
        out.objective_value = incumbent;
    } else {
        out.status = MilpStatus::kInfeasible;
    }
    return out;
}

}  // namespace lzsetkit
