#include "beliefnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace beliefnet {

namespace {

constexpr double kColumnSumTolerance = 1e-9;

struct DocIndex {
    std::map<std::string, std::size_t, std::less<>> var_index; // first declaration wins
    std::vector<const NodeDecl*> node_of;                      // per variable, first node wins
};

std::string join_path(const std::vector<std::string>& ids, const char* sep = " -> ") {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out += sep;
        out += ids[i];
    }
    return out;
}

// Finds a directed cycle among resolvable parent edges, if any; returns it
// as a variable-id path for the report.
std::optional<std::vector<std::string>> find_directed_cycle(
    const std::vector<Variable>& vars, const std::vector<std::vector<std::size_t>>& parents) {
    const std::size_t n = vars.size();
    std::vector<int> state(n, 0); // 0 unvisited, 1 on stack, 2 done
    std::vector<std::size_t> stack;

    // Iterative DFS along parent -> child direction; walk parents upward.
    std::vector<std::size_t> origin(n, 0);
    std::optional<std::vector<std::string>> cycle;

    auto dfs = [&](std::size_t start) {
        std::vector<std::pair<std::size_t, std::size_t>> frames{{start, 0}};
        state[start] = 1;
        stack.push_back(start);
        while (!frames.empty()) {
            auto& [v, next] = frames.back();
            if (next < parents[v].size()) {
                std::size_t p = parents[v][next++];
                if (state[p] == 0) {
                    state[p] = 1;
                    stack.push_back(p);
                    frames.emplace_back(p, 0);
                } else if (state[p] == 1) {
                    std::vector<std::string> path;
                    auto it = std::find(stack.begin(), stack.end(), p);
                    for (; it != stack.end(); ++it) path.push_back(vars[*it].id);
                    path.push_back(vars[p].id);
                    // Stack runs child -> ancestor; reverse to read along edges.
                    std::reverse(path.begin(), path.end());
                    cycle = path;
                    return;
                }
            } else {
                state[v] = 2;
                stack.pop_back();
                frames.pop_back();
            }
        }
    };

    for (std::size_t v = 0; v < n && !cycle; ++v) {
        if (state[v] == 0) dfs(v);
    }
    return cycle;
}

// Finds an undirected cycle, if any, via BFS with parent pointers; returns
// it as a variable-id loop for the report. Edges are deduplicated first so
// that a duplicate-parent declaration is not double-reported here.
std::optional<std::vector<std::string>> find_undirected_cycle(
    const std::vector<Variable>& vars, const std::vector<std::vector<std::size_t>>& parents) {
    const std::size_t n = vars.size();
    std::vector<std::set<std::size_t>> adj(n);
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t p : parents[c]) {
            if (p == c) continue;
            adj[c].insert(p);
            adj[p].insert(c);
        }
    }

    std::vector<std::size_t> pred(n, n);
    std::vector<int> seen(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        seen[start] = 1;
        pred[start] = start;
        std::deque<std::size_t> queue{start};
        while (!queue.empty()) {
            std::size_t v = queue.front();
            queue.pop_front();
            for (std::size_t w : adj[v]) {
                if (w == pred[v] && pred[v] != v) continue;
                if (!seen[w]) {
                    seen[w] = 1;
                    pred[w] = v;
                    queue.push_back(w);
                    continue;
                }
                // Two BFS paths meet: splice them into one loop
                // meet -> ... -> v -> w -> ... -> meet.
                std::vector<std::size_t> left{v}, right{w};
                std::set<std::size_t> on_left{v};
                for (std::size_t x = v; pred[x] != x;) {
                    x = pred[x];
                    left.push_back(x);
                    on_left.insert(x);
                }
                std::size_t meet = w;
                while (!on_left.count(meet)) {
                    meet = pred[meet];
                    right.push_back(meet);
                }
                std::vector<std::string> loop;
                for (std::size_t x : left) {
                    loop.push_back(vars[x].id);
                    if (x == meet) break;
                }
                std::reverse(loop.begin(), loop.end());
                for (std::size_t i = 0; i + 1 < right.size(); ++i) loop.push_back(vars[right[i]].id);
                loop.push_back(loop.front());
                return loop;
            }
        }
    }
    return std::nullopt;
}

} // namespace

const char* to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::DuplicateVariable: return "duplicate variable";
        case ViolationKind::EmptyStates: return "empty state list";
        case ViolationKind::DuplicateState: return "duplicate state label";
        case ViolationKind::UnknownVariable: return "unknown variable";
        case ViolationKind::MissingNode: return "missing node";
        case ViolationKind::DuplicateNode: return "duplicate node";
        case ViolationKind::UnknownParent: return "unknown parent";
        case ViolationKind::DuplicateParent: return "duplicate parent";
        case ViolationKind::BadCptShape: return "bad cpt shape";
        case ViolationKind::NonFiniteEntry: return "non-finite cpt entry";
        case ViolationKind::NegativeEntry: return "negative cpt entry";
        case ViolationKind::ColumnSumNotOne: return "cpt column does not sum to 1";
        case ViolationKind::DirectedCycle: return "directed cycle";
        case ViolationKind::NotSinglyConnected: return "not singly connected";
    }
    return "unknown violation";
}

std::string describe(const ValidationReport& report) {
    std::ostringstream out;
    out << "network validation failed (" << report.size()
        << (report.size() == 1 ? " violation)" : " violations)");
    for (const Violation& v : report) {
        out << "\n  [" << v.var << "] " << to_string(v.kind);
        if (!v.detail.empty()) out << ": " << v.detail;
    }
    return out.str();
}

ValidationReport validate(const NetworkDocument& doc, ValidationMode mode) {
    ValidationReport report;
    DocIndex index;

    for (std::size_t i = 0; i < doc.variables.size(); ++i) {
        const Variable& var = doc.variables[i];
        auto [it, inserted] = index.var_index.try_emplace(var.id, i);
        if (!inserted) {
            report.push_back({var.id, ViolationKind::DuplicateVariable, "declared more than once"});
            continue;
        }
        if (var.states.empty()) {
            report.push_back({var.id, ViolationKind::EmptyStates, "a variable needs at least one state"});
        }
        std::set<std::string> seen;
        for (const std::string& s : var.states) {
            if (!seen.insert(s).second) {
                report.push_back({var.id, ViolationKind::DuplicateState, "state '" + s + "'"});
            }
        }
    }

    index.node_of.assign(doc.variables.size(), nullptr);
    for (const NodeDecl& node : doc.nodes) {
        auto it = index.var_index.find(node.var);
        if (it == index.var_index.end()) {
            report.push_back({node.var, ViolationKind::UnknownVariable, "node for an undeclared variable"});
            continue;
        }
        if (index.node_of[it->second]) {
            report.push_back({node.var, ViolationKind::DuplicateNode, "more than one node declaration"});
            continue;
        }
        index.node_of[it->second] = &node;
    }
    for (std::size_t v = 0; v < doc.variables.size(); ++v) {
        if (!index.node_of[v] && index.var_index.find(doc.variables[v].id) != index.var_index.end() &&
            index.var_index.find(doc.variables[v].id)->second == v) {
            report.push_back({doc.variables[v].id, ViolationKind::MissingNode,
                              "variable has no node declaration"});
        }
    }

    // Resolved parent indices; nodes with unresolved pieces keep going with
    // what resolves so one typo does not hide every later check.
    std::vector<std::vector<std::size_t>> parents(doc.variables.size());
    for (std::size_t v = 0; v < doc.variables.size(); ++v) {
        const NodeDecl* node = index.node_of[v];
        if (!node) continue;
        const std::string& id = doc.variables[v].id;

        bool parents_ok = true;
        std::set<std::string> seen;
        for (const std::string& p : node->parents) {
            if (!seen.insert(p).second) {
                report.push_back({id, ViolationKind::DuplicateParent, "parent '" + p + "'"});
                parents_ok = false;
                continue;
            }
            auto it = index.var_index.find(p);
            if (it == index.var_index.end()) {
                report.push_back({id, ViolationKind::UnknownParent, "parent '" + p + "'"});
                parents_ok = false;
                continue;
            }
            parents[v].push_back(it->second);
        }

        std::size_t expected = doc.variables[v].cardinality();
        for (std::size_t p : parents[v]) expected *= doc.variables[p].cardinality();
        if (!parents_ok || expected == 0) continue;

        if (node->cpt.size() != expected) {
            report.push_back({id, ViolationKind::BadCptShape,
                              "expected " + std::to_string(expected) + " entries, got " +
                                  std::to_string(node->cpt.size())});
            continue;
        }

        bool numbers_ok = true;
        for (double x : node->cpt) {
            if (!std::isfinite(x)) {
                report.push_back({id, ViolationKind::NonFiniteEntry, ""});
                numbers_ok = false;
                break;
            }
            if (x < 0.0) {
                report.push_back({id, ViolationKind::NegativeEntry, ""});
                numbers_ok = false;
                break;
            }
        }
        if (!numbers_ok || mode != ValidationMode::Strict) continue;

        // Column = one parent configuration; child index is the slow axis.
        std::size_t columns = expected / doc.variables[v].cardinality();
        for (std::size_t col = 0; col < columns; ++col) {
            double sum = 0.0;
            for (std::size_t x = 0; x < doc.variables[v].cardinality(); ++x) {
                sum += node->cpt[x * columns + col];
            }
            if (std::abs(sum - 1.0) > kColumnSumTolerance) {
                report.push_back({id, ViolationKind::ColumnSumNotOne,
                                  "parent configuration " + std::to_string(col) + " sums to " +
                                      std::to_string(sum)});
                break;
            }
        }
    }

    if (auto cycle = find_directed_cycle(doc.variables, parents)) {
        report.push_back({cycle->front(), ViolationKind::DirectedCycle, join_path(*cycle)});
    } else if (auto loop = find_undirected_cycle(doc.variables, parents)) {
        report.push_back({loop->front(), ViolationKind::NotSinglyConnected,
                          "undirected cycle " + join_path(*loop, " - ")});
    }

    return report;
}

BeliefNetwork BeliefNetwork::compile(const NetworkDocument& doc) {
    ValidationReport report = validate(doc, doc.mode);
    if (!report.empty()) throw ValidationError(std::move(report));

    BeliefNetwork net;
    net.mode_ = doc.mode;
    net.variables_ = doc.variables;

    std::map<std::string, std::size_t, std::less<>> var_index;
    for (std::size_t v = 0; v < net.variables_.size(); ++v) var_index[net.variables_[v].id] = v;

    const std::size_t n = net.variables_.size();
    net.parents_.resize(n);
    net.children_.resize(n);
    net.parent_edges_.resize(n);
    net.child_edges_.resize(n);
    net.cpts_.resize(n);

    std::vector<const NodeDecl*> node_of(n, nullptr);
    for (const NodeDecl& node : doc.nodes) node_of[var_index.find(node.var)->second] = &node;

    for (std::size_t v = 0; v < n; ++v) {
        const NodeDecl& node = *node_of[v];
        std::vector<Axis> axes{{net.variables_[v].id, net.variables_[v].cardinality()}};
        for (const std::string& p : node.parents) {
            std::size_t pi = var_index.find(p)->second;
            net.parents_[v].push_back(pi);
            axes.push_back({net.variables_[pi].id, net.variables_[pi].cardinality()});
        }
        net.cpts_[v] = Tensor(std::move(axes), node.cpt);
    }

    // Edges in (child declaration, parent slot) order.
    for (std::size_t c = 0; c < n; ++c) {
        for (std::size_t slot = 0; slot < net.parents_[c].size(); ++slot) {
            std::size_t p = net.parents_[c][slot];
            std::size_t id = net.edges_.size();
            net.edges_.push_back({p, c, slot});
            net.parent_edges_[c].push_back(id);
            net.child_edges_[p].push_back(id);
            net.children_[p].push_back(c);
        }
    }
    return net;
}

std::optional<std::size_t> BeliefNetwork::find(std::string_view id) const {
    for (std::size_t v = 0; v < variables_.size(); ++v) {
        if (variables_[v].id == id) return v;
    }
    return std::nullopt;
}

std::size_t BeliefNetwork::index_of(std::string_view id) const {
    if (auto v = find(id)) return *v;
    throw Error("no variable '" + std::string(id) + "' in the network");
}

std::optional<std::size_t> BeliefNetwork::state_index(std::size_t v, std::string_view label) const {
    const auto& states = variables_[v].states;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (states[i] == label) return i;
    }
    return std::nullopt;
}

NetworkDocument BeliefNetwork::to_document() const {
    NetworkDocument doc;
    doc.mode = mode_;
    doc.variables = variables_;
    for (std::size_t v = 0; v < variables_.size(); ++v) {
        NodeDecl node;
        node.var = variables_[v].id;
        for (std::size_t p : parents_[v]) node.parents.push_back(variables_[p].id);
        node.cpt.assign(cpts_[v].data().begin(), cpts_[v].data().end());
        doc.nodes.push_back(std::move(node));
    }
    return doc;
}

ValidationReport validate(const BeliefNetwork& net, ValidationMode mode) {
    return validate(net.to_document(), mode);
}

void validate_evidence(const BeliefNetwork& net, const Evidence& e) {
    for (const auto& [id, state] : e.hard) {
        auto v = net.find(id);
        if (!v) throw EvidenceError("evidence names unknown variable '" + id + "'");
        if (state >= net.variable(*v).cardinality()) {
            throw EvidenceError("evidence state index " + std::to_string(state) +
                                " out of range for variable '" + id + "'");
        }
        if (e.soft.count(id)) {
            throw EvidenceError("variable '" + id + "' appears in both hard and soft evidence");
        }
    }
    for (const auto& [id, likelihood] : e.soft) {
        auto v = net.find(id);
        if (!v) throw EvidenceError("evidence names unknown variable '" + id + "'");
        if (likelihood.size() != net.variable(*v).cardinality()) {
            throw EvidenceError("likelihood for '" + id + "' has length " +
                                std::to_string(likelihood.size()) + ", expected " +
                                std::to_string(net.variable(*v).cardinality()));
        }
        bool any_positive = false;
        for (double x : likelihood) {
            if (!std::isfinite(x) || x < 0.0) {
                throw EvidenceError("likelihood for '" + id + "' must be nonnegative and finite");
            }
            if (x > 0.0) any_positive = true;
        }
        if (!any_positive) {
            throw EvidenceError("likelihood for '" + id + "' is identically zero");
        }
    }
}

double joint_probability(const BeliefNetwork& net, const Assignment& w) {
    if (w.size() != net.variable_count()) {
        throw Error("assignment covers " + std::to_string(w.size()) + " of " +
                    std::to_string(net.variable_count()) + " variables");
    }
    double product = 1.0;
    for (std::size_t v = 0; v < net.variable_count(); ++v) {
        if (w[v] >= net.variable(v).cardinality()) {
            throw Error("assignment state out of range for variable '" + net.variable(v).id + "'");
        }
        std::size_t flat = w[v];
        for (std::size_t p : net.parents(v)) flat = flat * net.variable(p).cardinality() + w[p];
        product *= net.cpt(v).flat(flat);
    }
    return product;
}

double evidence_weight(const BeliefNetwork& net, const Evidence& e, const Assignment& w) {
    double weight = 1.0;
    for (const auto& [id, state] : e.hard) {
        if (w[net.index_of(id)] != state) return 0.0;
    }
    for (const auto& [id, likelihood] : e.soft) {
        weight *= likelihood[w[net.index_of(id)]];
    }
    return weight;
}

} // namespace beliefnet
