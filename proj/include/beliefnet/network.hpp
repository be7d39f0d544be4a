#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "beliefnet/errors.hpp"
#include "beliefnet/tensor.hpp"

namespace beliefnet {

struct Variable {
    std::string id;
    std::vector<std::string> states;

    std::size_t cardinality() const { return states.size(); }

    friend bool operator==(const Variable&, const Variable&) = default;
};

enum class ValidationMode { Strict, Relative };

// One node as declared in a network document: the conditional table is a
// flat row-major buffer over [child, parent_1, ..., parent_n], child
// slowest. Kept raw so that validation can report bad data instead of
// refusing to represent it.
struct NodeDecl {
    std::string var;
    std::vector<std::string> parents;
    std::vector<double> cpt;

    friend bool operator==(const NodeDecl&, const NodeDecl&) = default;
};

struct NetworkDocument {
    std::vector<Variable> variables;
    std::vector<NodeDecl> nodes;
    ValidationMode mode = ValidationMode::Strict;

    friend bool operator==(const NetworkDocument&, const NetworkDocument&) = default;
};

// Checks every structural and numeric invariant of a document: unique
// ids/states, one node per variable, resolvable parents, CPT shape and
// sign, acyclicity, single-connectedness, and (Strict only) that each
// parent configuration's child column sums to one within 1e-9. Violations
// are data, not failures.
ValidationReport validate(const NetworkDocument& doc, ValidationMode mode);

struct Edge {
    std::size_t parent = 0;
    std::size_t child = 0;
    std::size_t parent_slot = 0; // position of `parent` in the child's parent list

    friend bool operator==(const Edge&, const Edge&) = default;
};

// A validated, immutable singly-connected belief network. Variables keep
// their declaration order; state labels map to dense indices by declared
// order. CPTs are tensors with axes [X, U_1, ..., U_n].
class BeliefNetwork {
public:
    // Validates with the document's own mode and throws ValidationError
    // on any violation.
    static BeliefNetwork compile(const NetworkDocument& doc);

    std::size_t variable_count() const { return variables_.size(); }
    const Variable& variable(std::size_t v) const { return variables_[v]; }
    const std::vector<Variable>& variables() const { return variables_; }

    std::optional<std::size_t> find(std::string_view id) const;
    std::size_t index_of(std::string_view id) const; // throws Error when missing
    std::optional<std::size_t> state_index(std::size_t v, std::string_view label) const;

    const Tensor& cpt(std::size_t v) const { return cpts_[v]; }
    const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
    const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }

    const std::vector<Edge>& edges() const { return edges_; }
    std::size_t edge_count() const { return edges_.size(); }
    // Edge ids into edges(), ordered by parent slot / by child declaration.
    const std::vector<std::size_t>& parent_edges(std::size_t v) const { return parent_edges_[v]; }
    const std::vector<std::size_t>& child_edges(std::size_t v) const { return child_edges_[v]; }

    ValidationMode declared_mode() const { return mode_; }

    NetworkDocument to_document() const;

    friend bool operator==(const BeliefNetwork& a, const BeliefNetwork& b) {
        return a.to_document() == b.to_document();
    }

private:
    BeliefNetwork() = default;

    std::vector<Variable> variables_;
    std::vector<Tensor> cpts_;
    std::vector<std::vector<std::size_t>> parents_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<Edge> edges_;
    std::vector<std::vector<std::size_t>> parent_edges_;
    std::vector<std::vector<std::size_t>> child_edges_;
    ValidationMode mode_ = ValidationMode::Strict;
};

// Re-check a live network under either mode (a Relative network can be
// probed for Strict conformance and vice versa).
ValidationReport validate(const BeliefNetwork& net, ValidationMode mode);

// Hard instantiations and soft likelihood vectors, keyed by variable id.
// A variable may appear in at most one of the two maps.
struct Evidence {
    std::map<std::string, std::size_t> hard;
    std::map<std::string, std::vector<double>> soft;

    bool empty() const { return hard.empty() && soft.empty(); }

    friend bool operator==(const Evidence&, const Evidence&) = default;
};

// Throws EvidenceError on unknown variables, out-of-range states, overlap
// between hard and soft, or malformed likelihood vectors.
void validate_evidence(const BeliefNetwork& net, const Evidence& e);

// Complete assignment: one state index per variable, in network order.
using Assignment = std::vector<std::size_t>;

// Product over nodes of cpt(x_w | u_w); the exact joint probability P(w)
// when the network is Strict.
double joint_probability(const BeliefNetwork& net, const Assignment& w);

// Product of evidence factors at w: 1/0 indicators for hard evidence and
// likelihood values for soft evidence.
double evidence_weight(const BeliefNetwork& net, const Evidence& e, const Assignment& w);

} // namespace beliefnet
