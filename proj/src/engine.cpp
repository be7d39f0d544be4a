#include "beliefnet/engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace beliefnet {

namespace {

constexpr double kEquilibriumTolerance = 1e-12;

// Every bel, lambda, and pi computation funnels its contractions through
// here; the combine operator is the only thing that distinguishes the two
// modes on this path. The counter backs the kernel-sharing test.
thread_local std::size_t g_kernel_calls = 0;

Contraction kernel_contract(const Tensor& a, const Tensor& b, CombineOp op) {
    ++g_kernel_calls;
    return inner_product(a, b, op);
}

Tensor finish_message(Tensor raw, Mode mode, bool normalized, const std::string& node_id) {
    if (!(raw.max_value() > 0.0)) {
        throw ZeroMassError("contradictory evidence: zero mass at node '" + node_id + "'", node_id);
    }
    return normalized ? normalize(raw, message_norm(mode)) : raw;
}

std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * n) >> 64);
}

} // namespace

const char* to_string(Mode mode) {
    return mode == Mode::Update ? "update" : "revise";
}

MessageBoard init_boundaries(const BeliefNetwork& net, const Evidence& e, Mode mode) {
    validate_evidence(net, e);
    const NormalizeMode norm = message_norm(mode);

    MessageBoard board;
    for (const Edge& edge : net.edges()) {
        Axis parent_axis{net.variable(edge.parent).id, net.variable(edge.parent).cardinality()};
        board.pi.push_back(normalize(unit_vector(parent_axis), norm));
        board.lambda.push_back(normalize(unit_vector(parent_axis), norm));
    }
    for (std::size_t v = 0; v < net.variable_count(); ++v) {
        const Variable& var = net.variable(v);
        Axis axis{var.id, var.cardinality()};
        if (auto it = e.hard.find(var.id); it != e.hard.end()) {
            std::vector<double> indicator(var.cardinality(), 0.0);
            indicator[it->second] = 1.0;
            board.node_lambda.push_back(normalize(Tensor({axis}, std::move(indicator)), norm));
        } else if (auto st = e.soft.find(var.id); st != e.soft.end()) {
            board.node_lambda.push_back(normalize(Tensor({axis}, st->second), norm));
        } else {
            board.node_lambda.push_back(normalize(unit_vector(axis), norm));
        }
    }
    return board;
}

LocalKernel assemble_kernel(const BeliefNetwork& net, const MessageBoard& board, std::size_t node,
                            Mode mode) {
    LocalKernel kernel;
    kernel.node = node;
    kernel.node_id = net.variable(node).id;
    kernel.cpt = &net.cpt(node);

    for (std::size_t edge : net.parent_edges(node)) kernel.parent_pi.push_back(board.pi[edge]);
    for (std::size_t edge : net.child_edges(node)) kernel.child_lambda.push_back(board.lambda[edge]);
    kernel.evidence_lambda = board.node_lambda[node];

    kernel.lambda_total = kernel.evidence_lambda;
    for (const Tensor& lam : kernel.child_lambda) {
        kernel.lambda_total = term_product(kernel.lambda_total, lam);
    }
    kernel.pi_outer = Tensor(); // scalar 1; stays so at a root
    for (const Tensor& pi : kernel.parent_pi) {
        kernel.pi_outer = outer_product(kernel.pi_outer, pi);
    }
    kernel.f = kernel_contract(*kernel.cpt, kernel.pi_outer, combine_op(mode));
    return kernel;
}

NodeResult compute_bel(const LocalKernel& kernel, Mode mode) {
    Tensor raw = term_product(kernel.lambda_total, kernel.f.value);
    NodeResult result{finish_message(std::move(raw), mode, true, kernel.node_id), std::nullopt};
    if (mode == Mode::Revise) result.local_opt = argmax(result.bel).first[0];
    return result;
}

Tensor compute_lambda_to_parent(const LocalKernel& kernel, std::size_t slot, Mode mode,
                                bool normalized) {
    Tensor others; // outer product of pi over every parent but `slot`
    for (std::size_t i = 0; i < kernel.parent_pi.size(); ++i) {
        if (i != slot) others = outer_product(others, kernel.parent_pi[i]);
    }
    const CombineOp op = combine_op(mode);
    Contraction partial = kernel_contract(*kernel.cpt, others, op); // axes [X, U_slot]
    Contraction folded = kernel_contract(kernel.lambda_total, partial.value, op); // axis [U_slot]
    return finish_message(std::move(folded.value), mode, normalized, kernel.node_id);
}

Tensor compute_pi_to_child(const LocalKernel& kernel, std::size_t child_index, Mode mode,
                           bool normalized) {
    Tensor lambdas = kernel.evidence_lambda; // the virtual child is never excluded
    for (std::size_t j = 0; j < kernel.child_lambda.size(); ++j) {
        if (j != child_index) lambdas = term_product(lambdas, kernel.child_lambda[j]);
    }
    Tensor raw = term_product(lambdas, kernel.f.value);
    return finish_message(std::move(raw), mode, normalized, kernel.node_id);
}

namespace {

// A send is one directed message: pi from the edge's parent or lambda
// from the edge's child.
struct SendId {
    std::size_t edge;
    MessageKind kind;
};

SendId decode_send(std::size_t s) {
    return {s / 2, s % 2 == 0 ? MessageKind::Pi : MessageKind::Lambda};
}

std::size_t encode_send(std::size_t edge, MessageKind kind) {
    return edge * 2 + (kind == MessageKind::Pi ? 0 : 1);
}

} // namespace

PropagationResult propagate(const BeliefNetwork& net, const Evidence& e, Mode mode,
                            const PropagateOptions& options) {
    const std::size_t kernel_calls_before = g_kernel_calls;

    PropagationResult result;
    result.mode = mode;
    result.board = init_boundaries(net, e, mode);
    MessageBoard& board = result.board;

    const std::size_t n = net.variable_count();
    const std::size_t edge_total = net.edge_count();

    // incident[v]: every edge touching v, parent edges first.
    std::vector<std::vector<std::size_t>> incident(n);
    for (std::size_t v = 0; v < n; ++v) {
        incident[v] = net.parent_edges(v);
        incident[v].insert(incident[v].end(), net.child_edges(v).begin(),
                           net.child_edges(v).end());
    }

    // A node may send on an edge once every other incident edge has
    // delivered its final incoming message.
    std::vector<std::size_t> missing_in(n);
    std::vector<char> delivered_pi(edge_total, 0), delivered_lambda(edge_total, 0);
    std::vector<char> sent(edge_total * 2, 0), queued(edge_total * 2, 0);
    std::vector<std::size_t> ready;

    auto incoming_delivered = [&](std::size_t v, std::size_t edge) {
        return net.edges()[edge].child == v ? delivered_pi[edge] != 0
                                            : delivered_lambda[edge] != 0;
    };
    auto outgoing_send = [&](std::size_t v, std::size_t edge) {
        return encode_send(edge, net.edges()[edge].parent == v ? MessageKind::Pi
                                                               : MessageKind::Lambda);
    };
    auto enqueue = [&](std::size_t send) {
        if (!sent[send] && !queued[send]) {
            queued[send] = 1;
            ready.push_back(send);
        }
    };
    auto enable_sends = [&](std::size_t v) {
        if (missing_in[v] == 0) {
            for (std::size_t edge : incident[v]) enqueue(outgoing_send(v, edge));
        } else if (missing_in[v] == 1) {
            for (std::size_t edge : incident[v]) {
                if (!incoming_delivered(v, edge)) enqueue(outgoing_send(v, edge));
            }
        }
    };

    for (std::size_t v = 0; v < n; ++v) missing_in[v] = incident[v].size();
    for (std::size_t v = 0; v < n; ++v) enable_sends(v);

    std::mt19937_64 rng(options.schedule_seed);
    std::size_t pop_at = 0;

    while (pop_at < ready.size()) {
        std::size_t send;
        if (options.schedule == Schedule::BreadthFirst) {
            send = ready[pop_at++];
        } else {
            std::size_t pick = pop_at + rng_below(rng, ready.size() - pop_at);
            std::swap(ready[pop_at], ready[pick]);
            send = ready[pop_at++];
        }

        auto [edge_id, kind] = decode_send(send);
        const Edge& edge = net.edges()[edge_id];
        std::size_t from, to;
        Tensor message;
        if (kind == MessageKind::Pi) {
            from = edge.parent;
            to = edge.child;
            LocalKernel kernel = assemble_kernel(net, board, from, mode);
            const auto& child_edges = net.child_edges(from);
            std::size_t child_index =
                std::find(child_edges.begin(), child_edges.end(), edge_id) - child_edges.begin();
            message = compute_pi_to_child(kernel, child_index, mode, options.normalize_messages);
            board.pi[edge_id] = message;
            delivered_pi[edge_id] = 1;
        } else {
            from = edge.child;
            to = edge.parent;
            LocalKernel kernel = assemble_kernel(net, board, from, mode);
            message = compute_lambda_to_parent(kernel, edge.parent_slot, mode,
                                               options.normalize_messages);
            board.lambda[edge_id] = message;
            delivered_lambda[edge_id] = 1;
        }
        sent[send] = 1;
        ++result.stats.emissions;

        if (options.trace) {
            TraceRecord record;
            record.step = result.stats.emissions;
            record.from = net.variable(from).id;
            record.to = net.variable(to).id;
            record.kind = kind;
            record.mode = mode;
            record.vector.assign(message.data().begin(), message.data().end());
            options.trace(record);
        }

        --missing_in[to];
        enable_sends(to);
    }

    if (result.stats.emissions != 2 * edge_total) {
        throw Error("propagation scheduler stalled; the network is not a polytree");
    }

    for (std::size_t v = 0; v < n; ++v) {
        result.nodes.push_back(compute_bel(assemble_kernel(net, board, v, mode), mode));
    }

    // Verification sweep: at equilibrium no message moves.
    for (std::size_t edge_id = 0; edge_id < edge_total; ++edge_id) {
        const Edge& edge = net.edges()[edge_id];
        LocalKernel parent_kernel = assemble_kernel(net, board, edge.parent, mode);
        const auto& child_edges = net.child_edges(edge.parent);
        std::size_t child_index =
            std::find(child_edges.begin(), child_edges.end(), edge_id) - child_edges.begin();
        Tensor pi = compute_pi_to_child(parent_kernel, child_index, mode,
                                        options.normalize_messages);
        LocalKernel child_kernel = assemble_kernel(net, board, edge.child, mode);
        Tensor lambda = compute_lambda_to_parent(child_kernel, edge.parent_slot, mode,
                                                 options.normalize_messages);
        for (std::size_t i = 0; i < pi.size(); ++i) {
            result.stats.max_residual = std::max(
                result.stats.max_residual, std::abs(pi.flat(i) - board.pi[edge_id].flat(i)));
        }
        for (std::size_t i = 0; i < lambda.size(); ++i) {
            result.stats.max_residual =
                std::max(result.stats.max_residual,
                         std::abs(lambda.flat(i) - board.lambda[edge_id].flat(i)));
        }
    }
    if (result.stats.max_residual > kEquilibriumTolerance) {
        throw Error("propagation did not reach equilibrium (residual " +
                    std::to_string(result.stats.max_residual) + ")");
    }

    result.stats.kernel_calls = g_kernel_calls - kernel_calls_before;
    return result;
}

Commitment commit(const BeliefNetwork& net, const PropagationResult& equilibrium,
                  const Evidence& e) {
    if (equilibrium.mode != Mode::Revise) {
        throw Error("commit requires a Revise-mode equilibrium");
    }
    const std::size_t n = net.variable_count();
    const MessageBoard& board = equilibrium.board;

    std::vector<std::optional<std::size_t>> value(n);
    std::deque<std::size_t> pending;

    auto observed = [&](std::size_t v) -> std::optional<std::size_t> {
        auto it = e.hard.find(net.variable(v).id);
        if (it == e.hard.end()) return std::nullopt;
        return it->second;
    };
    auto set_value = [&](std::size_t v, std::size_t state) {
        value[v] = state;
        pending.push_back(v);
    };

    // Expanding a committed node assigns every uncommitted neighbor: the
    // free parents jointly from one max-contraction witness with committed
    // axes clamped, each child from its own clamped contraction folded
    // with the lambdas below it. Hard-evidence variables are fixed to
    // their observations.
    auto expand = [&](std::size_t x) {
        const std::size_t x_state = *value[x];
        const std::string& x_id = net.variable(x).id;

        const auto& parent_slots = net.parents(x);
        if (!parent_slots.empty()) {
            Tensor clamped = slice(net.cpt(x), x_id, x_state);
            std::vector<std::size_t> free_slots;
            for (std::size_t slot = 0; slot < parent_slots.size(); ++slot) {
                std::size_t p = parent_slots[slot];
                std::optional<std::size_t> fixed = value[p];
                if (!fixed) {
                    if (auto obs = observed(p)) {
                        fixed = obs;
                        set_value(p, *obs);
                    }
                }
                if (fixed) {
                    clamped = slice(clamped, net.variable(p).id, *fixed);
                } else {
                    free_slots.push_back(slot);
                }
            }
            if (!free_slots.empty()) {
                Tensor pis;
                for (std::size_t slot : free_slots) {
                    pis = outer_product(pis, board.pi[net.parent_edges(x)[slot]]);
                }
                Tensor weights = term_product(clamped, pis);
                auto [witness, best] = argmax(weights);
                if (!(best > 0.0)) {
                    throw ZeroMassError("commitment sweep found zero mass at node '" + x_id + "'",
                                        x_id);
                }
                for (std::size_t k = 0; k < witness.size(); ++k) {
                    set_value(net.index_of(weights.axes()[k].var), witness[k]);
                }
            }
        }

        for (std::size_t edge_id : net.child_edges(x)) {
            std::size_t c = net.edges()[edge_id].child;
            if (value[c]) continue;
            if (auto obs = observed(c)) {
                set_value(c, *obs);
                continue;
            }
            const std::string& c_id = net.variable(c).id;
            Tensor clamped = slice(net.cpt(c), x_id, x_state);
            Tensor pis;
            for (std::size_t g : net.parent_edges(c)) {
                if (net.edges()[g].parent != x) pis = outer_product(pis, board.pi[g]);
            }
            Contraction over_parents = kernel_contract(clamped, pis, CombineOp::Max);
            Tensor lambdas = board.node_lambda[c];
            for (std::size_t h : net.child_edges(c)) {
                lambdas = term_product(lambdas, board.lambda[h]);
            }
            Tensor scores = term_product(lambdas, over_parents.value);
            auto [witness, best] = argmax(scores);
            if (!(best > 0.0)) {
                throw ZeroMassError("commitment sweep found zero mass at node '" + c_id + "'",
                                    c_id);
            }
            set_value(c, witness[0]);
        }
    };

    // One anchor per connected component, lowest variable id first.
    std::vector<std::size_t> by_id(n);
    for (std::size_t v = 0; v < n; ++v) by_id[v] = v;
    std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
        return net.variable(a).id < net.variable(b).id;
    });

    for (std::size_t anchor : by_id) {
        if (value[anchor]) continue;
        if (auto obs = observed(anchor)) {
            set_value(anchor, *obs);
        } else {
            set_value(anchor, argmax(equilibrium.nodes[anchor].bel).first[0]);
        }
        while (!pending.empty()) {
            std::size_t v = pending.front();
            pending.pop_front();
            expand(v);
        }
    }

    Commitment out;
    out.assignment.resize(n);
    for (std::size_t v = 0; v < n; ++v) out.assignment[v] = *value[v];
    out.score = joint_probability(net, out.assignment) * evidence_weight(net, e, out.assignment);
    return out;
}

} // namespace beliefnet
