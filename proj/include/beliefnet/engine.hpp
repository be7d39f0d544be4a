#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "beliefnet/network.hpp"
#include "beliefnet/tensor.hpp"

namespace beliefnet {

// Update = belief updating (posterior marginals, sum contraction,
// sum-to-one normalization). Revise = belief revision (most probable
// interpretation, max contraction, max-to-one normalization). Both run
// the identical kernel; the combine operator and the normalization mode
// are the only knobs.
enum class Mode { Update, Revise };

constexpr CombineOp combine_op(Mode mode) {
    return mode == Mode::Update ? CombineOp::Sum : CombineOp::Max;
}

constexpr NormalizeMode message_norm(Mode mode) {
    return mode == Mode::Update ? NormalizeMode::SumToOne : NormalizeMode::MaxToOne;
}

const char* to_string(Mode mode);

// Messages per directed edge, both stored on the edge's parent axis:
// pi[e] flows parent -> child, lambda[e] flows child -> parent. Evidence
// enters as a virtual-child lambda on each node's own axis.
struct MessageBoard {
    std::vector<Tensor> pi;          // indexed by edge id
    std::vector<Tensor> lambda;      // indexed by edge id
    std::vector<Tensor> node_lambda; // indexed by node: indicator / likelihood / unit
};

// Everything one node combines when activated: its conditional tensor,
// the incoming messages, and the folded forms (Lambda = term product of
// child and evidence lambdas; Pi = outer product of parent pis; f = the
// contraction of the conditional tensor against Pi, with witnesses in
// Revise mode).
struct LocalKernel {
    std::size_t node = 0;
    std::string node_id;
    const Tensor* cpt = nullptr;
    std::vector<Tensor> parent_pi;    // by parent slot
    std::vector<Tensor> child_lambda; // by child edge order
    Tensor evidence_lambda;
    Tensor lambda_total; // axis [X]
    Tensor pi_outer;     // axes [U_1..U_n]; scalar 1 at a root
    Contraction f;       // axis [X]
};

struct NodeResult {
    Tensor bel;                          // normalized per mode
    std::optional<std::size_t> local_opt; // argmax of bel; Revise mode only
};

// Boundary conditions: evidence indicators / likelihood vectors as
// virtual-child lambdas, everything else a unit vector normalized per
// mode. Root priors need no entry: a root's conditional tensor is its
// prior and contracts against an empty Pi.
MessageBoard init_boundaries(const BeliefNetwork& net, const Evidence& e, Mode mode);

LocalKernel assemble_kernel(const BeliefNetwork& net, const MessageBoard& board, std::size_t node,
                            Mode mode);

// bel = normalize(Lambda * (P . Pi)). Throws ZeroMassError when the
// evidence leaves no mass at this node.
NodeResult compute_bel(const LocalKernel& kernel, Mode mode);

// Message to parent `slot`: contract P against the other parents' pi and
// against Lambda, leaving the target parent's axis. The target's pi is
// excluded rather than divided out.
Tensor compute_lambda_to_parent(const LocalKernel& kernel, std::size_t slot, Mode mode,
                                bool normalized = true);

// Message to the child at `child_index` (position in child-edge order):
// term product of every other child's lambda and the evidence lambda with
// the contraction of P against Pi. The target child's lambda is excluded
// rather than divided out.
Tensor compute_pi_to_child(const LocalKernel& kernel, std::size_t child_index, Mode mode,
                           bool normalized = true);

enum class MessageKind { Pi, Lambda };

struct TraceRecord {
    std::size_t step = 0;
    std::string from;
    std::string to;
    MessageKind kind = MessageKind::Pi;
    Mode mode = Mode::Update;
    std::vector<double> vector;
};

using TraceSink = std::function<void(const TraceRecord&)>;

// BreadthFirst drains ready sends in FIFO order from the network
// boundary inward and back out; RandomAdmissible picks uniformly among
// ready sends. Both are admissible linearizations of the same dependency
// order and reach the same equilibrium.
enum class Schedule { BreadthFirst, RandomAdmissible };

struct PropagateOptions {
    Schedule schedule = Schedule::BreadthFirst;
    std::uint64_t schedule_seed = 0;
    // Per-step message normalization guards against underflow and is
    // argmax-invariant; the switch exists so tests can verify that claim.
    bool normalize_messages = true;
    TraceSink trace;
};

struct PropagationStats {
    std::size_t emissions = 0;    // messages computed and published
    std::size_t kernel_calls = 0; // semiring contractions in the shared kernel
    double max_residual = 0.0;    // largest message change in the verify sweep
};

struct PropagationResult {
    Mode mode = Mode::Update;
    MessageBoard board;
    std::vector<NodeResult> nodes;
    PropagationStats stats;
};

// Event-driven propagation to equilibrium. A message leaves a node once
// every other incident edge has delivered its final message, so each
// directed message is emitted exactly once: 2 * edge_count emissions. A
// verification sweep recomputes every message at the end and checks that
// nothing moves by more than 1e-12.
PropagationResult propagate(const BeliefNetwork& net, const Evidence& e, Mode mode,
                            const PropagateOptions& options = {});

struct Commitment {
    Assignment assignment;
    double score = 0.0; // exact joint probability times soft-evidence factors
};

// Extract the most probable interpretation from a Revise-mode
// equilibrium: anchor each connected component at its lowest-id variable
// (hard-evidence variables are fixed first), then sweep outward, choosing
// each next variable by a max-contraction witness consistent with the
// values already committed. Ties break toward the lowest row-major index.
Commitment commit(const BeliefNetwork& net, const PropagationResult& equilibrium,
                  const Evidence& e);

} // namespace beliefnet
