#pragma once

#include <string>

#include "beliefnet/network.hpp"

namespace beliefnet {

// Parses a network document. Throws ParseError on malformed JSON or a
// schema violation; the document itself is not validated here.
NetworkDocument parse_network_document(const std::string& json_text);

// Parse, validate under the document's declared mode, compile. Throws
// ParseError or ValidationError.
BeliefNetwork load_network(const std::string& json_text);
BeliefNetwork load_network_file(const std::string& path);

std::string render_network(const NetworkDocument& doc);
std::string render_network(const BeliefNetwork& net);

// Evidence document {"hard": {"B": "b0"}, "soft": {"C": [0.9, 0.4]}};
// hard states are labels, resolved against the network. Throws ParseError
// on malformed input and EvidenceError on resolution failures.
Evidence parse_evidence(const std::string& json_text, const BeliefNetwork& net);
Evidence parse_evidence_file(const std::string& path, const BeliefNetwork& net);

std::string render_evidence(const Evidence& e, const BeliefNetwork& net);

} // namespace beliefnet
