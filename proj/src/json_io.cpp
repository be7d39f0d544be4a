#include "beliefnet/json_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace beliefnet {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

json parse_json(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ParseError(std::string("malformed ") + what + " document");
    return doc;
}

const json& require(const json& obj, const char* key, const std::string& context) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw ParseError(context + " is missing field '" + key + "'");
    }
    return *it;
}

std::string require_string(const json& value, const std::string& context) {
    if (!value.is_string()) throw ParseError(context + " must be a string");
    return value.get<std::string>();
}

} // namespace

NetworkDocument parse_network_document(const std::string& json_text) {
    json doc = parse_json(json_text, "network");
    if (!doc.is_object()) throw ParseError("network document must be a JSON object");

    NetworkDocument out;

    const json& variables = require(doc, "variables", "network document");
    if (!variables.is_array()) throw ParseError("'variables' must be an array");
    for (const json& var : variables) {
        if (!var.is_object()) throw ParseError("variable entries must be objects");
        Variable v;
        v.id = require_string(require(var, "id", "variable"), "variable id");
        const json& states = require(var, "states", "variable '" + v.id + "'");
        if (!states.is_array()) throw ParseError("states of '" + v.id + "' must be an array");
        for (const json& s : states) v.states.push_back(require_string(s, "state label"));
        out.variables.push_back(std::move(v));
    }

    const json& nodes = require(doc, "nodes", "network document");
    if (!nodes.is_array()) throw ParseError("'nodes' must be an array");
    for (const json& node : nodes) {
        if (!node.is_object()) throw ParseError("node entries must be objects");
        NodeDecl n;
        n.var = require_string(require(node, "var", "node"), "node var");
        const json& parents = require(node, "parents", "node '" + n.var + "'");
        if (!parents.is_array()) throw ParseError("parents of '" + n.var + "' must be an array");
        for (const json& p : parents) n.parents.push_back(require_string(p, "parent id"));
        const json& cpt = require(node, "cpt", "node '" + n.var + "'");
        if (!cpt.is_array()) throw ParseError("cpt of '" + n.var + "' must be an array");
        for (const json& x : cpt) {
            if (!x.is_number()) throw ParseError("cpt of '" + n.var + "' must hold numbers");
            n.cpt.push_back(x.get<double>());
        }
        out.nodes.push_back(std::move(n));
    }

    if (auto it = doc.find("mode"); it != doc.end()) {
        std::string mode = require_string(*it, "mode");
        if (mode == "strict") {
            out.mode = ValidationMode::Strict;
        } else if (mode == "relative") {
            out.mode = ValidationMode::Relative;
        } else {
            throw ParseError("mode must be 'strict' or 'relative', got '" + mode + "'");
        }
    }
    return out;
}

BeliefNetwork load_network(const std::string& json_text) {
    return BeliefNetwork::compile(parse_network_document(json_text));
}

BeliefNetwork load_network_file(const std::string& path) {
    return load_network(read_file(path));
}

std::string render_network(const NetworkDocument& doc) {
    json out;
    out["mode"] = doc.mode == ValidationMode::Strict ? "strict" : "relative";
    out["variables"] = json::array();
    for (const Variable& v : doc.variables) {
        out["variables"].push_back({{"id", v.id}, {"states", v.states}});
    }
    out["nodes"] = json::array();
    for (const NodeDecl& n : doc.nodes) {
        out["nodes"].push_back({{"var", n.var}, {"parents", n.parents}, {"cpt", n.cpt}});
    }
    return out.dump(2) + "\n";
}

std::string render_network(const BeliefNetwork& net) {
    return render_network(net.to_document());
}

Evidence parse_evidence(const std::string& json_text, const BeliefNetwork& net) {
    json doc = parse_json(json_text, "evidence");
    if (!doc.is_object()) throw ParseError("evidence document must be a JSON object");

    Evidence out;
    if (auto it = doc.find("hard"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("'hard' must be an object");
        for (const auto& [id, label] : it->items()) {
            auto v = net.find(id);
            if (!v) throw EvidenceError("evidence names unknown variable '" + id + "'");
            std::string state = require_string(label, "hard evidence state");
            auto idx = net.state_index(*v, state);
            if (!idx) {
                throw EvidenceError("variable '" + id + "' has no state '" + state + "'");
            }
            out.hard[id] = *idx;
        }
    }
    if (auto it = doc.find("soft"); it != doc.end()) {
        if (!it->is_object()) throw ParseError("'soft' must be an object");
        for (const auto& [id, vec] : it->items()) {
            if (!vec.is_array()) throw ParseError("likelihood for '" + id + "' must be an array");
            std::vector<double> likelihood;
            for (const json& x : vec) {
                if (!x.is_number()) throw ParseError("likelihood for '" + id + "' must hold numbers");
                likelihood.push_back(x.get<double>());
            }
            out.soft[id] = std::move(likelihood);
        }
    }
    validate_evidence(net, out);
    return out;
}

Evidence parse_evidence_file(const std::string& path, const BeliefNetwork& net) {
    return parse_evidence(read_file(path), net);
}

std::string render_evidence(const Evidence& e, const BeliefNetwork& net) {
    json out;
    out["hard"] = json::object();
    for (const auto& [id, state] : e.hard) {
        out["hard"][id] = net.variable(net.index_of(id)).states[state];
    }
    out["soft"] = json::object();
    for (const auto& [id, likelihood] : e.soft) out["soft"][id] = likelihood;
    return out.dump(2) + "\n";
}

} // namespace beliefnet
