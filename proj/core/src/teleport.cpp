// Copyright 2026 The eqvfl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "eqvfl/teleport.hpp"

#include <charconv>
#include <cmath>

#include "eqvfl/errors.hpp"

namespace eqvfl::teleport {

using qsim::Gate;
using qsim::Statevector;

std::string format_message(const TeleportMessage &msg) {
    return std::to_string(msg.session_id) + "," + std::to_string(msg.qubit_index) + "," + std::to_string(msg.b1) +
           "," + std::to_string(msg.b2);
}

TeleportMessage parse_message(const std::string &line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        fields.push_back(line.substr(start, comma - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (fields.size() != 4) throw ParseError("teleport message needs 4 fields", 1, 0);

    auto parse_u64 = [&](std::size_t col) {
        std::uint64_t v = 0;
        const auto &f = fields[col];
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty()) {
            throw ParseError("invalid integer '" + f + "'", 1, col + 1);
        }
        return v;
    };
    TeleportMessage msg;
    msg.session_id = parse_u64(0);
    msg.qubit_index = static_cast<int>(parse_u64(1));
    const auto b1 = parse_u64(2);
    const auto b2 = parse_u64(3);
    if (b1 > 1) throw ParseError("bit must be 0 or 1", 1, 3);
    if (b2 > 1) throw ParseError("bit must be 0 or 1", 1, 4);
    msg.b1 = static_cast<int>(b1);
    msg.b2 = static_cast<int>(b2);
    return msg;
}

Statevector make_epr() {
    Statevector s = Statevector::zero(2);
    qsim::apply_gate(s, Gate::h(0));
    qsim::apply_gate(s, Gate::cnot(0, 1));
    return s;
}

std::vector<Gate> correction_gates(int b1, int b2, int qubit) {
    std::vector<Gate> gates;
    if (b2) gates.push_back(Gate::x(qubit));
    if (b1) gates.push_back(Gate::z(qubit));
    return gates;
}

PartyResult party_send(const Statevector &state, std::span<const int> qubits, UniformSource &rng,
                       std::uint64_t session_id) {
    PartyResult out{state, {}};
    for (int source : qubits) {
        const int n = out.uncorrected.num_qubits();
        if (source < 0 || source >= n) throw PreconditionError("teleported qubit index out of range");
        Statevector joint = qsim::tensor_product(out.uncorrected, make_epr());
        const int a1 = n;
        qsim::apply_gate(joint, Gate::cnot(source, a1));
        qsim::apply_gate(joint, Gate::h(source));
        const int measured[2] = {source, a1};
        auto m = qsim::measure_and_collapse(std::move(joint), measured, rng);
        // a2 (index n+1) drops to index n-1 once source and a1 are removed.
        Statevector reduced = qsim::remove_qubits(m.state, measured, m.bits);
        out.uncorrected = qsim::move_qubit(reduced, n - 1, source);
        out.messages.push_back({session_id, source, m.bits[0], m.bits[1]});
    }
    return out;
}

Transfer teleport_qubit(const Statevector &state, int source, UniformSource &rng, std::uint64_t session_id) {
    const int qubits[1] = {source};
    return teleport_register(state, qubits, rng, session_id);
}

Transfer teleport_register(const Statevector &state, std::span<const int> qubits, UniformSource &rng,
                           std::uint64_t session_id) {
    Transfer out{state, {}};
    for (int q : qubits) {
        const int one[1] = {q};
        PartyResult sent = party_send(out.state, one, rng, session_id);
        const auto &msg = sent.messages.front();
        for (const auto &g : correction_gates(msg.b1, msg.b2, q)) qsim::apply_gate(sent.uncorrected, g);
        out.state = std::move(sent.uncorrected);
        out.messages.push_back(msg);
    }
    return out;
}

Transfer logical_transfer(const Statevector &state, std::span<const int> qubits) {
    for (int q : qubits) {
        if (q < 0 || q >= state.num_qubits()) throw PreconditionError("transferred qubit index out of range");
    }
    return {state, {}};
}

TeleportSession::TeleportSession(std::uint64_t session_id, Statevector server_register, std::span<const int> qubits)
    : session_id_(session_id),
      register_size_(static_cast<int>(qubits.size())),
      pending_(qubits.begin(), qubits.end()),
      expected_(qubits.begin(), qubits.end()),
      server_register_(std::move(server_register)) {
    if (pending_.size() != qubits.size()) throw PreconditionError("session qubit list has duplicates");
}

void TeleportSession::receive(const TeleportMessage &msg) {
    if (msg.session_id != session_id_) {
        throw ProtocolError("message for session " + std::to_string(msg.session_id) + " delivered to session " +
                            std::to_string(session_id_));
    }
    if (!expected_.contains(msg.qubit_index)) {
        throw ProtocolError("message for qubit " + std::to_string(msg.qubit_index) + " not in session");
    }
    if (!pending_.contains(msg.qubit_index)) {
        throw ProtocolError("duplicate message for qubit " + std::to_string(msg.qubit_index));
    }
    for (const auto &g : correction_gates(msg.b1, msg.b2, msg.qubit_index)) qsim::apply_gate(server_register_, g);
    pending_.erase(msg.qubit_index);
}

const Statevector &TeleportSession::finish() const {
    if (!pending_.empty()) {
        throw IncompleteSessionError("session " + std::to_string(session_id_) + " closed with " +
                                     std::to_string(pending_.size()) + " correction(s) missing");
    }
    return server_register_;
}

std::optional<TeleportMessage> InProcessChannel::receive() {
    if (queue_.empty()) return std::nullopt;
    TeleportMessage msg = queue_.front();
    queue_.pop_front();
    return msg;
}

Statevector run_session(const Statevector &party_state, int num_qubits, Transport &transport, UniformSource &rng,
                        std::uint64_t session_id) {
    std::vector<int> qubits(num_qubits);
    for (int q = 0; q < num_qubits; ++q) qubits[q] = q;
    PartyResult sent = party_send(party_state, qubits, rng, session_id);
    for (const auto &msg : sent.messages) transport.send(msg);
    transport.close();

    TeleportSession session(session_id, std::move(sent.uncorrected), qubits);
    while (auto msg = transport.receive()) session.receive(*msg);
    return session.finish();
}

}  // namespace eqvfl::teleport
