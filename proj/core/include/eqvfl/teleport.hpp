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

/**
 * @file
 * Simulated quantum teleportation of qubits from a party register to the
 * server.
 *
 * Per transferred qubit: append an EPR pair (party half a1, server half a2),
 * CNOT(source -> a1), H(source), measure source (bit b1) and a1 (bit b2),
 * then on the server apply X if b2 = 1 followed by Z if b1 = 1. The measured
 * qubits are projected out immediately and a2 takes the source's index, so
 * the register keeps its logical size and ordering.
 */
#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "eqvfl/qsim.hpp"
#include "eqvfl/random.hpp"

namespace eqvfl::teleport {

/// Classical side channel record for one teleported qubit.
struct TeleportMessage {
    std::uint64_t session_id = 0;
    int qubit_index = 0;
    int b1 = 0;  ///< outcome on the source qubit (after H)
    int b2 = 0;  ///< outcome on the party's EPR half (CNOT target)

    friend bool operator==(const TeleportMessage &, const TeleportMessage &) = default;
};

/// `session_id,qubit_index,b1,b2` with no spaces, e.g. "7,0,1,0".
std::string format_message(const TeleportMessage &msg);
/// Inverse of format_message; throws ParseError on malformed lines.
TeleportMessage parse_message(const std::string &line);

/// (|00> + |11>)/sqrt(2) prepared by H(0), CNOT(0 -> 1) on |00>.
qsim::Statevector make_epr();

struct Transfer {
    qsim::Statevector state;
    std::vector<TeleportMessage> messages;
};

/// Teleports qubit `source` and applies the corrections immediately.
Transfer teleport_qubit(const qsim::Statevector &state, int source, UniformSource &rng,
                        std::uint64_t session_id = 0);

/// Sequential teleport_qubit over `qubits`.
Transfer teleport_register(const qsim::Statevector &state, std::span<const int> qubits, UniformSource &rng,
                           std::uint64_t session_id = 0);

/// Training fast path: relabels `qubits` as server-held without simulating
/// the protocol. Returns the state unchanged and no messages.
Transfer logical_transfer(const qsim::Statevector &state, std::span<const int> qubits);

/// Recovery operation for a measured pair, as a (possibly empty) gate list
/// on `qubit`: X when b2 = 1, then Z when b1 = 1.
std::vector<qsim::Gate> correction_gates(int b1, int b2, int qubit);

/// Party-side half of a transfer: runs the entangling and measurement steps
/// and leaves the server qubits uncorrected.
struct PartyResult {
    qsim::Statevector uncorrected;
    std::vector<TeleportMessage> messages;
};
PartyResult party_send(const qsim::Statevector &state, std::span<const int> qubits, UniformSource &rng,
                       std::uint64_t session_id);

/// Server-side state of one transfer. Corrections are keyed by qubit index
/// and may arrive in any order; each must arrive exactly once.
class TeleportSession {
   public:
    TeleportSession(std::uint64_t session_id, qsim::Statevector server_register, std::span<const int> qubits);

    std::uint64_t session_id() const noexcept { return session_id_; }
    int register_size() const noexcept { return register_size_; }
    const std::set<int> &pending() const noexcept { return pending_; }
    bool complete() const noexcept { return pending_.empty(); }

    /// Applies the correction for one message. Throws ProtocolError on a
    /// foreign session id, unknown qubit, or duplicate.
    void receive(const TeleportMessage &msg);

    /// The corrected register; throws IncompleteSessionError while pending.
    const qsim::Statevector &finish() const;

   private:
    std::uint64_t session_id_;
    int register_size_;
    std::set<int> pending_;
    std::set<int> expected_;
    qsim::Statevector server_register_;
};

/// Message transport between a party and the server.
class Transport {
   public:
    virtual ~Transport() = default;
    virtual void send(const TeleportMessage &msg) = 0;
    /// Next delivered message, or nullopt once the channel is drained and closed.
    virtual std::optional<TeleportMessage> receive() = 0;
    virtual void close() = 0;
};

/// FIFO in-process channel with exactly-once delivery.
class InProcessChannel : public Transport {
   public:
    void send(const TeleportMessage &msg) override { queue_.push_back(msg); }
    std::optional<TeleportMessage> receive() override;
    void close() override { closed_ = true; }

   protected:
    std::deque<TeleportMessage> queue_;
    bool closed_ = false;
};

/// Teleports qubits 0..C-1 of `party_state` through `transport`: the party
/// sends one message per qubit and closes the channel, the server drains it
/// and applies corrections. Returns the server-held register.
qsim::Statevector run_session(const qsim::Statevector &party_state, int num_qubits, Transport &transport,
                              UniformSource &rng, std::uint64_t session_id = 0);

}  // namespace eqvfl::teleport
