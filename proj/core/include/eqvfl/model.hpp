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
 * Party pipeline (TT layer, angle encoding, variational circuit) and the
 * server-side evidential fusion.
 *
 * A party with n qubits and C classes reads its output evidence off qubits
 * 0..C-1; qubit c carries class c. The server fuses K party registers with
 * one K-controlled X per class onto a fresh C-qubit result register. Two
 * evaluation routes exist: the joint circuit (reference semantics) and the
 * factorized product of per-party marginals, which is exact because the
 * commonality of a conjunctive combination is the product of commonalities.
 */
#pragma once

#include <span>
#include <string>
#include <vector>

#include "eqvfl/qsim.hpp"
#include "eqvfl/random.hpp"
#include "eqvfl/ttn.hpp"

namespace eqvfl::model {

/// Gate sequence whose rotation angles are read from a parameter vector.
/// Every parameter drives exactly one Pauli rotation, which is what the
/// two-term parameter-shift rule requires.
class AnsatzCircuit {
   public:
    explicit AnsatzCircuit(int num_qubits) : num_qubits_(num_qubits) {}

    /// Appends a rotation bound to a new parameter slot; returns the slot.
    int add_rotation(qsim::GateKind kind, int qubit);
    void add_fixed(qsim::Gate gate);

    /// One block of the layered ansatz: Rx, Ry, Rz on every qubit (in qubit
    /// order), then the CNOT ring 0->1, 1->2, ..., (n-1)->0.
    void add_layer_block();

    int num_qubits() const noexcept { return num_qubits_; }
    int num_params() const noexcept { return num_params_; }

    /// Runs the circuit on |0...0>.
    qsim::Statevector run(std::span<const double> params) const;
    /// Runs the circuit on an existing state in place.
    void apply(qsim::Statevector &state, std::span<const double> params) const;

   private:
    int num_qubits_;
    int num_params_ = 0;
    std::vector<qsim::Gate> gates_;
    std::vector<int> slots_;  // parameter slot per gate, -1 for fixed gates
};

/// Angle-encoding Ry on each of `num_qubits` qubits (slots 0..n-1) followed
/// by `blocks` layer blocks (slots n..n+3*n*blocks-1).
AnsatzCircuit party_ansatz(int num_qubits, int blocks);

struct PartyModel {
    ttn::TTLayerParams ttn;
    std::vector<double> vqc_angles;  ///< index (block * n + qubit) * 3 + {0:Rx, 1:Ry, 2:Rz}
    int num_qubits = 0;
    int num_classes = 0;
    int blocks = 0;

    /// Zero-initialized model whose qubit count is the TT output size.
    static PartyModel create(ttn::TTLayerParams ttn, int num_classes, int blocks);

    /// TT cores uniform on [-s, s] (s = 0 picks the layer default); VQC
    /// angles uniform on [-angle_range, angle_range].
    void initialize(RandomStream &rng, double ttn_scale = 0.0, double angle_range = 0.39269908169872414);

    /// Throws PreconditionError when shapes are inconsistent or n < C.
    void validate() const;

    std::size_t param_count() const;
};

struct PartyCache {
    std::vector<double> pre_activation;  ///< TT layer output
    std::vector<double> encoded;         ///< squash(pre_activation); Ry angles are twice these
};

struct PartyOutput {
    qsim::Statevector state;
    PartyCache cache;
};

/// Circuit parameter vector [2 * encoded..., vqc_angles...] for party_ansatz.
std::vector<double> party_circuit_params(const PartyModel &model, std::span<const double> encoded);

PartyOutput party_forward(const PartyModel &model, std::span<const double> x);

/// prob_one on qubits 0..C-1, i.e. the party's singleton plausibilities.
std::vector<double> party_marginals(const qsim::Statevector &state, int num_classes);

/// Component c = prod_k marginals[k][c].
std::vector<double> fuse_factorized(std::span<const std::vector<double>> marginals);

/// Server circuit over sum(party_sizes) + C qubits: for each class c, an MCX
/// controlled by qubit c of every party branch targeting result qubit c.
qsim::Circuit fusion_circuit(std::span<const int> party_sizes, int num_classes);

struct JointFusion {
    qsim::Statevector state;          ///< joint state after the fusion gates
    std::vector<int> result_qubits;   ///< indices of the result register
    std::vector<double> plausibilities;
};

/// Builds (x)_k state_k (x) |0>^C, applies fusion_circuit and reads prob_one
/// on each result qubit.
JointFusion fuse_joint(std::span<const qsim::Statevector> states, int num_classes,
                       int max_qubits = qsim::kDefaultMaxQubits);

std::vector<double> fuse_joint_circuit(std::span<const qsim::Statevector> states, int num_classes,
                                       int max_qubits = qsim::kDefaultMaxQubits);

enum class FusionMode { Factorized, Joint };

FusionMode parse_fusion_mode(const std::string &name);
std::string to_string(FusionMode mode);

struct FusionConfig {
    int num_parties = 1;
    int num_classes = 2;
    FusionMode mode = FusionMode::Factorized;
    void validate() const;
};

/// Plausibilities of the fused evidence, by either route.
std::vector<double> fuse(const FusionConfig &config, std::span<const qsim::Statevector> states);

struct Prediction {
    std::vector<double> plausibilities;
    std::vector<double> probabilities;  ///< softmax(plausibilities)
    int predicted_class = 0;            ///< argmax, lowest index on ties
};

/// Softmax of the given scores. Scores are not range-checked, so the classical
/// baselines reuse this with unbounded logits.
Prediction predict(std::span<const double> plausibilities);

/// ln(C + e - 1) - 1: the smallest cross-entropy reachable when every softmax
/// input lies in [0, 1].
double loss_lower_bound(int num_classes);

}  // namespace eqvfl::model
