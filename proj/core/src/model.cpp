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

#include "eqvfl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "eqvfl/errors.hpp"

namespace eqvfl::model {

using qsim::Gate;
using qsim::GateKind;
using qsim::Statevector;

int AnsatzCircuit::add_rotation(GateKind kind, int qubit) {
    Gate g{kind, {qubit}, {}, 0.0};
    if (!g.is_rotation()) throw PreconditionError("only rotations can be parameterized");
    g.validate(num_qubits_);
    gates_.push_back(std::move(g));
    slots_.push_back(num_params_);
    return num_params_++;
}

void AnsatzCircuit::add_fixed(Gate gate) {
    gate.validate(num_qubits_);
    gates_.push_back(std::move(gate));
    slots_.push_back(-1);
}

void AnsatzCircuit::add_layer_block() {
    for (int q = 0; q < num_qubits_; ++q) {
        add_rotation(GateKind::Rx, q);
        add_rotation(GateKind::Ry, q);
        add_rotation(GateKind::Rz, q);
    }
    if (num_qubits_ < 2) return;
    for (int q = 0; q < num_qubits_; ++q) add_fixed(Gate::cnot(q, (q + 1) % num_qubits_));
}

Statevector AnsatzCircuit::run(std::span<const double> params) const {
    Statevector state = Statevector::zero(num_qubits_);
    apply(state, params);
    return state;
}

void AnsatzCircuit::apply(Statevector &state, std::span<const double> params) const {
    if (static_cast<int>(params.size()) != num_params_) {
        throw PreconditionError("ansatz expects " + std::to_string(num_params_) + " parameters, got " +
                                std::to_string(params.size()));
    }
    if (state.num_qubits() != num_qubits_) throw PreconditionError("ansatz applied to a state of the wrong width");
    for (std::size_t i = 0; i < gates_.size(); ++i) {
        if (slots_[i] < 0) {
            qsim::apply_gate(state, gates_[i]);
        } else {
            Gate g = gates_[i];
            g.angle = params[slots_[i]];
            qsim::apply_gate(state, g);
        }
    }
}

AnsatzCircuit party_ansatz(int num_qubits, int blocks) {
    AnsatzCircuit circuit(num_qubits);
    for (int q = 0; q < num_qubits; ++q) circuit.add_rotation(GateKind::Ry, q);
    for (int b = 0; b < blocks; ++b) circuit.add_layer_block();
    return circuit;
}

PartyModel PartyModel::create(ttn::TTLayerParams ttn, int num_classes, int blocks) {
    PartyModel m{std::move(ttn), {}, 0, num_classes, blocks};
    m.num_qubits = static_cast<int>(m.ttn.output_size());
    m.vqc_angles.assign(static_cast<std::size_t>(blocks) * m.num_qubits * 3, 0.0);
    m.validate();
    return m;
}

void PartyModel::initialize(RandomStream &rng, double ttn_scale, double angle_range) {
    ttn.randomize(rng, ttn_scale);
    for (auto &a : vqc_angles) a = rng.uniform(-angle_range, angle_range);
}

void PartyModel::validate() const {
    if (static_cast<int>(ttn.output_size()) != num_qubits) {
        throw PreconditionError("TT output size " + std::to_string(ttn.output_size()) + " != qubit count " +
                                std::to_string(num_qubits));
    }
    if (num_classes < 2) throw PreconditionError("need at least two classes");
    if (num_qubits < num_classes) {
        throw PreconditionError("party has " + std::to_string(num_qubits) + " qubits but " +
                                std::to_string(num_classes) + " classes");
    }
    if (blocks < 0) throw PreconditionError("negative block count");
    if (vqc_angles.size() != static_cast<std::size_t>(blocks) * num_qubits * 3) {
        throw PreconditionError("VQC angle count does not match blocks * qubits * 3");
    }
}

std::size_t PartyModel::param_count() const { return ttn::ttn_param_count(ttn) + vqc_angles.size(); }

std::vector<double> party_circuit_params(const PartyModel &model, std::span<const double> encoded) {
    std::vector<double> params;
    params.reserve(encoded.size() + model.vqc_angles.size());
    for (double v : encoded) params.push_back(2.0 * v);
    params.insert(params.end(), model.vqc_angles.begin(), model.vqc_angles.end());
    return params;
}

PartyOutput party_forward(const PartyModel &model, std::span<const double> x) {
    PartyCache cache;
    cache.pre_activation = ttn::ttn_forward(model.ttn, x);
    cache.encoded = ttn::squash(cache.pre_activation);
    const auto circuit = party_ansatz(model.num_qubits, model.blocks);
    Statevector state = circuit.run(party_circuit_params(model, cache.encoded));
    return {std::move(state), std::move(cache)};
}

std::vector<double> party_marginals(const Statevector &state, int num_classes) {
    if (num_classes > state.num_qubits()) {
        throw PreconditionError("state has fewer qubits than classes");
    }
    std::vector<double> p(num_classes);
    for (int c = 0; c < num_classes; ++c) p[c] = qsim::prob_one(state, c);
    return p;
}

std::vector<double> fuse_factorized(std::span<const std::vector<double>> marginals) {
    if (marginals.empty()) throw PreconditionError("fusion needs at least one party");
    std::vector<double> pl(marginals.front().size(), 1.0);
    for (const auto &m : marginals) {
        if (m.size() != pl.size()) throw PreconditionError("party marginal vectors differ in length");
        for (std::size_t c = 0; c < pl.size(); ++c) pl[c] *= m[c];
    }
    return pl;
}

qsim::Circuit fusion_circuit(std::span<const int> party_sizes, int num_classes) {
    int total = 0;
    std::vector<int> offsets;
    for (int n : party_sizes) {
        if (n < num_classes) throw PreconditionError("party register smaller than the class count");
        offsets.push_back(total);
        total += n;
    }
    qsim::Circuit circuit{total + num_classes, {}};
    for (int c = 0; c < num_classes; ++c) {
        std::vector<int> controls;
        for (int off : offsets) controls.push_back(off + c);
        circuit.add(Gate::mcx(std::move(controls), total + c));
    }
    return circuit;
}

JointFusion fuse_joint(std::span<const Statevector> states, int num_classes, int max_qubits) {
    if (states.empty()) throw PreconditionError("fusion needs at least one party");
    std::vector<int> sizes;
    int total = num_classes;
    for (const auto &s : states) {
        sizes.push_back(s.num_qubits());
        total += s.num_qubits();
    }
    if (total > max_qubits) {
        throw CapacityError("joint fusion circuit needs " + std::to_string(total) + " qubits, capacity is " +
                            std::to_string(max_qubits));
    }
    Statevector joint = states.front();
    for (std::size_t k = 1; k < states.size(); ++k) joint = qsim::tensor_product(joint, states[k], max_qubits);
    joint = qsim::tensor_product(joint, Statevector::zero(num_classes), max_qubits);

    const auto circuit = fusion_circuit(sizes, num_classes);
    qsim::apply_circuit(joint, circuit);

    JointFusion out{std::move(joint), {}, {}};
    for (int c = 0; c < num_classes; ++c) {
        const int q = total - num_classes + c;
        out.result_qubits.push_back(q);
        out.plausibilities.push_back(qsim::prob_one(out.state, q));
    }
    return out;
}

std::vector<double> fuse_joint_circuit(std::span<const Statevector> states, int num_classes, int max_qubits) {
    return fuse_joint(states, num_classes, max_qubits).plausibilities;
}

FusionMode parse_fusion_mode(const std::string &name) {
    if (name == "factorized") return FusionMode::Factorized;
    if (name == "joint") return FusionMode::Joint;
    throw PreconditionError("unknown fusion mode '" + name + "'");
}

std::string to_string(FusionMode mode) { return mode == FusionMode::Joint ? "joint" : "factorized"; }

void FusionConfig::validate() const {
    if (num_parties < 1) throw PreconditionError("fusion needs at least one party");
    if (num_classes < 2) throw PreconditionError("fusion needs at least two classes");
}

std::vector<double> fuse(const FusionConfig &config, std::span<const Statevector> states) {
    config.validate();
    if (static_cast<int>(states.size()) != config.num_parties) {
        throw PreconditionError("expected " + std::to_string(config.num_parties) + " party states");
    }
    if (config.mode == FusionMode::Joint) return fuse_joint_circuit(states, config.num_classes);
    std::vector<std::vector<double>> marginals;
    for (const auto &s : states) marginals.push_back(party_marginals(s, config.num_classes));
    return fuse_factorized(marginals);
}

Prediction predict(std::span<const double> plausibilities) {
    if (plausibilities.empty()) throw PreconditionError("cannot predict from an empty score vector");
    Prediction p;
    p.plausibilities.assign(plausibilities.begin(), plausibilities.end());
    const double peak = *std::max_element(plausibilities.begin(), plausibilities.end());
    double z = 0.0;
    p.probabilities.resize(plausibilities.size());
    for (std::size_t c = 0; c < plausibilities.size(); ++c) {
        p.probabilities[c] = std::exp(plausibilities[c] - peak);
        z += p.probabilities[c];
    }
    for (auto &v : p.probabilities) v /= z;
    p.predicted_class = static_cast<int>(std::max_element(plausibilities.begin(), plausibilities.end()) -
                                         plausibilities.begin());
    return p;
}

double loss_lower_bound(int num_classes) {
    if (num_classes < 2) throw PreconditionError("loss bound needs C >= 2");
    return std::log(num_classes + std::numbers::e - 1.0) - 1.0;
}

}  // namespace eqvfl::model
