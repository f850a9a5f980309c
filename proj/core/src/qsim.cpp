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

#include "eqvfl/qsim.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>

#include "eqvfl/errors.hpp"

namespace eqvfl::qsim {

namespace {

using Matrix2 = std::array<Amplitude, 4>;

void check_capacity(int n, int max_qubits) {
    if (n < 1 || n > max_qubits) {
        throw CapacityError("qubit count " + std::to_string(n) + " outside supported range [1, " +
                            std::to_string(max_qubits) + "]");
    }
}

void check_qubit(const Statevector &s, int q) {
    if (q < 0 || q >= s.num_qubits()) {
        throw PreconditionError("qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(s.num_qubits()) + "-qubit state");
    }
}

void check_distinct(std::span<const int> qubits, int n) {
    std::uint64_t seen = 0;
    for (int q : qubits) {
        if (q < 0 || q >= n) {
            throw PreconditionError("qubit index " + std::to_string(q) + " out of range for " + std::to_string(n) +
                                    "-qubit state");
        }
        if (seen & (std::uint64_t{1} << q)) {
            throw PreconditionError("qubit index " + std::to_string(q) + " repeated");
        }
        seen |= std::uint64_t{1} << q;
    }
}

Matrix2 matrix_of(const Gate &g) {
    constexpr double kInvSqrt2 = 0.70710678118654752440;
    const Amplitude i{0.0, 1.0};
    const double c = std::cos(g.angle / 2);
    const double s = std::sin(g.angle / 2);
    switch (g.kind) {
        case GateKind::X:
            return {0.0, 1.0, 1.0, 0.0};
        case GateKind::Y:
            return {0.0, -i, i, 0.0};
        case GateKind::Z:
            return {1.0, 0.0, 0.0, -1.0};
        case GateKind::H:
            return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
        case GateKind::Rx:
            return {c, -i * s, -i * s, c};
        case GateKind::Ry:
            return {c, -s, s, c};
        case GateKind::Rz:
            return {Amplitude{c, -s}, 0.0, 0.0, Amplitude{c, s}};
        default:
            throw PreconditionError("gate " + to_string(g.kind) + " is not a single-qubit gate");
    }
}

void apply_single(Statevector &state, const Matrix2 &u, int qubit) {
    auto amps = state.amplitudes();
    const std::uint64_t m = state.qubit_mask(qubit);
    const std::uint64_t n = amps.size();
    for (std::uint64_t base = 0; base < n; base += 2 * m) {
        for (std::uint64_t k = base; k < base + m; ++k) {
            const Amplitude a0 = amps[k];
            const Amplitude a1 = amps[k + m];
            amps[k] = u[0] * a0 + u[1] * a1;
            amps[k + m] = u[2] * a0 + u[3] * a1;
        }
    }
}

// Rotations with real or diagonal matrices get dedicated loops; they dominate
// the party circuits.
void apply_ry(Statevector &state, double theta, int qubit) {
    auto amps = state.amplitudes();
    const double c = std::cos(theta / 2);
    const double s = std::sin(theta / 2);
    const std::uint64_t m = state.qubit_mask(qubit);
    const std::uint64_t n = amps.size();
    for (std::uint64_t base = 0; base < n; base += 2 * m) {
        for (std::uint64_t k = base; k < base + m; ++k) {
            const Amplitude a0 = amps[k];
            const Amplitude a1 = amps[k + m];
            amps[k] = c * a0 - s * a1;
            amps[k + m] = s * a0 + c * a1;
        }
    }
}

void apply_rz(Statevector &state, double theta, int qubit) {
    auto amps = state.amplitudes();
    const Amplitude lo{std::cos(theta / 2), -std::sin(theta / 2)};
    const Amplitude hi = std::conj(lo);
    const std::uint64_t m = state.qubit_mask(qubit);
    for (std::uint64_t k = 0; k < amps.size(); ++k) {
        amps[k] *= (k & m) ? hi : lo;
    }
}

std::uint64_t outcome_mask_bits(const Statevector &state, std::span<const int> qubits, std::uint64_t index) {
    std::uint64_t outcome = 0;
    for (int q : qubits) {
        outcome = (outcome << 1) | ((index & state.qubit_mask(q)) ? 1u : 0u);
    }
    return outcome;
}

Statevector permute_qubits(const Statevector &state, std::span<const int> new_order) {
    // new_order[p] is the old qubit that ends up at position p.
    const int n = state.num_qubits();
    std::vector<Amplitude> out(state.size());
    std::vector<std::uint64_t> old_masks(n);
    for (int p = 0; p < n; ++p) old_masks[p] = state.qubit_mask(new_order[p]);
    for (std::uint64_t i = 0; i < state.size(); ++i) {
        std::uint64_t j = 0;
        for (int p = 0; p < n; ++p) {
            j = (j << 1) | ((i & old_masks[p]) ? 1u : 0u);
        }
        out[j] = state[i];
    }
    return Statevector::from_amplitudes(std::move(out), 1e-8, n);
}

}  // namespace

std::string to_string(GateKind kind) {
    switch (kind) {
        case GateKind::X:
            return "X";
        case GateKind::Y:
            return "Y";
        case GateKind::Z:
            return "Z";
        case GateKind::H:
            return "H";
        case GateKind::CNOT:
            return "CNOT";
        case GateKind::Rx:
            return "Rx";
        case GateKind::Ry:
            return "Ry";
        case GateKind::Rz:
            return "Rz";
        case GateKind::MCX:
            return "MCX";
    }
    return "?";
}

Statevector Statevector::zero(int num_qubits, int max_qubits) { return basis(num_qubits, 0, max_qubits); }

Statevector Statevector::basis(int num_qubits, std::uint64_t index, int max_qubits) {
    check_capacity(num_qubits, std::min(max_qubits, 62));
    std::vector<Amplitude> amps(std::uint64_t{1} << num_qubits);
    if (index >= amps.size()) throw PreconditionError("basis index out of range");
    amps[index] = 1.0;
    return Statevector(num_qubits, std::move(amps));
}

Statevector Statevector::from_amplitudes(std::vector<Amplitude> amplitudes, double tolerance, int max_qubits) {
    const std::size_t len = amplitudes.size();
    if (len < 2 || !std::has_single_bit(len)) {
        throw InvalidStateError("amplitude vector length " + std::to_string(len) + " is not a power of two >= 2");
    }
    const int n = std::countr_zero(len);
    check_capacity(n, std::min(max_qubits, 62));
    Statevector s(n, std::move(amplitudes));
    const double norm = s.norm_squared();
    if (!(std::abs(norm - 1.0) <= tolerance)) {
        throw InvalidStateError("state norm^2 " + std::to_string(norm) + " deviates from 1");
    }
    return s;
}

double Statevector::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto &a : amps_) acc += std::norm(a);
    return acc;
}

Gate Gate::inverse() const {
    Gate g = *this;
    if (is_rotation()) g.angle = -angle;
    return g;
}

void Gate::validate(int num_qubits) const {
    const bool controlled = kind == GateKind::CNOT || kind == GateKind::MCX;
    if (targets.size() != 1) throw PreconditionError(to_string(kind) + " needs exactly one target");
    if (!controlled && !controls.empty()) throw PreconditionError(to_string(kind) + " takes no controls");
    if (kind == GateKind::CNOT && controls.size() != 1) throw PreconditionError("CNOT needs exactly one control");
    if (kind == GateKind::MCX && controls.empty()) throw PreconditionError("MCX needs at least one control");
    std::vector<int> all = controls;
    all.push_back(targets[0]);
    check_distinct(all, num_qubits);
}

void Circuit::validate() const {
    for (const auto &g : gates) g.validate(num_qubits);
}

Circuit Circuit::inverse() const {
    Circuit inv{num_qubits, {}};
    for (auto it = gates.rbegin(); it != gates.rend(); ++it) inv.gates.push_back(it->inverse());
    return inv;
}

Statevector new_zero_state(int num_qubits, int max_qubits) { return Statevector::zero(num_qubits, max_qubits); }

void apply_gate(Statevector &state, const Gate &gate) {
    gate.validate(state.num_qubits());
    switch (gate.kind) {
        case GateKind::CNOT:
        case GateKind::MCX:
            apply_mcx(state, gate.controls, gate.targets[0]);
            return;
        case GateKind::Ry:
            apply_ry(state, gate.angle, gate.targets[0]);
            return;
        case GateKind::Rz:
            apply_rz(state, gate.angle, gate.targets[0]);
            return;
        default:
            apply_single(state, matrix_of(gate), gate.targets[0]);
    }
}

void apply_circuit(Statevector &state, const Circuit &circuit) {
    if (circuit.num_qubits != state.num_qubits()) {
        throw PreconditionError("circuit width " + std::to_string(circuit.num_qubits) + " != state width " +
                                std::to_string(state.num_qubits()));
    }
    for (const auto &g : circuit.gates) apply_gate(state, g);
}

void apply_mcx(Statevector &state, std::span<const int> controls, int target) {
    if (controls.empty()) throw PreconditionError("MCX needs at least one control");
    std::vector<int> all(controls.begin(), controls.end());
    all.push_back(target);
    check_distinct(all, state.num_qubits());

    std::uint64_t cmask = 0;
    for (int c : controls) cmask |= state.qubit_mask(c);
    const std::uint64_t tmask = state.qubit_mask(target);
    auto amps = state.amplitudes();
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & tmask) == 0 && (i & cmask) == cmask) std::swap(amps[i], amps[i | tmask]);
    }
}

double prob_one(const Statevector &state, int qubit) {
    check_qubit(state, qubit);
    const std::uint64_t m = state.qubit_mask(qubit);
    double p = 0.0;
    for (std::uint64_t i = 0; i < state.size(); ++i) {
        if (i & m) p += std::norm(state[i]);
    }
    return p;
}

std::vector<double> basis_probabilities(const Statevector &state) {
    std::vector<double> p(state.size());
    for (std::uint64_t i = 0; i < state.size(); ++i) p[i] = std::norm(state[i]);
    return p;
}

std::vector<double> marginal_probabilities(const Statevector &state, std::span<const int> qubits) {
    check_distinct(qubits, state.num_qubits());
    std::vector<double> p(std::uint64_t{1} << qubits.size(), 0.0);
    for (std::uint64_t i = 0; i < state.size(); ++i) {
        p[outcome_mask_bits(state, qubits, i)] += std::norm(state[i]);
    }
    return p;
}

Measurement measure_and_collapse(Statevector state, std::span<const int> qubits, UniformSource &rng) {
    const auto probs = marginal_probabilities(state, qubits);
    double total = 0.0;
    for (double p : probs) total += p;
    if (total < 1e-12) throw DegenerateMeasurementError("state has no probability mass to measure");

    const double u = rng.next_uniform() * total;
    std::size_t outcome = probs.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc) {
            outcome = k;
            break;
        }
    }
    if (outcome == probs.size()) {
        // u landed in the rounding gap above the last cumulative sum.
        outcome = probs.size() - 1;
        while (probs[outcome] == 0.0) --outcome;
    }

    std::vector<int> bits(qubits.size());
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        bits[j] = static_cast<int>((outcome >> (qubits.size() - 1 - j)) & 1u);
    }
    Statevector collapsed = project(std::move(state), qubits, bits);
    return {std::move(bits), std::move(collapsed)};
}

Statevector project(Statevector state, std::span<const int> qubits, std::span<const int> bits) {
    if (qubits.size() != bits.size()) throw PreconditionError("qubit and bit lists differ in length");
    check_distinct(qubits, state.num_qubits());
    std::uint64_t mask = 0, want = 0;
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        mask |= state.qubit_mask(qubits[j]);
        if (bits[j]) want |= state.qubit_mask(qubits[j]);
    }
    auto amps = state.amplitudes();
    double p = 0.0;
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
        if ((i & mask) == want) {
            p += std::norm(amps[i]);
        } else {
            amps[i] = 0.0;
        }
    }
    if (p < 1e-12) throw DegenerateMeasurementError("projected outcome has probability below 1e-12");
    const double scale = 1.0 / std::sqrt(p);
    for (auto &a : amps) a *= scale;
    return state;
}

Statevector remove_qubits(const Statevector &state, std::span<const int> qubits, std::span<const int> bits) {
    if (qubits.size() != bits.size()) throw PreconditionError("qubit and bit lists differ in length");
    check_distinct(qubits, state.num_qubits());
    const int n = state.num_qubits();
    const int kept_count = n - static_cast<int>(qubits.size());
    if (kept_count < 1) throw PreconditionError("cannot remove every qubit of a state");

    std::uint64_t fixed = 0;
    std::vector<bool> removed(n, false);
    for (std::size_t j = 0; j < qubits.size(); ++j) {
        removed[qubits[j]] = true;
        if (bits[j]) fixed |= state.qubit_mask(qubits[j]);
    }
    std::vector<std::uint64_t> kept_masks;
    for (int q = 0; q < n; ++q) {
        if (!removed[q]) kept_masks.push_back(state.qubit_mask(q));
    }
    std::vector<Amplitude> out(std::uint64_t{1} << kept_count);
    for (std::uint64_t r = 0; r < out.size(); ++r) {
        std::uint64_t full = fixed;
        for (int p = 0; p < kept_count; ++p) {
            if (r & (std::uint64_t{1} << (kept_count - 1 - p))) full |= kept_masks[p];
        }
        out[r] = state[full];
    }
    // Fails if the removed qubits were not in the stated definite values.
    return Statevector::from_amplitudes(std::move(out), 1e-8, kept_count);
}

Statevector move_qubit(const Statevector &state, int from, int to) {
    check_qubit(state, from);
    check_qubit(state, to);
    std::vector<int> order;
    for (int q = 0; q < state.num_qubits(); ++q) {
        if (q != from) order.push_back(q);
    }
    order.insert(order.begin() + to, from);
    return permute_qubits(state, order);
}

Statevector tensor_product(const Statevector &a, const Statevector &b, int max_qubits) {
    const int n = a.num_qubits() + b.num_qubits();
    check_capacity(n, max_qubits);
    std::vector<Amplitude> out(a.size() * b.size());
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        for (std::uint64_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
    }
    return Statevector::from_amplitudes(std::move(out), 1e-8, max_qubits);
}

Amplitude inner_product(const Statevector &a, const Statevector &b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw PreconditionError("inner product of " + std::to_string(a.num_qubits()) + "- and " +
                                std::to_string(b.num_qubits()) + "-qubit states");
    }
    Amplitude acc = 0.0;
    for (std::uint64_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double fidelity(const Statevector &a, const Statevector &b) { return std::norm(inner_product(a, b)); }

Statevector random_state(int num_qubits, RandomStream &rng) {
    check_capacity(num_qubits, kDefaultMaxQubits);
    std::vector<Amplitude> amps(std::uint64_t{1} << num_qubits);
    double norm = 0.0;
    for (auto &a : amps) {
        a = {rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto &a : amps) a *= scale;
    return Statevector::from_amplitudes(std::move(amps), 1e-8);
}

}  // namespace eqvfl::qsim
