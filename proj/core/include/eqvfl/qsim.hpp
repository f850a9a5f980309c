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
 * Dense statevector simulator.
 *
 * Qubit 0 is the most significant bit of a basis-state label, so the label
 * x_1 x_2 ... x_n read left to right corresponds to qubits 0 ... n-1 and the
 * amplitude of |x_1 ... x_n> lives at index sum_j x_j * 2^(n-1-j).
 *
 * Gates are applied in place by iterating over amplitude pairs; no 2^n x 2^n
 * matrix is ever formed.
 */
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "eqvfl/random.hpp"

namespace eqvfl::qsim {

using Amplitude = std::complex<double>;

inline constexpr int kDefaultMaxQubits = 24;

/// Amplitudes of an n-qubit register. Normalization is checked at
/// construction from raw amplitudes and preserved by every gate.
class Statevector {
   public:
    /// |0...0> on n qubits. Throws CapacityError unless 1 <= n <= max_qubits.
    static Statevector zero(int num_qubits, int max_qubits = kDefaultMaxQubits);

    /// Computational basis state |index>.
    static Statevector basis(int num_qubits, std::uint64_t index, int max_qubits = kDefaultMaxQubits);

    /// Wraps raw amplitudes. The length must be a power of two and the norm
    /// must be 1 within `tolerance`; otherwise InvalidStateError.
    static Statevector from_amplitudes(std::vector<Amplitude> amplitudes, double tolerance = 1e-10,
                                       int max_qubits = kDefaultMaxQubits);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t size() const noexcept { return amps_.size(); }

    std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
    std::span<Amplitude> amplitudes() noexcept { return amps_; }
    const Amplitude &operator[](std::size_t i) const { return amps_[i]; }
    Amplitude &operator[](std::size_t i) { return amps_[i]; }

    /// Bit of the basis index that holds `qubit`.
    std::uint64_t qubit_mask(int qubit) const noexcept { return std::uint64_t{1} << (num_qubits_ - 1 - qubit); }

    /// Sum of |amplitude|^2.
    double norm_squared() const noexcept;

   private:
    Statevector(int n, std::vector<Amplitude> amps) : num_qubits_(n), amps_(std::move(amps)) {}

    int num_qubits_;
    std::vector<Amplitude> amps_;
};

enum class GateKind { X, Y, Z, H, CNOT, Rx, Ry, Rz, MCX };

std::string to_string(GateKind kind);

/// One gate. Controls are non-empty only for CNOT and MCX; `angle` is used
/// only by the rotations, with R_a(t) = exp(-i t P_a / 2).
struct Gate {
    GateKind kind;
    std::vector<int> targets;
    std::vector<int> controls;
    double angle = 0.0;

    static Gate x(int q) { return {GateKind::X, {q}, {}, 0.0}; }
    static Gate y(int q) { return {GateKind::Y, {q}, {}, 0.0}; }
    static Gate z(int q) { return {GateKind::Z, {q}, {}, 0.0}; }
    static Gate h(int q) { return {GateKind::H, {q}, {}, 0.0}; }
    static Gate cnot(int control, int target) { return {GateKind::CNOT, {target}, {control}, 0.0}; }
    static Gate rx(int q, double theta) { return {GateKind::Rx, {q}, {}, theta}; }
    static Gate ry(int q, double theta) { return {GateKind::Ry, {q}, {}, theta}; }
    static Gate rz(int q, double theta) { return {GateKind::Rz, {q}, {}, theta}; }
    static Gate mcx(std::vector<int> controls, int target) { return {GateKind::MCX, {target}, std::move(controls), 0.0}; }

    bool is_rotation() const noexcept {
        return kind == GateKind::Rx || kind == GateKind::Ry || kind == GateKind::Rz;
    }

    /// The adjoint gate.
    Gate inverse() const;

    /// Throws PreconditionError if indices are out of range, repeated, or the
    /// target/control arity does not fit the kind.
    void validate(int num_qubits) const;
};

struct Circuit {
    int num_qubits = 0;
    std::vector<Gate> gates;

    Circuit &add(Gate g) {
        gates.push_back(std::move(g));
        return *this;
    }
    void validate() const;
    Circuit inverse() const;
};

Statevector new_zero_state(int num_qubits, int max_qubits = kDefaultMaxQubits);

void apply_gate(Statevector &state, const Gate &gate);
void apply_circuit(Statevector &state, const Circuit &circuit);

/// Flips `target` on every basis state whose control bits are all 1.
void apply_mcx(Statevector &state, std::span<const int> controls, int target);

/// <psi| (|1><1| on `qubit`) |psi>.
double prob_one(const Statevector &state, int qubit);

/// |amplitude|^2 for every basis index.
std::vector<double> basis_probabilities(const Statevector &state);

/// Outcome distribution of measuring `qubits`; outcome index has qubits[0]
/// as its most significant bit.
std::vector<double> marginal_probabilities(const Statevector &state, std::span<const int> qubits);

struct Measurement {
    std::vector<int> bits;  ///< one bit per measured qubit, in request order
    Statevector state;      ///< renormalized post-measurement state (same qubit count)
};

/// Samples one joint outcome of `qubits` from the Born distribution using a
/// single variate from `rng`, then collapses and renormalizes.
Measurement measure_and_collapse(Statevector state, std::span<const int> qubits, UniformSource &rng);

/// Projects onto a fixed outcome and renormalizes. Throws
/// DegenerateMeasurementError if that outcome has probability below 1e-12.
Statevector project(Statevector state, std::span<const int> qubits, std::span<const int> bits);

/// Removes qubits that are in a definite computational basis state (as after
/// measurement) and returns the state of the remaining qubits, in their
/// original relative order.
Statevector remove_qubits(const Statevector &state, std::span<const int> qubits, std::span<const int> bits);

/// Relabels qubit `from` as qubit `to`, shifting the qubits in between.
Statevector move_qubit(const Statevector &state, int from, int to);

/// Kronecker product; `a` occupies qubits 0 .. a.num_qubits()-1.
Statevector tensor_product(const Statevector &a, const Statevector &b, int max_qubits = kDefaultMaxQubits);

/// <a|b>.
Amplitude inner_product(const Statevector &a, const Statevector &b);

/// |<a|b>|^2; insensitive to global phase.
double fidelity(const Statevector &a, const Statevector &b);

/// Haar-like random state (normalized complex Gaussian vector).
Statevector random_state(int num_qubits, RandomStream &rng);

}  // namespace eqvfl::qsim
