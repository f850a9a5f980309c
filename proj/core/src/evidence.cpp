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

#include "eqvfl/evidence.hpp"

#include <cmath>
#include <string>

#include "eqvfl/errors.hpp"

namespace eqvfl::evidence {

namespace {

void check_subset(const MassFunction &m, Subset s) {
    if (s > m.full_set()) {
        throw PreconditionError("subset bitmask " + std::to_string(s) + " out of range for frame of size " +
                                std::to_string(m.frame_size()));
    }
}

}  // namespace

MassFunction::MassFunction(int frame_size, std::vector<double> masses, double tolerance)
    : frame_size_(frame_size), masses_(std::move(masses)) {
    if (frame_size < 1 || frame_size > kMaxFrameSize) {
        throw CapacityError("frame size " + std::to_string(frame_size) + " outside [1, " +
                            std::to_string(kMaxFrameSize) + "]");
    }
    if (masses_.size() != (std::size_t{1} << frame_size)) {
        throw InvalidStateError("mass vector has " + std::to_string(masses_.size()) + " entries, expected 2^" +
                                std::to_string(frame_size));
    }
    double total = 0.0;
    for (double v : masses_) {
        if (!(v >= 0.0)) throw InvalidStateError("negative or NaN mass " + std::to_string(v));
        total += v;
    }
    if (!(std::abs(total - 1.0) <= tolerance)) {
        throw InvalidStateError("masses sum to " + std::to_string(total) + ", not 1");
    }
}

MassFunction MassFunction::vacuous(int frame_size) {
    std::vector<double> masses(std::size_t{1} << frame_size, 0.0);
    masses.back() = 1.0;
    return MassFunction(frame_size, std::move(masses));
}

double plausibility(const MassFunction &m, Subset subset) {
    check_subset(m, subset);
    double pl = 0.0;
    for (Subset g = 0; g <= m.full_set(); ++g) {
        if (g & subset) pl += m[g];
    }
    return pl;
}

double commonality(const MassFunction &m, Subset subset) {
    check_subset(m, subset);
    double q = 0.0;
    for (Subset b = 0; b <= m.full_set(); ++b) {
        if ((b & subset) == subset) q += m[b];
    }
    return q;
}

std::vector<double> singleton_plausibilities(const MassFunction &m) {
    std::vector<double> pl(m.frame_size());
    for (int c = 0; c < m.frame_size(); ++c) pl[c] = plausibility(m, Subset{1} << c);
    return pl;
}

MassFunction ccr_combine(const MassFunction &a, const MassFunction &b) {
    if (a.frame_size() != b.frame_size()) {
        throw PreconditionError("cannot combine BBAs over frames of size " + std::to_string(a.frame_size()) +
                                " and " + std::to_string(b.frame_size()));
    }
    std::vector<double> out(a.size(), 0.0);
    for (Subset f = 0; f <= a.full_set(); ++f) {
        if (a[f] == 0.0) continue;
        for (Subset g = 0; g <= b.full_set(); ++g) out[f & g] += a[f] * b[g];
    }
    return MassFunction(a.frame_size(), std::move(out), 1e-9);
}

MassFunction ccr_combine(std::span<const MassFunction> ms) {
    if (ms.empty()) throw PreconditionError("ccr_combine needs at least one BBA");
    MassFunction acc = ms.front();
    for (std::size_t k = 1; k < ms.size(); ++k) acc = ccr_combine(acc, ms[k]);
    return acc;
}

std::uint64_t subset_to_basis(Subset s, int frame_size) noexcept {
    std::uint64_t basis = 0;
    for (int c = 0; c < frame_size; ++c) {
        if (s & (Subset{1} << c)) basis |= std::uint64_t{1} << (frame_size - 1 - c);
    }
    return basis;
}

Subset basis_to_subset(std::uint64_t basis, int frame_size) noexcept {
    Subset s = 0;
    for (int c = 0; c < frame_size; ++c) {
        if (basis & (std::uint64_t{1} << (frame_size - 1 - c))) s |= Subset{1} << c;
    }
    return s;
}

qsim::Statevector encode_bba(const MassFunction &m, std::span<const double> phases) {
    if (!phases.empty() && phases.size() != m.size()) {
        throw PreconditionError("phase vector has " + std::to_string(phases.size()) + " entries, expected " +
                                std::to_string(m.size()));
    }
    std::vector<qsim::Amplitude> amps(m.size());
    for (Subset f = 0; f <= m.full_set(); ++f) {
        const double beta = phases.empty() ? 0.0 : phases[f];
        amps[subset_to_basis(f, m.frame_size())] = std::polar(std::sqrt(m[f]), beta);
    }
    return qsim::Statevector::from_amplitudes(std::move(amps), 1e-9);
}

MassFunction decode_state(const qsim::Statevector &state) {
    const double norm = state.norm_squared();
    if (std::abs(norm - 1.0) > 1e-8) {
        throw InvalidStateError("cannot decode a state with norm^2 " + std::to_string(norm));
    }
    return decode_distribution(qsim::basis_probabilities(state), state.num_qubits());
}

MassFunction decode_distribution(std::span<const double> probabilities, int frame_size) {
    if (frame_size < 1 || frame_size > kMaxFrameSize || probabilities.size() != (std::size_t{1} << frame_size)) {
        throw PreconditionError("distribution size does not match frame size " + std::to_string(frame_size));
    }
    double total = 0.0;
    for (double p : probabilities) total += p;
    if (std::abs(total - 1.0) > 1e-8) {
        throw InvalidStateError("distribution sums to " + std::to_string(total));
    }
    std::vector<double> masses(probabilities.size());
    for (std::uint64_t b = 0; b < probabilities.size(); ++b) {
        masses[basis_to_subset(b, frame_size)] = probabilities[b] / total;
    }
    return MassFunction(frame_size, std::move(masses));
}

}  // namespace eqvfl::evidence
