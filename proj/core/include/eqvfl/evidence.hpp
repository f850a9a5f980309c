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
 * Dempster-Shafer evidence over a finite frame and its quantum encoding.
 *
 * Subsets of the frame {w_1, ..., w_n} are bitmasks with bit c set when
 * w_{c+1} belongs to the subset. A quantum evidence state assigns element
 * w_{c+1} to qubit c; since qubit 0 is the most significant bit of a basis
 * index, the two orderings are bit-reversals of each other (see
 * subset_to_basis).
 */
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "eqvfl/qsim.hpp"

namespace eqvfl::evidence {

using Subset = std::uint32_t;

inline constexpr int kMaxFrameSize = 16;

/// Basic belief assignment over the power set of an n-element frame. Mass on
/// the empty set is allowed because combination is unnormalized.
class MassFunction {
   public:
    /// Validates: masses.size() == 2^frame_size, all masses >= 0, sum 1 within tolerance.
    MassFunction(int frame_size, std::vector<double> masses, double tolerance = 1e-10);

    /// m(Omega) = 1.
    static MassFunction vacuous(int frame_size);

    int frame_size() const noexcept { return frame_size_; }
    std::size_t size() const noexcept { return masses_.size(); }
    Subset full_set() const noexcept { return static_cast<Subset>(masses_.size() - 1); }

    double operator[](Subset s) const { return masses_.at(s); }
    std::span<const double> masses() const noexcept { return masses_; }

   private:
    int frame_size_;
    std::vector<double> masses_;
};

/// Pl(F) = sum of m(G) over G intersecting F.
double plausibility(const MassFunction &m, Subset subset);

/// q(A) = sum of m(B) over supersets B of A.
double commonality(const MassFunction &m, Subset subset);

/// Pl({w_c}) for c = 1..n.
std::vector<double> singleton_plausibilities(const MassFunction &m);

/// Unnormalized conjunctive combination of two BBAs, O(4^n).
MassFunction ccr_combine(const MassFunction &a, const MassFunction &b);

/// Conjunctive combination of K >= 1 BBAs by pairwise folding.
MassFunction ccr_combine(std::span<const MassFunction> ms);

/// Basis index of subset `s` in an n-qubit evidence state.
std::uint64_t subset_to_basis(Subset s, int frame_size) noexcept;
Subset basis_to_subset(std::uint64_t basis, int frame_size) noexcept;

/// Quantum evidence state with amplitude sqrt(m(F)) * exp(i beta_F) on the
/// basis state of F. `phases` is indexed by subset and may be empty (all zero).
qsim::Statevector encode_bba(const MassFunction &m, std::span<const double> phases = {});

/// Masses |amplitude|^2 read back from a pure evidence state.
MassFunction decode_state(const qsim::Statevector &state);

/// Masses from an outcome distribution over n qubits, indexed as returned by
/// qsim::marginal_probabilities (first listed qubit most significant).
MassFunction decode_distribution(std::span<const double> probabilities, int frame_size);

}  // namespace eqvfl::evidence
