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
 * Tensor-train (TT) linear layer.
 *
 * The operator maps an input of shape P_1 x ... x P_L to an output of shape
 * Q_1 x ... x Q_L through cores W_l of shape R_{l-1} x P_l x Q_l x R_l with
 * R_0 = R_L = 1:
 *
 *   y(q_1..q_L) = sum_{p} W_1(p_1,q_1) W_2(p_2,q_2) ... W_L(p_L,q_L) x(p_1..p_L)
 *
 * where W_l(p,q) is the R_{l-1} x R_l matrix slice. Vectors are reshaped
 * row-major, p_1 (resp. q_1) slowest. The dense input is contracted directly
 * with the operator cores.
 */
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "eqvfl/random.hpp"

namespace eqvfl::ttn {

struct CoreShape {
    int rank_in;
    int in_dim;
    int out_dim;
    int rank_out;
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(rank_in) * in_dim * out_dim * rank_out;
    }
};

class TTLayerParams {
   public:
    /// `ranks` has L+1 entries with ranks.front() == ranks.back() == 1. Cores start at zero.
    TTLayerParams(std::vector<int> input_dims, std::vector<int> output_dims, std::vector<int> ranks);

    /// Convenience for the common case of one shared internal bond rank.
    static TTLayerParams with_uniform_rank(std::vector<int> input_dims, std::vector<int> output_dims, int rank);

    /// Identity operator; requires input_dims == output_dims and all ranks 1.
    static TTLayerParams identity(std::vector<int> dims);

    int num_cores() const noexcept { return static_cast<int>(input_dims_.size()); }
    const std::vector<int> &input_dims() const noexcept { return input_dims_; }
    const std::vector<int> &output_dims() const noexcept { return output_dims_; }
    const std::vector<int> &ranks() const noexcept { return ranks_; }
    std::size_t input_size() const noexcept;
    std::size_t output_size() const noexcept;

    CoreShape core_shape(int l) const;

    /// Core l, flattened row-major over (r_in, p, q, r_out).
    std::span<const double> core(int l) const { return cores_.at(l); }
    std::span<double> core(int l) { return cores_.at(l); }
    const std::vector<std::vector<double>> &cores() const noexcept { return cores_; }
    std::vector<std::vector<double>> &cores() noexcept { return cores_; }

    double &at(int l, int r_in, int p, int q, int r_out);
    double at(int l, int r_in, int p, int q, int r_out) const;

    /// Fills every core entry i.i.d. uniform on [-scale, scale]. A non-positive
    /// scale selects the default (prod P_l)^(-1/(2L)).
    void randomize(RandomStream &rng, double scale = 0.0);
    double default_init_scale() const;

   private:
    std::vector<int> input_dims_;
    std::vector<int> output_dims_;
    std::vector<int> ranks_;
    std::vector<std::vector<double>> cores_;
};

struct TTGradients {
    std::vector<std::vector<double>> cores;  ///< same layout as TTLayerParams::cores()
    std::vector<double> input;
};

/// Row-major dense matrix.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

std::vector<double> ttn_forward(const TTLayerParams &params, std::span<const double> x);

/// Exact gradients of a scalar loss given dLoss/dOutput.
TTGradients ttn_backward(const TTLayerParams &params, std::span<const double> x, std::span<const double> upstream);

/// sum_l R_{l-1} P_l Q_l R_l.
std::size_t ttn_param_count(const TTLayerParams &params);

/// The full prod(Q) x prod(P) operator; throws CapacityError above 1e6 entries.
DenseMatrix materialize_dense(const TTLayerParams &params);

/// (pi/2) * sigmoid(t), elementwise. Maps to (0, pi/2).
std::vector<double> squash(std::span<const double> y);
double squash(double t);
double squash_derivative(double t);

}  // namespace eqvfl::ttn
