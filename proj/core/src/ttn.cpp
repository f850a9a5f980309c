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

#include "eqvfl/ttn.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "eqvfl/errors.hpp"

namespace eqvfl::ttn {

namespace {

std::size_t product(std::span<const int> dims, std::size_t from = 0) {
    std::size_t p = 1;
    for (std::size_t i = from; i < dims.size(); ++i) p *= static_cast<std::size_t>(dims[i]);
    return p;
}

double sigmoid(double t) {
    if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Intermediate tensors T_0 .. T_L of the left-to-right sweep. T_l has layout
// [prod Q_1..Q_l][R_l][prod P_{l+1}..P_L].
std::vector<std::vector<double>> sweep(const TTLayerParams &params, std::span<const double> x) {
    const int L = params.num_cores();
    const auto &in = params.input_dims();
    const auto &out = params.output_dims();
    const auto &ranks = params.ranks();

    std::vector<std::vector<double>> ts;
    ts.reserve(L + 1);
    ts.emplace_back(x.begin(), x.end());
    std::size_t A = 1;
    for (int l = 0; l < L; ++l) {
        const std::size_t R0 = ranks[l], P = in[l], Q = out[l], R1 = ranks[l + 1];
        const std::size_t B = product(in, l + 1);
        const auto w = params.core(l);
        const auto &t = ts.back();
        std::vector<double> next(A * Q * R1 * B, 0.0);
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t r0 = 0; r0 < R0; ++r0) {
                for (std::size_t p = 0; p < P; ++p) {
                    const double *row = &t[((a * R0 + r0) * P + p) * B];
                    for (std::size_t q = 0; q < Q; ++q) {
                        for (std::size_t r1 = 0; r1 < R1; ++r1) {
                            const double wv = w[((r0 * P + p) * Q + q) * R1 + r1];
                            if (wv == 0.0) continue;
                            double *dst = &next[((a * Q + q) * R1 + r1) * B];
                            for (std::size_t b = 0; b < B; ++b) dst[b] += wv * row[b];
                        }
                    }
                }
            }
        }
        ts.push_back(std::move(next));
        A *= Q;
    }
    return ts;
}

void check_input(const TTLayerParams &params, std::span<const double> x) {
    if (x.size() != params.input_size()) {
        throw PreconditionError("TT layer expects input of length " + std::to_string(params.input_size()) + ", got " +
                                std::to_string(x.size()));
    }
}

}  // namespace

TTLayerParams::TTLayerParams(std::vector<int> input_dims, std::vector<int> output_dims, std::vector<int> ranks)
    : input_dims_(std::move(input_dims)), output_dims_(std::move(output_dims)), ranks_(std::move(ranks)) {
    const std::size_t L = input_dims_.size();
    if (L == 0) throw PreconditionError("TT layer needs at least one core");
    if (output_dims_.size() != L) throw PreconditionError("input and output mode counts differ");
    if (ranks_.size() != L + 1) throw PreconditionError("TT layer needs L+1 bond ranks");
    if (ranks_.front() != 1 || ranks_.back() != 1) throw PreconditionError("boundary bond ranks must be 1");
    for (std::size_t l = 0; l < L; ++l) {
        if (input_dims_[l] < 1 || output_dims_[l] < 1) throw PreconditionError("mode sizes must be positive");
    }
    for (int r : ranks_) {
        if (r < 1) throw PreconditionError("bond ranks must be positive");
    }
    for (std::size_t l = 0; l < L; ++l) cores_.emplace_back(core_shape(static_cast<int>(l)).size(), 0.0);
}

TTLayerParams TTLayerParams::with_uniform_rank(std::vector<int> input_dims, std::vector<int> output_dims, int rank) {
    std::vector<int> ranks(input_dims.size() + 1, rank);
    ranks.front() = ranks.back() = 1;
    return TTLayerParams(std::move(input_dims), std::move(output_dims), std::move(ranks));
}

TTLayerParams TTLayerParams::identity(std::vector<int> dims) {
    TTLayerParams params(dims, dims, std::vector<int>(dims.size() + 1, 1));
    for (int l = 0; l < params.num_cores(); ++l) {
        for (int p = 0; p < dims[l]; ++p) params.at(l, 0, p, p, 0) = 1.0;
    }
    return params;
}

std::size_t TTLayerParams::input_size() const noexcept { return product(input_dims_); }
std::size_t TTLayerParams::output_size() const noexcept { return product(output_dims_); }

CoreShape TTLayerParams::core_shape(int l) const {
    return {ranks_.at(l), input_dims_.at(l), output_dims_.at(l), ranks_.at(l + 1)};
}

double &TTLayerParams::at(int l, int r_in, int p, int q, int r_out) {
    const CoreShape s = core_shape(l);
    return cores_[l].at(((static_cast<std::size_t>(r_in) * s.in_dim + p) * s.out_dim + q) * s.rank_out + r_out);
}

double TTLayerParams::at(int l, int r_in, int p, int q, int r_out) const {
    const CoreShape s = core_shape(l);
    return cores_[l].at(((static_cast<std::size_t>(r_in) * s.in_dim + p) * s.out_dim + q) * s.rank_out + r_out);
}

double TTLayerParams::default_init_scale() const {
    return std::pow(static_cast<double>(input_size()), -1.0 / (2.0 * num_cores()));
}

void TTLayerParams::randomize(RandomStream &rng, double scale) {
    const double s = scale > 0.0 ? scale : default_init_scale();
    for (auto &core : cores_) {
        for (auto &v : core) v = rng.uniform(-s, s);
    }
}

std::vector<double> ttn_forward(const TTLayerParams &params, std::span<const double> x) {
    check_input(params, x);
    return sweep(params, x).back();
}

TTGradients ttn_backward(const TTLayerParams &params, std::span<const double> x, std::span<const double> upstream) {
    check_input(params, x);
    if (upstream.size() != params.output_size()) {
        throw PreconditionError("upstream gradient has length " + std::to_string(upstream.size()) + ", expected " +
                                std::to_string(params.output_size()));
    }
    const int L = params.num_cores();
    const auto &in = params.input_dims();
    const auto &out = params.output_dims();
    const auto &ranks = params.ranks();
    const auto ts = sweep(params, x);

    TTGradients grads;
    grads.cores.resize(L);
    std::vector<double> d_next(upstream.begin(), upstream.end());
    for (int l = L - 1; l >= 0; --l) {
        const std::size_t R0 = ranks[l], P = in[l], Q = out[l], R1 = ranks[l + 1];
        const std::size_t B = product(in, l + 1);
        const std::size_t A = product(out) / product(out, l);
        const auto w = params.core(l);
        const auto &t = ts[l];
        auto &dw = grads.cores[l];
        dw.assign(w.size(), 0.0);
        std::vector<double> d_prev(t.size(), 0.0);
        for (std::size_t a = 0; a < A; ++a) {
            for (std::size_t r0 = 0; r0 < R0; ++r0) {
                for (std::size_t p = 0; p < P; ++p) {
                    const std::size_t in_base = ((a * R0 + r0) * P + p) * B;
                    for (std::size_t q = 0; q < Q; ++q) {
                        for (std::size_t r1 = 0; r1 < R1; ++r1) {
                            const std::size_t wi = ((r0 * P + p) * Q + q) * R1 + r1;
                            const double *g = &d_next[((a * Q + q) * R1 + r1) * B];
                            double acc = 0.0;
                            for (std::size_t b = 0; b < B; ++b) {
                                acc += t[in_base + b] * g[b];
                                d_prev[in_base + b] += w[wi] * g[b];
                            }
                            dw[wi] += acc;
                        }
                    }
                }
            }
        }
        d_next = std::move(d_prev);
    }
    grads.input = std::move(d_next);
    return grads;
}

std::size_t ttn_param_count(const TTLayerParams &params) {
    std::size_t n = 0;
    for (int l = 0; l < params.num_cores(); ++l) n += params.core_shape(l).size();
    return n;
}

DenseMatrix materialize_dense(const TTLayerParams &params) {
    const std::size_t rows = params.output_size();
    const std::size_t cols = params.input_size();
    if (rows * cols > 1'000'000) {
        throw CapacityError("dense TT materialization of " + std::to_string(rows) + "x" + std::to_string(cols) +
                            " exceeds 1e6 entries");
    }
    const int L = params.num_cores();
    const auto &in = params.input_dims();
    const auto &out = params.output_dims();
    DenseMatrix m{rows, cols, std::vector<double>(rows * cols)};

    std::vector<int> p_idx(L), q_idx(L);
    for (std::size_t r = 0; r < rows; ++r) {
        std::size_t rem = r;
        for (int l = L - 1; l >= 0; --l) {
            q_idx[l] = static_cast<int>(rem % out[l]);
            rem /= out[l];
        }
        for (std::size_t c = 0; c < cols; ++c) {
            rem = c;
            for (int l = L - 1; l >= 0; --l) {
                p_idx[l] = static_cast<int>(rem % in[l]);
                rem /= in[l];
            }
            // Row vector times the chain of R_{l-1} x R_l slices.
            std::vector<double> v{1.0};
            for (int l = 0; l < L; ++l) {
                const CoreShape s = params.core_shape(l);
                std::vector<double> nv(s.rank_out, 0.0);
                for (int i = 0; i < s.rank_in; ++i) {
                    for (int j = 0; j < s.rank_out; ++j) nv[j] += v[i] * params.at(l, i, p_idx[l], q_idx[l], j);
                }
                v = std::move(nv);
            }
            m.values[r * cols + c] = v[0];
        }
    }
    return m;
}

double squash(double t) { return std::numbers::pi / 2 * sigmoid(t); }

double squash_derivative(double t) {
    const double s = sigmoid(t);
    return std::numbers::pi / 2 * s * (1.0 - s);
}

std::vector<double> squash(std::span<const double> y) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = squash(y[i]);
    return out;
}

}  // namespace eqvfl::ttn
