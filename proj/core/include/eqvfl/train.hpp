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
 * Training: cross-entropy loss, parameter-shift gradients chained into the TT
 * layer backward pass, Adam, the mini-batch loop, the comparison baselines and
 * a gradient-variance diagnostic.
 *
 * Parameters are handled as groups of flat vectors. A party's groups are its
 * TT cores (one group per core), then its circuit angles (possibly empty),
 * then, for classical kinds, the MLP head as W1, b1, W2, b2. The server owns
 * at most one group.
 */
#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eqvfl/data.hpp"
#include "eqvfl/model.hpp"
#include "eqvfl/random.hpp"

namespace eqvfl::train {

using ParamGroups = std::vector<std::vector<double>>;

enum class GradMode { ParameterShift, FiniteDifference };
GradMode parse_grad_mode(const std::string &name);
std::string to_string(GradMode mode);

enum class ModelKind { EviQVFL, ClassicalAverage, ClassicalFuse, MeasureThenAverage, MeasureThenVqc };
ModelKind parse_model_kind(const std::string &name);
std::string to_string(ModelKind kind);
/// True when the server logits are measured probabilities, so they lie in [0, 1].
bool has_quantum_output(ModelKind kind);

struct TrainConfig {
    double learning_rate = 0.05;
    std::size_t batch_size = 64;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
    model::FusionMode eval_mode = model::FusionMode::Factorized;
    GradMode grad_mode = GradMode::ParameterShift;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    double fd_step = 1e-5;
    int threads = 1;
    /// Wall-clock seconds go into the trace only when set; otherwise the
    /// column is written as 0 so traces of equal seeds compare byte for byte.
    bool record_timing = false;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

struct OptimizerState {
    ParamGroups first_moment;
    ParamGroups second_moment;
    std::uint64_t step_count = 0;

    static OptimizerState zeros_like(const ParamGroups &params);
};

/// One bias-corrected Adam step in place. Throws PreconditionError on any
/// shape mismatch between state, params and grads.
void adam_step(OptimizerState &state, ParamGroups &params, const ParamGroups &grads, const TrainConfig &config);

/// -ln(probabilities[true class]). `label` must be one-hot.
double ce_loss(const model::Prediction &prediction, std::span<const double> label);

/// (f(theta + pi/2) - f(theta - pi/2)) / 2.
template <typename F>
double param_shift_grad(F &&eval, double theta) {
    constexpr double kShift = 1.5707963267948966;
    return 0.5 * (eval(theta + kShift) - eval(theta - kShift));
}

/// Classical stand-in for a party circuit: TT output -> tanh(W1 y + b1) -> W2 h + b2.
struct MlpHead {
    int inputs = 0;
    int hidden = 0;
    int outputs = 0;
    std::vector<double> w1;  ///< hidden x inputs, row-major
    std::vector<double> b1;
    std::vector<double> w2;  ///< outputs x hidden
    std::vector<double> b2;

    static MlpHead create(int inputs, int hidden, int outputs);
    std::size_t param_count() const noexcept { return w1.size() + b1.size() + w2.size() + b2.size(); }
    static std::size_t param_count(int inputs, int hidden, int outputs);
};

struct Topology {
    ModelKind kind = ModelKind::EviQVFL;
    int num_classes = 2;
    std::vector<ttn::TTLayerParams> party_ttns;  ///< shapes only; values are overwritten by initialize()
    int vqc_blocks = 2;
    int server_vqc_blocks = 2;
    /// Hidden width of the classical party heads; 0 picks the largest width
    /// whose per-party count does not exceed the quantum party's.
    int mlp_hidden = 0;
};

/// A complete vertically federated model: K parties and an optional server.
struct Federation {
    ModelKind kind = ModelKind::EviQVFL;
    int num_classes = 2;
    std::vector<model::PartyModel> parties;
    std::vector<MlpHead> heads;  ///< classical kinds only, one per party
    std::vector<double> server;  ///< fuse weights (C x K*C) or server circuit angles
    int server_blocks = 0;

    static Federation build(const Topology &topology);
    void initialize(std::uint64_t seed);

    int num_parties() const noexcept { return static_cast<int>(parties.size()); }
    ParamGroups party_params(int k) const;
    void set_party_params(int k, const ParamGroups &groups);
    ParamGroups server_params() const;
    void set_server_params(const ParamGroups &groups);

    std::size_t party_param_count(int k) const;
    std::size_t server_param_count() const noexcept { return server.size(); }
};

/// Server-side circuit of the measure-then-VQC baseline: Ry(pi * p) on each
/// of the K*C qubits followed by `blocks` layered blocks.
model::AnsatzCircuit server_ansatz(int num_qubits, int blocks);

struct SampleGradients {
    std::vector<ParamGroups> parties;
    ParamGroups server;
};

struct SampleResult {
    model::Prediction prediction;
    double loss = 0.0;
    std::vector<std::vector<double>> party_outputs;  ///< marginals (quantum) or logits (classical)
    SampleGradients grads;                           ///< filled only when requested
};

using SampleInputs = std::vector<std::span<const double>>;

SampleInputs sample_inputs(const data::VerticalDataset &dataset, std::size_t index);

/// Forward pass for one sample. `mode` selects the fusion route for EviQVFL;
/// the other kinds ignore it.
SampleResult forward(const Federation &fed, const SampleInputs &inputs, int label,
                     model::FusionMode mode = model::FusionMode::Factorized);

/// Loss and gradient for one sample. Parameter shift follows the factorized
/// fusion; finite differences perturb every parameter of every group.
SampleResult full_gradient(const Federation &fed, const SampleInputs &inputs, int label, const TrainConfig &config);

/// Same as full_gradient in ParameterShift mode, but party k's gradient is
/// computed from the supplied marginals of the other parties instead of
/// fresh forwards. Only defined for EviQVFL.
ParamGroups party_gradient_given(const Federation &fed, int k, std::span<const double> x, int label,
                                 std::span<const std::vector<double>> others_marginals);

model::Prediction baseline_forward(const Federation &fed, const SampleInputs &inputs);

struct EpochRecord {
    std::size_t epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double test_accuracy = 0.0;
    double seconds = 0.0;
};

struct TrainTrace {
    std::vector<EpochRecord> epochs;
    void write_csv(std::ostream &out) const;
    static TrainTrace read_csv(std::istream &in);
};

struct EvalResult {
    double mean_loss = 0.0;
    double accuracy = 0.0;
    double min_loss = 0.0;
    std::vector<int> predictions;
};

EvalResult evaluate(const Federation &fed, const data::VerticalDataset &dataset, model::FusionMode mode,
                    int threads = 1);

/// Mini-batch training. Every sample's gradient lands in its own slot and
/// slots are summed in batch order, so the result does not depend on the
/// thread count. Returns an empty trace for zero epochs.
TrainTrace train_run(Federation &fed, const data::VerticalDataset &train_set, const data::VerticalDataset &test_set,
                     const TrainConfig &config);

struct DiagnosticConfig {
    int num_parties = 4;
    int party_qubits = 4;
    int num_classes = 2;
    int party_blocks = 2;
    int variant_blocks = 8;
    int input_size = 196;
    int seeds = 50;
    std::uint64_t seed = 0;
};

struct DiagnosticReport {
    int total_qubits = 0;
    double eviqvfl_variance = 0.0;
    double variant_variance = 0.0;
    double variant_server_variance = 0.0;
    std::vector<double> eviqvfl_grads;
    std::vector<double> variant_grads;
};

/// Gradient variance of the first party's first circuit angle under random
/// initialization (angles uniform on [0, 2 pi)), for the evidential model and
/// for a variant that teleports every party register and runs a trainable
/// layered circuit over all of them.
DiagnosticReport barren_plateau_diagnostic(const DiagnosticConfig &config);

}  // namespace eqvfl::train
