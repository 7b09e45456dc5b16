// Copyright 2026 The qklab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "qklab/statevector.hpp"

namespace qklab {

/// A data embedding: a deterministic map from a real vector to a quantum
/// state. Both concrete maps expose their bandwidth knob through the single
/// `scaling_factor` concept; internally it is the IQP lambda or the total
/// evolution time t. Implementations are immutable value objects and embed()
/// is pure, so one map may serve many threads at once.
class FeatureMap {
  public:
    virtual ~FeatureMap() = default;

    /// Datapoint dimension d accepted by embed().
    virtual int dimension() const = 0;

    /// Qubits in the embedded state (d for IQP, d+1 for Hamiltonian evolution).
    virtual int qubit_count() const = 0;

    virtual double scaling_factor() const = 0;
    virtual std::string name() const = 0;

    /// Embeds x (length = dimension()) as a statevector.
    /// The scaling factor is folded into the inputs first (x -> scale * x),
    /// so embed() at scale s on x is bit-identical to embed() at scale 1 on
    /// the pre-scaled data.
    virtual StateVector embed(std::span<const double> x) const = 0;
};

/// IQP-style embedding on d qubits:
/// two rounds of (all-qubit Hadamard, diagonal phase layer), starting from
/// |0...0>, where the phase layer at basis index b advances the phase by the
/// Z-eigenvalue form of the linear plus full pairwise-quadratic polynomial
/// in the scaled inputs.
class IqpFeatureMap final : public FeatureMap {
  public:
    IqpFeatureMap(int dimension, double scaling,
                  int max_qubits = kDefaultMaxQubits);

    int dimension() const override { return dimension_; }
    int qubit_count() const override { return dimension_; }
    double scaling_factor() const override { return scaling_; }
    std::string name() const override { return "iqp"; }
    StateVector embed(std::span<const double> x) const override;

  private:
    int dimension_;
    double scaling_;
    int max_qubits_;
};

/// Diagonal phase angle of the IQP map at one basis index, evaluated as the
/// literal double sum over the full (j, j') grid, j = j' included and both
/// orders counted:
///   sum_j s*x_j*z_j + sum_j sum_j' s^2*x_j*x_j'*z_j*z_j'
/// with z_j = +1 when bit j of basis_index is 0 and -1 otherwise.
double iqp_phase(const IqpFeatureMap& map, std::span<const double> x,
                 std::size_t basis_index);

/// Trotterized Heisenberg-chain evolution on d+1 qubits applied to a fixed
/// Haar-random product state. Each of the trotter_steps sweeps applies
/// exp(-i * (t/T) * x_j * (XX + YY + ZZ)) to the qubit pair (j, j+1) for
/// j = 0..d-1 in ascending order (open boundary).
class HamEvoFeatureMap final : public FeatureMap {
  public:
    HamEvoFeatureMap(int dimension, double evolution_time, int trotter_steps,
                     std::uint64_t init_seed,
                     int max_qubits = kDefaultMaxQubits);

    int dimension() const override { return dimension_; }
    int qubit_count() const override { return dimension_ + 1; }
    double scaling_factor() const override { return time_; }
    std::string name() const override { return "hamevo"; }
    StateVector embed(std::span<const double> x) const override;

    int trotter_steps() const { return trotter_steps_; }
    std::uint64_t init_seed() const { return init_seed_; }

  private:
    int dimension_;
    double time_;
    int trotter_steps_;
    std::uint64_t init_seed_;
    int max_qubits_;
};

/// exp(-i * theta * (XX + YY + ZZ)) in closed form: eigenvalue e^{-i theta}
/// on the triplet subspace and e^{+3 i theta} on the singlet.
TwoQubitUnitary heisenberg_gate(double theta);

/// The map's initial product state. Factor j is drawn from the substream
/// keyed by (init_seed, j), so the state of qubit j is identical across
/// different total qubit counts.
StateVector init_product_state(const HamEvoFeatureMap& map);

/// Haar factor for one qubit of a seeded initial product state.
SingleQubitState haar_factor(std::uint64_t init_seed, int qubit);

} // namespace qklab
