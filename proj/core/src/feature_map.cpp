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

#include "qklab/feature_map.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace qklab {

namespace {

void check_dimension(int expected, std::size_t got, const char* map_name) {
    if (static_cast<std::size_t>(expected) != got) {
        throw InputError(std::string(map_name) + " map expects vectors of length " +
                         std::to_string(expected) + ", got " +
                         std::to_string(got));
    }
}

std::vector<double> scaled_copy(std::span<const double> x, double scale) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = scale * x[i];
    }
    return out;
}

// Signed sum of the scaled inputs under the Z eigenvalues of one basis index.
// The full pairwise double sum (j = j' included, both orders) is its square,
// so the phase layer needs only this linear form.
double signed_sum(const std::vector<double>& scaled, std::size_t basis_index) {
    double s = 0.0;
    for (std::size_t j = 0; j < scaled.size(); ++j) {
        s += ((basis_index >> j) & 1) ? -scaled[j] : scaled[j];
    }
    return s;
}

} // namespace

IqpFeatureMap::IqpFeatureMap(int dimension, double scaling, int max_qubits)
    : dimension_(dimension), scaling_(scaling), max_qubits_(max_qubits) {
    if (dimension < 1) {
        throw InputError("IQP map dimension must be positive, got " +
                         std::to_string(dimension));
    }
    if (!(scaling > 0.0) || !std::isfinite(scaling)) {
        throw InputError("IQP scaling factor must be positive and finite");
    }
}

StateVector IqpFeatureMap::embed(std::span<const double> x) const {
    check_dimension(dimension_, x.size(), "IQP");
    detail::check_qubit_capacity(dimension_, max_qubits_);
    const std::vector<double> scaled = scaled_copy(x, scaling_);
    auto phase = [&scaled](std::size_t b) {
        const double s = signed_sum(scaled, b);
        return s + s * s;
    };
    std::vector<Complex> amps(std::size_t{1} << dimension_, Complex(0.0, 0.0));
    amps[0] = Complex(1.0, 0.0);
    for (int round = 0; round < 2; ++round) {
        detail::hadamard_all_in_place(amps, dimension_);
        detail::diagonal_phases_in_place(amps, phase);
    }
    return StateVector(dimension_, std::move(amps));
}

double iqp_phase(const IqpFeatureMap& map, std::span<const double> x,
                 std::size_t basis_index) {
    check_dimension(map.dimension(), x.size(), "IQP");
    if (basis_index >= (std::size_t{1} << map.dimension())) {
        throw IndexError("basis index " + std::to_string(basis_index) +
                         " out of range for " +
                         std::to_string(map.dimension()) + " qubits");
    }
    const double lambda = map.scaling_factor();
    const int d = map.dimension();
    auto z = [basis_index](int j) {
        return ((basis_index >> j) & 1) ? -1.0 : 1.0;
    };
    double linear = 0.0;
    for (int j = 0; j < d; ++j) {
        linear += lambda * x[j] * z(j);
    }
    double quadratic = 0.0;
    for (int j = 0; j < d; ++j) {
        for (int jp = 0; jp < d; ++jp) {
            quadratic += lambda * lambda * x[j] * x[jp] * z(j) * z(jp);
        }
    }
    return linear + quadratic;
}

TwoQubitUnitary heisenberg_gate(double theta) {
    if (!std::isfinite(theta)) {
        throw InputError("Heisenberg gate angle is not finite");
    }
    const Complex triplet = std::polar(1.0, -theta);
    const Complex singlet = std::polar(1.0, 3.0 * theta);
    TwoQubitUnitary u;
    u(0, 0) = triplet;
    u(3, 3) = triplet;
    u(1, 1) = u(2, 2) = 0.5 * (triplet + singlet);
    u(1, 2) = u(2, 1) = 0.5 * (triplet - singlet);
    return u;
}

HamEvoFeatureMap::HamEvoFeatureMap(int dimension, double evolution_time,
                                   int trotter_steps, std::uint64_t init_seed,
                                   int max_qubits)
    : dimension_(dimension), time_(evolution_time),
      trotter_steps_(trotter_steps), init_seed_(init_seed),
      max_qubits_(max_qubits) {
    if (dimension < 1) {
        throw InputError("Hamiltonian evolution map dimension must be positive");
    }
    if (!(evolution_time > 0.0) || !std::isfinite(evolution_time)) {
        throw InputError("evolution time must be positive and finite");
    }
    if (trotter_steps < 1) {
        throw InputError("Trotter step count must be at least 1, got " +
                         std::to_string(trotter_steps));
    }
}

SingleQubitState haar_factor(std::uint64_t init_seed, int qubit) {
    Rng rng = Rng::keyed(init_seed, static_cast<std::uint64_t>(qubit));
    return sample_haar_single_qubit(rng);
}

StateVector init_product_state(const HamEvoFeatureMap& map) {
    std::vector<SingleQubitState> factors;
    factors.reserve(map.qubit_count());
    for (int q = 0; q < map.qubit_count(); ++q) {
        factors.push_back(haar_factor(map.init_seed(), q));
    }
    return StateVector::product_state(factors);
}

StateVector HamEvoFeatureMap::embed(std::span<const double> x) const {
    check_dimension(dimension_, x.size(), "Hamiltonian evolution");
    detail::check_qubit_capacity(qubit_count(), max_qubits_);
    const std::vector<double> scaled = scaled_copy(x, time_);

    std::vector<TwoQubitUnitary> gates;
    gates.reserve(dimension_);
    for (int j = 0; j < dimension_; ++j) {
        gates.push_back(heisenberg_gate(scaled[j] / trotter_steps_));
    }

    const StateVector initial = init_product_state(*this);
    std::vector<Complex> amps(initial.amplitudes().begin(),
                              initial.amplitudes().end());
    for (int step = 0; step < trotter_steps_; ++step) {
        for (int j = 0; j < dimension_; ++j) {
            detail::two_qubit_gate_in_place(amps, qubit_count(), gates[j], j,
                                            j + 1);
        }
    }
    return StateVector(qubit_count(), std::move(amps));
}

} // namespace qklab
